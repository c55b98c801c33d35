#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include "finsler/atlas.hpp"
#include "finsler/metric.hpp"

namespace finsler {

/// h_ij(x) on an atlas, evaluated at every scalar type the metric kernels use.
class RiemannianMetricField {
 public:
  explicit RiemannianMetricField(std::shared_ptr<const ChartAtlas> atlas) : atlas_(std::move(atlas)) {}
  virtual ~RiemannianMetricField() = default;

#define FINSLER_DECLARE_MATRIX(T) virtual void matrix(int chart, std::span<const T> x, T* out) const = 0;
  FINSLER_SCALAR_TYPES(FINSLER_DECLARE_MATRIX)
#undef FINSLER_DECLARE_MATRIX

  const ChartAtlas& atlas() const { return *atlas_; }
  std::shared_ptr<const ChartAtlas> atlas_ptr() const { return atlas_; }
  int dimension() const { return atlas_->dimension(); }

  /// Factor by which h-norms exceed ambient Euclidean norms of pushed-forward
  /// vectors, when that factor is a constant (round spheres, Euclidean space).
  virtual std::optional<double> ambient_scale() const { return std::nullopt; }
  virtual std::string describe() const = 0;

  Matrix at(const ChartPoint& x) const;
  double norm(const ChartPoint& x, const Vector& v) const;

 private:
  std::shared_ptr<const ChartAtlas> atlas_;
};

template <class Derived>
class RiemannianMetricFieldBase : public RiemannianMetricField {
 public:
  using RiemannianMetricField::RiemannianMetricField;
#define FINSLER_DEFINE_MATRIX(T)                                                     \
  void matrix(int chart, std::span<const T> x, T* out) const override {             \
    static_cast<const Derived&>(*this).template compute<T>(chart, x, out);           \
  }
  FINSLER_SCALAR_TYPES(FINSLER_DEFINE_MATRIX)
#undef FINSLER_DEFINE_MATRIX
};

/// Round metric of radius rho on the stereographic sphere atlas, or the
/// Euclidean metric on the plane atlas.
class StandardMetricField : public RiemannianMetricFieldBase<StandardMetricField> {
 public:
  StandardMetricField(std::shared_ptr<const ChartAtlas> atlas, double radius);

  double radius() const { return radius_; }
  std::optional<double> ambient_scale() const override { return radius_; }
  std::string describe() const override;

  template <class T>
  void compute(int, std::span<const T> x, T* out) const {
    const int n = dimension();
    T conf(radius_ * radius_);
    if (atlas().kind() == ChartAtlas::Kind::sphere) {
      T s(0.0);
      for (int i = 0; i < n; ++i) s += x[i] * x[i];
      T d = T(2.0) / (s + 1.0);
      conf = radius_ * radius_ * d * d;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = i == j ? conf : T(0.0);
  }

 private:
  double radius_;
};

/// W^i(x) on an atlas.
class VectorFieldModel {
 public:
  explicit VectorFieldModel(std::shared_ptr<const ChartAtlas> atlas) : atlas_(std::move(atlas)) {}
  virtual ~VectorFieldModel() = default;

#define FINSLER_DECLARE_FIELD(T) virtual void field(int chart, std::span<const T> x, T* out) const = 0;
  FINSLER_SCALAR_TYPES(FINSLER_DECLARE_FIELD)
#undef FINSLER_DECLARE_FIELD

  const ChartAtlas& atlas() const { return *atlas_; }
  std::shared_ptr<const ChartAtlas> atlas_ptr() const { return atlas_; }
  int dimension() const { return atlas_->dimension(); }

  /// Supremum of the ambient Euclidean length of the field, when known.
  virtual std::optional<double> ambient_sup() const { return std::nullopt; }
  virtual nlohmann::json describe() const = 0;

  Vector at(const ChartPoint& x) const;

 private:
  std::shared_ptr<const ChartAtlas> atlas_;
};

template <class Derived>
class VectorFieldModelBase : public VectorFieldModel {
 public:
  using VectorFieldModel::VectorFieldModel;
#define FINSLER_DEFINE_FIELD(T)                                                      \
  void field(int chart, std::span<const T> x, T* out) const override {              \
    static_cast<const Derived&>(*this).template compute<T>(chart, x, out);           \
  }
  FINSLER_SCALAR_TYPES(FINSLER_DEFINE_FIELD)
#undef FINSLER_DEFINE_FIELD
};

/// Fields given by an ambient formula on the unit sphere (or on R^n):
///   rotation:  a * (axis x X) on the first three ambient coordinates
///   gradient:  a * (c - (c.X) X), the sphere gradient of X -> c.X
///   constant:  a * c (plane only)
class AmbientVectorField : public VectorFieldModelBase<AmbientVectorField> {
 public:
  enum class Kind { zero, rotation, gradient, constant };

  AmbientVectorField(std::shared_ptr<const ChartAtlas> atlas, Kind kind, AmbientVector direction, double amplitude);

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  const AmbientVector& direction() const { return direction_; }

  /// Same field with amplitude multiplied by s.
  std::shared_ptr<AmbientVectorField> scaled(double s) const;

  std::optional<double> ambient_sup() const override;
  nlohmann::json describe() const override;

  template <class T>
  void compute(int chart, std::span<const T> x, T* out) const {
    const int n = dimension();
    const int m = atlas().ambient_dimension();
    Buf<T> X;
    Buf<T> V;
    for (int i = 0; i < m; ++i) V[i] = T(0.0);
    if (kind_ == Kind::zero || amplitude_ == 0.0) {
      for (int i = 0; i < n; ++i) out[i] = T(0.0);
      return;
    }
    atlas().embed<T>(chart, x, X.data());
    switch (kind_) {
      case Kind::rotation: {
        const AmbientVector& w = direction_;
        V[0] = amplitude_ * (w[1] * X[2] - w[2] * X[1]);
        V[1] = amplitude_ * (w[2] * X[0] - w[0] * X[2]);
        V[2] = amplitude_ * (w[0] * X[1] - w[1] * X[0]);
        break;
      }
      case Kind::gradient: {
        T cx(0.0);
        for (int i = 0; i < m; ++i) cx += direction_[i] * X[i];
        for (int i = 0; i < m; ++i) V[i] = amplitude_ * (direction_[i] - cx * X[i]);
        break;
      }
      case Kind::constant:
        for (int i = 0; i < m; ++i) V[i] = T(amplitude_ * direction_[i]);
        break;
      case Kind::zero:
        break;
    }
    atlas().pull_back<T>(chart, x, std::span<const T>(V.data(), m), out);
  }

 private:
  Kind kind_;
  AmbientVector direction_;
  double amplitude_;
};

/// Riemannian metric h plus wind W with |W|_h < 1.
struct NavigationData {
  std::shared_ptr<const RiemannianMetricField> h;
  std::shared_ptr<const VectorFieldModel> W;

  /// lambda(x) = 1 - h(W, W).
  double lambda(const ChartPoint& x) const;
  /// sup |W|_h, exact when both factors are known in closed form, otherwise
  /// a maximum over a fixed sample set.
  double sup_wind_norm() const;
};

/// max over samples of |L_W h| (h-invariant norm), by centered differences
/// with step 1e-5 in chart coordinates.
double killing_residual(const RiemannianMetricField& h, const VectorFieldModel& W,
                        const std::vector<ChartPoint>& samples);

}  // namespace finsler

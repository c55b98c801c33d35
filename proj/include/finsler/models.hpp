#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "finsler/fields.hpp"
#include "finsler/metric.hpp"

namespace finsler {

/// F = sqrt(h_ij y^i y^j).
class RiemannianFunction : public MetricFunctionBase<RiemannianFunction> {
 public:
  explicit RiemannianFunction(std::shared_ptr<const RiemannianMetricField> h) : h_(std::move(h)) {}

  template <class T>
  T evaluate(int chart, std::span<const T> x, std::span<const T> y) const {
    const int n = h_->dimension();
    std::array<T, kMaxDim * kMaxDim> m;
    h_->matrix(chart, x, m.data());
    T q(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q += m[i * n + j] * y[i] * y[j];
    return sqrt(q);
  }

  std::optional<Matrix> riemannian_part(const ChartPoint& x) const override { return h_->at(x); }

 private:
  std::shared_ptr<const RiemannianMetricField> h_;
};

/// Zermelo navigation: F = (sqrt(lambda h^2 + W0^2) - W0) / lambda with
/// W0 = h(W, y) and lambda = 1 - h(W, W).
class RandersNavigationFunction : public MetricFunctionBase<RandersNavigationFunction> {
 public:
  explicit RandersNavigationFunction(NavigationData nav) : nav_(std::move(nav)) {}

  template <class T>
  T evaluate(int chart, std::span<const T> x, std::span<const T> y) const {
    const int n = nav_.h->dimension();
    std::array<T, kMaxDim * kMaxDim> m;
    Buf<T> w;
    nav_.h->matrix(chart, x, m.data());
    nav_.W->field(chart, x, w.data());
    T hyy(0.0), hww(0.0), w0(0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        hyy += m[i * n + j] * y[i] * y[j];
        hww += m[i * n + j] * w[i] * w[j];
        w0 += m[i * n + j] * w[i] * y[j];
      }
    }
    T lambda = 1.0 - hww;
    return (sqrt(lambda * hyy + w0 * w0) - w0) / lambda;
  }

  std::optional<Matrix> riemannian_part(const ChartPoint& x) const override { return nav_.h->at(x); }
  const NavigationData& navigation() const { return nav_; }

 private:
  NavigationData nav_;
};

/// F_k = alpha_k + beta_k on the unit S^3 from the right-invariant coframe
/// zeta = Im(Y conj(q)), q = X4 + X1 i + X2 j + X3 k.
class BaoShenFunction : public MetricFunctionBase<BaoShenFunction> {
 public:
  BaoShenFunction(std::shared_ptr<const ChartAtlas> atlas, double k, double zeta1_sign)
      : atlas_(std::move(atlas)), k_(k), sign_(zeta1_sign) {}

  /// zeta^a(y), a = 0..2, at chart point x.
  template <class T>
  void coframe(int chart, std::span<const T> x, std::span<const T> y, T* zeta) const {
    Buf<T> X;
    Buf<T> Y;
    atlas_->embed<T>(chart, x, X.data());
    atlas_->push_forward<T>(chart, x, y, Y.data());
    // Y conj(q) with q = (w, v) = (X3, X0..X2), Y = (Yw, Yv); imaginary part
    // is -Yw v + w Yv - Yv x v.
    const T& w = X[3];
    const T& Yw = Y[3];
    T c0 = Y[1] * X[2] - Y[2] * X[1];
    T c1 = Y[2] * X[0] - Y[0] * X[2];
    T c2 = Y[0] * X[1] - Y[1] * X[0];
    zeta[0] = sign_ * (w * Y[0] - Yw * X[0] - c0);
    zeta[1] = w * Y[1] - Yw * X[1] - c1;
    zeta[2] = w * Y[2] - Yw * X[2] - c2;
  }

  template <class T>
  T evaluate(int chart, std::span<const T> x, std::span<const T> y) const {
    Buf<T> z;
    coframe<T>(chart, x, y, z.data());
    T alpha = sqrt(k_ * k_ * z[0] * z[0] + k_ * z[1] * z[1] + k_ * z[2] * z[2]);
    return alpha + std::sqrt(k_ * k_ - k_) * z[0];
  }

  /// Matrix of alpha_k^2.
  std::optional<Matrix> riemannian_part(const ChartPoint& x) const override;

  double k() const { return k_; }
  double zeta1_sign() const { return sign_; }

 private:
  std::shared_ptr<const ChartAtlas> atlas_;
  double k_;
  double sign_;
};

/// A constructed model plus the data it was built from.
struct ModelBundle {
  std::shared_ptr<const FinslerMetricModel> metric;
  std::shared_ptr<const RiemannianMetricField> h;  ///< underlying Riemannian metric, if any
  std::optional<NavigationData> nav;
  std::shared_ptr<const BaoShenFunction> bao_shen;
  /// Riemannian model of the same sphere, used by volume checks.
  std::shared_ptr<const FinslerMetricModel> reference;
};

ModelBundle round_sphere(int n, double k);
ModelBundle euclidean_space(int n);

/// Randers metric from navigation data. Throws NavigationDomainError unless
/// sup |W|_h < 1.
ModelBundle randers_from_navigation(const NavigationData& nav, const std::string& name = "randers-nav",
                                    nlohmann::json parameters = nlohmann::json::object());

std::shared_ptr<AmbientVectorField> rotation_killing_field(const RiemannianMetricField& sphere,
                                                           const AmbientVector& axis, double amplitude);

/// Navigation data (h, aW). Throws NavigationDomainError if a sup|W|_h >= 1.
NavigationData killing_family(const NavigationData& nav, double a);

ModelBundle bao_shen_metric(double k_param);

/// max over points and the three cyclic equations of
/// |d zeta^a - 2 zeta^b ^ zeta^c| (sup-norm over coordinate pairs), using
/// centered differences with step 1e-5.
double structure_equation_residual(const BaoShenFunction& fn, const std::vector<ChartPoint>& points);

// ---- registry --------------------------------------------------------------

struct ModelInfo {
  std::string name;
  std::string summary;
  nlohmann::json schema;  ///< parameter name -> {type, default, description}
};

const std::vector<ModelInfo>& model_registry();

/// Builds a model from {"model": name, ...parameters}. Missing parameters take
/// schema defaults; unknown names or bad values throw ConfigError.
ModelBundle make_model(const nlohmann::json& spec);

}  // namespace finsler

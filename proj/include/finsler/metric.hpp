#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "finsler/atlas.hpp"
#include "finsler/autodiff.hpp"
#include "finsler/types.hpp"

namespace finsler {

using HD = HyperDual<double>;
using HDD = HyperDual<Dual<double>>;
using HD2 = HyperDual<HyperDual<double>>;

// Scalar types every templated kernel is instantiated for. F itself is
// evaluated at all four; the spray at double, Dual<double> and HD.
#define FINSLER_SCALAR_TYPES(X) X(double) X(HD) X(HDD) X(HD2)

/// Local expression of F(x, y) in chart coordinates.
class MetricFunction {
 public:
  virtual ~MetricFunction() = default;

#define FINSLER_DECLARE_EVAL(T) \
  virtual T eval(int chart, std::span<const T> x, std::span<const T> y) const = 0;
  FINSLER_SCALAR_TYPES(FINSLER_DECLARE_EVAL)
#undef FINSLER_DECLARE_EVAL

  /// Matrix of a Riemannian metric close to F at x, used to seed Newton solves.
  virtual std::optional<Matrix> riemannian_part(const ChartPoint&) const { return std::nullopt; }
};

/// CRTP bridge: Derived provides `template <class T> T evaluate(int, span<const T>, span<const T>) const`.
template <class Derived>
class MetricFunctionBase : public MetricFunction {
 public:
#define FINSLER_DEFINE_EVAL(T)                                                          \
  T eval(int chart, std::span<const T> x, std::span<const T> y) const override {        \
    return static_cast<const Derived&>(*this).template evaluate<T>(chart, x, y);         \
  }
  FINSLER_SCALAR_TYPES(FINSLER_DEFINE_EVAL)
#undef FINSLER_DEFINE_EVAL
};

/// Facts a model family is known to satisfy by construction. They are the
/// expected values verification suites compare against, never inputs to any
/// computation.
struct ModelTraits {
  std::optional<double> flag_curvature;  ///< constant K when known
  bool zero_s_curvature = false;         ///< S = 0 for the Busemann-Hausdorff measure
  bool reversible = false;
  bool riemannian = false;
  bool compact = true;
};

class FinslerMetricModel {
 public:
  FinslerMetricModel(std::shared_ptr<const ChartAtlas> atlas, std::shared_ptr<const MetricFunction> fn,
                     std::string name, nlohmann::json parameters, ModelTraits traits);

  const ChartAtlas& atlas() const { return *atlas_; }
  std::shared_ptr<const ChartAtlas> atlas_ptr() const { return atlas_; }
  int dimension() const { return atlas_->dimension(); }
  const std::string& name() const { return name_; }
  const nlohmann::json& parameters() const { return parameters_; }
  const ModelTraits& traits() const { return traits_; }
  bool is_reversed() const { return reversed_; }

  /// Constant-curvature scale used to size search horizons; 1 when unknown.
  double curvature_scale() const;

  template <class T>
  T eval(int chart, std::span<const T> x, std::span<const T> y) const {
    if (!reversed_) return fn_->eval(chart, x, y);
    Buf<T> neg;
    for (size_t i = 0; i < y.size(); ++i) neg[i] = -y[i];
    return fn_->eval(chart, x, std::span<const T>(neg.data(), y.size()));
  }

  double F(const ChartPoint& x, const Vector& y) const;
  std::optional<Matrix> riemannian_part(const ChartPoint& x) const;

  /// (x, y) -> F(x, -y). Applying it twice restores the original evaluator.
  FinslerMetricModel reversed() const;

 private:
  std::shared_ptr<const ChartAtlas> atlas_;
  std::shared_ptr<const MetricFunction> fn_;
  std::string name_;
  nlohmann::json parameters_;
  ModelTraits traits_;
  bool reversed_ = false;
};

struct FundamentalTensor {
  ChartPoint base;
  TangentVector direction;
  Matrix matrix;
};

double eval_F(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y);

/// g_ij = (1/2) [F^2]_{y^i y^j} by hyper-dual differentiation.
FundamentalTensor fundamental_tensor(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y);

/// Same tensor from 4th-order central differences of F^2 (step 1e-4 max(1,|y|)).
Matrix fundamental_tensor_fd(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y);

/// (1/2) d_y F^2 = g_ij(x,y) y^j.
Covector legendre(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y);

struct LegendreOptions {
  double tolerance = 1e-12;
  int max_iterations = 50;
};

/// Inverse Legendre map by damped Newton on y -> g(x,y) y.
TangentVector legendre_inverse(const FinslerMetricModel& metric, const Covector& xi,
                               const LegendreOptions& options = {});

/// F*(x, xi) = F(x, L^{-1} xi).
double dual_norm(const FinslerMetricModel& metric, const Covector& xi);

FinslerMetricModel reverse_metric(const FinslerMetricModel& metric);

// ---- templated tensor kernels ---------------------------------------------

/// g_ij(x, y) at scalar type T (F evaluated at HyperDual<T>). Row-major n x n.
template <class T>
void fundamental_tensor_kernel(const FinslerMetricModel& metric, int chart, std::span<const T> x,
                               std::span<const T> y, T* g) {
  using H = HyperDual<T>;
  const int n = metric.dimension();
  Buf<H> xs;
  Buf<H> ys;
  for (int i = 0; i < n; ++i) xs[i] = H(x[i]);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int m = 0; m < n; ++m) ys[m] = H(y[m], T(m == i ? 1.0 : 0.0), T(m == j ? 1.0 : 0.0), T(0.0));
      H f = metric.eval<H>(chart, std::span<const H>(xs.data(), n), std::span<const H>(ys.data(), n));
      H f2 = f * f;
      g[i * n + j] = f2.d * 0.5;
      g[j * n + i] = g[i * n + j];
    }
  }
}

/// Gaussian elimination with partial pivoting on the primal part; A is
/// destroyed, b is overwritten with the solution.
template <class T>
bool solve_small(int n, T* A, T* b) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(primal(A[col * n + col]));
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(primal(A[r * n + col]));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    T inv = T(1.0) / A[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      T f = A[r * n + col] * inv;
      if (primal(f) == 0.0 && !is_ad<T>::value) continue;
      for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    T acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= A[r * n + c] * b[c];
    b[r] = acc / A[r * n + r];
  }
  return true;
}

}  // namespace finsler

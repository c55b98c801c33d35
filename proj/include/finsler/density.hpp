#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "finsler/fields.hpp"
#include "finsler/metric.hpp"

namespace finsler {

/// Gauss-Legendre nodes and weights on [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int count, double a = -1.0, double b = 1.0);

struct BhOptions {
  double rel_tol = 1e-12;
  int max_level = 8;  ///< number of node doublings before giving up
};

/// sigma_BH(x) = vol(B^n) / vol{y : F(x, y) < 1}. The unit-ball volume is
/// (1/n) * integral over S^{n-1} of F^{-n}; supported for n = 2, 3.
double bh_density(const FinslerMetricModel& metric, const ChartPoint& x, const BhOptions& options = {});

/// Density of dmu = sigma dx in each chart.
class VolumeDensity {
 public:
  enum class Kind { busemann_hausdorff, riemannian, custom };

  static VolumeDensity busemann_hausdorff(const FinslerMetricModel& metric, BhOptions options = {});
  static VolumeDensity riemannian(std::shared_ptr<const RiemannianMetricField> h);
  static VolumeDensity custom(std::function<double(const ChartPoint&)> sigma, std::string name);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  /// sigma(x); throws DensityError unless positive and finite.
  double operator()(const ChartPoint& x) const;
  /// d Phi / dx^i with Phi = ln sigma (4th-order central differences, step 1e-3).
  Vector log_gradient(const ChartPoint& x) const;

 private:
  VolumeDensity(Kind kind, std::function<double(const ChartPoint&)> fn, std::string name)
      : kind_(kind), fn_(std::move(fn)), name_(std::move(name)) {}

  Kind kind_;
  std::function<double(const ChartPoint&)> fn_;
  std::string name_;
};

}  // namespace finsler

#include "finsler/density.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace finsler {

QuadratureRule gauss_legendre(int count, double a, double b) {
  if (count < 1) throw ParameterError("quadrature needs at least one node");
  // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(count, count);
  for (int i = 1; i < count; ++i) {
    double beta = i / std::sqrt(4.0 * i * i - 1.0);
    T(i, i - 1) = T(i - 1, i) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  QuadratureRule rule;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < count; ++i) {
    double v = es.eigenvectors()(0, i);
    rule.nodes.push_back(mid + half * es.eigenvalues()[i]);
    rule.weights.push_back(2.0 * v * v * half);
  }
  return rule;
}

namespace {

double unit_ball_volume(int n) { return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0); }

double indicatrix_integral(const FinslerMetricModel& metric, const ChartPoint& x, int level) {
  const int n = metric.dimension();
  if (n == 2) {
    const int m = 64 << level;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
      double t = 2.0 * std::numbers::pi * i / m;
      Vector y = (Vector(2) << std::cos(t), std::sin(t)).finished();
      double f = metric.F(x, y);
      acc += 1.0 / (f * f);
    }
    return acc * 2.0 * std::numbers::pi / m;
  }
  const int m = 16 << level;
  QuadratureRule gl = gauss_legendre(m);
  const int mp = 2 * m;
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    double z = gl.nodes[i];
    double rho = std::sqrt(1.0 - z * z);
    double row = 0.0;
    for (int j = 0; j < mp; ++j) {
      double t = 2.0 * std::numbers::pi * j / mp;
      Vector y = (Vector(3) << rho * std::cos(t), rho * std::sin(t), z).finished();
      double f = metric.F(x, y);
      row += 1.0 / (f * f * f);
    }
    acc += gl.weights[i] * row * 2.0 * std::numbers::pi / mp;
  }
  return acc;
}

}  // namespace

double bh_density(const FinslerMetricModel& metric, const ChartPoint& x, const BhOptions& options) {
  const int n = metric.dimension();
  if (n != 2 && n != 3) throw DensityError("Busemann-Hausdorff quadrature supports n = 2, 3");
  metric.atlas().validate(x);
  double prev = indicatrix_integral(metric, x, 0);
  for (int level = 1; level <= options.max_level; ++level) {
    double cur = indicatrix_integral(metric, x, level);
    if (std::abs(cur - prev) <= options.rel_tol * std::abs(cur)) {
      double vol = cur / n;
      return unit_ball_volume(n) / vol;
    }
    prev = cur;
  }
  throw DensityError("indicatrix quadrature did not converge");
}

VolumeDensity VolumeDensity::busemann_hausdorff(const FinslerMetricModel& metric, BhOptions options) {
  return VolumeDensity(
      Kind::busemann_hausdorff, [metric, options](const ChartPoint& x) { return bh_density(metric, x, options); },
      "busemann-hausdorff");
}

VolumeDensity VolumeDensity::riemannian(std::shared_ptr<const RiemannianMetricField> h) {
  return VolumeDensity(
      Kind::riemannian, [h](const ChartPoint& x) { return std::sqrt(h->at(x).determinant()); }, "riemannian");
}

VolumeDensity VolumeDensity::custom(std::function<double(const ChartPoint&)> sigma, std::string name) {
  return VolumeDensity(Kind::custom, std::move(sigma), std::move(name));
}

double VolumeDensity::operator()(const ChartPoint& x) const {
  double s = fn_(x);
  if (!(s > 0.0) || !std::isfinite(s)) throw DensityError("volume density is not positive at the requested point");
  return s;
}

Vector VolumeDensity::log_gradient(const ChartPoint& x) const {
  const int n = static_cast<int>(x.coords.size());
  const double h = 1e-3;
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    auto at = [&](double s) {
      ChartPoint z = x;
      z.coords[i] += s;
      return std::log((*this)(z));
    };
    out[i] = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
  }
  return out;
}

}  // namespace finsler

#include "finsler/metric.hpp"

#include <cmath>

namespace finsler {

FinslerMetricModel::FinslerMetricModel(std::shared_ptr<const ChartAtlas> atlas,
                                       std::shared_ptr<const MetricFunction> fn, std::string name,
                                       nlohmann::json parameters, ModelTraits traits)
    : atlas_(std::move(atlas)),
      fn_(std::move(fn)),
      name_(std::move(name)),
      parameters_(std::move(parameters)),
      traits_(traits) {}

double FinslerMetricModel::curvature_scale() const {
  if (traits_.flag_curvature && *traits_.flag_curvature > 0.0) return *traits_.flag_curvature;
  return 1.0;
}

double FinslerMetricModel::F(const ChartPoint& x, const Vector& y) const {
  const int n = dimension();
  return eval<double>(x.chart, std::span<const double>(x.coords.data(), n),
                      std::span<const double>(y.data(), n));
}

std::optional<Matrix> FinslerMetricModel::riemannian_part(const ChartPoint& x) const {
  return fn_->riemannian_part(x);
}

FinslerMetricModel FinslerMetricModel::reversed() const {
  FinslerMetricModel out = *this;
  out.reversed_ = !reversed_;
  const std::string suffix = "~reversed";
  if (name_.size() > suffix.size() && name_.compare(name_.size() - suffix.size(), suffix.size(), suffix) == 0)
    out.name_ = name_.substr(0, name_.size() - suffix.size());
  else
    out.name_ = name_ + suffix;
  return out;
}

namespace {

void check_point(const FinslerMetricModel& metric, const ChartPoint& x) {
  metric.atlas().validate(x);
  if (metric.atlas().kind() == ChartAtlas::Kind::sphere && x.coords.norm() > 1e6)
    throw DomainError("point lies outside the chart domain");
}

void check_direction(const FinslerMetricModel& metric, const Vector& y) {
  if (y.size() != metric.dimension()) throw DomainError("vector has wrong dimension");
  if (!y.allFinite()) throw DomainError("non-finite vector components");
}

}  // namespace

double eval_F(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y) {
  check_point(metric, x);
  check_direction(metric, y);
  if (y.isZero(0.0)) return 0.0;
  return metric.F(x, y);
}

FundamentalTensor fundamental_tensor(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y) {
  check_point(metric, x);
  check_direction(metric, y);
  if (y.isZero(0.0)) throw SingularityError("fundamental tensor requested at y = 0");
  const int n = metric.dimension();
  Matrix g(n, n);
  std::array<double, kMaxDim * kMaxDim> buf{};
  fundamental_tensor_kernel<double>(metric, x.chart, std::span<const double>(x.coords.data(), n),
                                    std::span<const double>(y.data(), n), buf.data());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = buf[i * n + j];
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success || !g.allFinite())
    throw ConvexityError("fundamental tensor is not positive definite");
  return {x, {x, y}, g};
}

Matrix fundamental_tensor_fd(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y) {
  check_point(metric, x);
  check_direction(metric, y);
  if (y.isZero(0.0)) throw SingularityError("fundamental tensor requested at y = 0");
  const int n = metric.dimension();
  const double h = 1e-4 * std::max(1.0, y.norm());
  auto f2 = [&](const Vector& v) {
    double f = metric.F(x, v);
    return f * f;
  };
  static constexpr std::array<int, 4> off{-2, -1, 1, 2};
  static constexpr std::array<double, 4> d1{1.0, -8.0, 8.0, -1.0};  // / 12h
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    // (-f(-2) + 16 f(-1) - 30 f(0) + 16 f(1) - f(2)) / 12h^2
    Vector v = y;
    double acc = -30.0 * f2(y);
    for (int a = 0; a < 4; ++a) {
      v = y;
      v[i] += off[a] * h;
      acc += (std::abs(off[a]) == 1 ? 16.0 : -1.0) * f2(v);
    }
    g(i, i) = 0.5 * acc / (12.0 * h * h);
    for (int j = i + 1; j < n; ++j) {
      double mixed = 0.0;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          v = y;
          v[i] += off[a] * h;
          v[j] += off[b] * h;
          mixed += d1[a] * d1[b] * f2(v);
        }
      }
      g(i, j) = g(j, i) = 0.5 * mixed / (144.0 * h * h);
    }
  }
  return g;
}

Covector legendre(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y) {
  FundamentalTensor g = fundamental_tensor(metric, x, y);
  return {x, g.matrix * y};
}

TangentVector legendre_inverse(const FinslerMetricModel& metric, const Covector& xi,
                               const LegendreOptions& options) {
  const ChartPoint& x = xi.base;
  check_point(metric, x);
  check_direction(metric, xi.components);
  const double scale = xi.components.norm();
  if (scale == 0.0) throw SingularityError("Legendre inverse of the zero covector");

  // Seed: direction from the Riemannian part when available, then scale so that
  // xi(y) = F(y)^2, which the exact solution satisfies.
  Vector d;
  if (auto a = metric.riemannian_part(x))
    d = a->ldlt().solve(xi.components);
  else
    d = xi.components;
  double xd = xi.components.dot(d);
  if (!(xd > 0.0)) {
    d = xi.components;
    xd = xi.components.dot(d);
  }
  double fd = metric.F(x, d);
  Vector y = d * (xd / (fd * fd));

  auto residual = [&](const Vector& v, Matrix* jac) {
    FundamentalTensor g = fundamental_tensor(metric, x, v);
    if (jac) *jac = g.matrix;
    return Vector(g.matrix * v - xi.components);
  };

  Matrix jac;
  Vector r = residual(y, &jac);
  double rn = r.norm();
  for (int it = 0; it < options.max_iterations; ++it) {
    if (rn <= options.tolerance * scale) return {x, y};
    Vector step = jac.ldlt().solve(-r);
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      Vector trial = y + alpha * step;
      if (!trial.isZero(0.0)) {
        try {
          Matrix jt;
          Vector rt = residual(trial, &jt);
          if (rt.norm() < rn || rt.norm() <= options.tolerance * scale) {
            y = trial;
            r = rt;
            rn = rt.norm();
            jac = jt;
            accepted = true;
            break;
          }
        } catch (const ConvexityError&) {
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  if (rn <= options.tolerance * scale) return {x, y};
  throw ConvergenceError("Legendre inversion did not converge", rn / scale);
}

double dual_norm(const FinslerMetricModel& metric, const Covector& xi) {
  if (xi.components.isZero(0.0)) return 0.0;
  TangentVector v = legendre_inverse(metric, xi);
  return metric.F(xi.base, v.components);
}

FinslerMetricModel reverse_metric(const FinslerMetricModel& metric) { return metric.reversed(); }

}  // namespace finsler

#include "finsler/atlas.hpp"

#include <cmath>

namespace finsler {

namespace {
const std::string kPlaneName = "plane";
const std::string kNorthName = "north";
const std::string kSouthName = "south";
}  // namespace

ChartAtlas ChartAtlas::plane(int n) {
  if (n < 1 || n > kMaxDim) throw ParameterError("plane dimension out of range");
  return ChartAtlas(Kind::plane, n, 0.0);
}

ChartAtlas ChartAtlas::sphere(int n, double switch_threshold) {
  if (n < 2 || n > kMaxDim) throw ParameterError("sphere dimension out of range");
  if (!(switch_threshold > 1.0)) throw ParameterError("switch threshold must exceed 1");
  return ChartAtlas(Kind::sphere, n, switch_threshold);
}

const std::string& ChartAtlas::chart_name(int chart) const {
  if (kind_ == Kind::plane) return kPlaneName;
  return chart == 0 ? kNorthName : kSouthName;
}

int ChartAtlas::chart_id(const std::string& name) const {
  for (int c = 0; c < chart_count(); ++c)
    if (chart_name(c) == name) return c;
  throw DomainError("unknown chart '" + name + "'");
}

void ChartAtlas::validate(const ChartPoint& p) const {
  if (p.chart < 0 || p.chart >= chart_count()) throw DomainError("chart id outside the atlas");
  if (p.coords.size() != n_) throw DomainError("coordinate count does not match dimension");
  if (!p.coords.allFinite()) throw DomainError("non-finite chart coordinates");
}

AmbientVector ChartAtlas::embed(const ChartPoint& p) const {
  AmbientVector X(ambient_dimension());
  embed<double>(p.chart, std::span<const double>(p.coords.data(), n_), X.data());
  return X;
}

AmbientVector ChartAtlas::push_forward(const TangentVector& v) const {
  AmbientVector Y(ambient_dimension());
  push_forward<double>(v.base.chart, std::span<const double>(v.base.coords.data(), n_),
                       std::span<const double>(v.components.data(), n_), Y.data());
  return Y;
}

Vector ChartAtlas::pull_back(const ChartPoint& p, const AmbientVector& v) const {
  Vector out(n_);
  pull_back<double>(p.chart, std::span<const double>(p.coords.data(), n_),
                    std::span<const double>(v.data(), ambient_dimension()), out.data());
  return out;
}

ChartPoint ChartAtlas::from_ambient(const AmbientVector& X) const {
  ChartPoint p{0, Vector(n_)};
  if (kind_ == Kind::plane) {
    p.coords = X.head(n_);
    return p;
  }
  AmbientVector U = X / X.norm();
  // Pick the chart whose projection pole is farther away.
  p.chart = U[n_] <= 0.0 ? 0 : 1;
  double sign = p.chart == 0 ? 1.0 : -1.0;
  double denom = 1.0 - sign * U[n_];
  p.coords = U.head(n_) / denom;
  return p;
}

ChartPoint ChartAtlas::to_chart(const ChartPoint& p, int chart) const {
  if (p.chart == chart) return p;
  ChartPoint q{chart, Vector(n_)};
  transition<double>(p.chart, chart, std::span<const double>(p.coords.data(), n_), q.coords.data());
  return q;
}

Matrix ChartAtlas::transition_jacobian(const ChartPoint& p, int chart) const {
  Matrix J = Matrix::Identity(n_, n_);
  if (p.chart == chart || kind_ == Kind::plane) return J;
  Buf<Dual<double>> x;
  Buf<Dual<double>> out;
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) x[i] = Dual<double>(p.coords[i], i == j ? 1.0 : 0.0);
    transition<Dual<double>>(p.chart, chart, std::span<const Dual<double>>(x.data(), n_), out.data());
    for (int i = 0; i < n_; ++i) J(i, j) = out[i].b;
  }
  return J;
}

TangentVector ChartAtlas::to_chart(const TangentVector& v, int chart) const {
  if (v.base.chart == chart) return v;
  Matrix J = transition_jacobian(v.base, chart);
  return {to_chart(v.base, chart), J * v.components};
}

Covector ChartAtlas::to_chart(const Covector& w, int chart) const {
  if (w.base.chart == chart) return w;
  // Covectors transform with the inverse transpose.
  Matrix J = transition_jacobian(w.base, chart);
  Vector comps = J.transpose().partialPivLu().solve(w.components);
  return {to_chart(w.base, chart), comps};
}

ChartPoint ChartAtlas::normalize(const ChartPoint& p) const {
  if (kind_ == Kind::plane || p.coords.norm() <= switch_threshold_) return p;
  return to_chart(p, 1 - p.chart);
}

TangentVector ChartAtlas::normalize(const TangentVector& v) const {
  if (kind_ == Kind::plane || v.base.coords.norm() <= switch_threshold_) return v;
  return to_chart(v, 1 - v.base.chart);
}

ChartPoint ChartAtlas::sample(std::mt19937_64& rng) const {
  if (kind_ == Kind::plane) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ChartPoint p{0, Vector(n_)};
    for (int i = 0; i < n_; ++i) p.coords[i] = u(rng);
    return p;
  }
  std::normal_distribution<double> g(0.0, 1.0);
  AmbientVector X(ambient_dimension());
  do {
    for (int i = 0; i < ambient_dimension(); ++i) X[i] = g(rng);
  } while (X.norm() < 1e-8);
  return from_ambient(X);
}

double ChartAtlas::ambient_distance(const ChartPoint& a, const ChartPoint& b) const {
  return (embed(a) - embed(b)).norm();
}

}  // namespace finsler

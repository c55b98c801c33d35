#include "finsler/curvature.hpp"

#include <cmath>

namespace finsler {

namespace {

void check_direction(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y) {
  metric.atlas().validate(x);
  if (y.size() != metric.dimension() || !y.allFinite()) throw DomainError("bad direction");
  if (y.isZero(0.0)) throw SingularityError("zero flagpole");
}

}  // namespace

Matrix jacobi_endomorphism(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y) {
  check_direction(metric, x, y);
  const int n = metric.dimension();
  using H = HD;
  Buf<H> xs;
  Buf<H> ys;
  Buf<H> G;
  Matrix dGx(n, n), A(n, n), B(n, n), N(n, n);
  Vector G0(n);
  auto call = [&]() {
    if (!spray_kernel<H>(metric, x.chart, std::span<const H>(xs.data(), n), std::span<const H>(ys.data(), n),
                         G.data()))
      throw ConvexityError("singular fundamental tensor in spray");
  };
  for (int k = 0; k < n; ++k) {
    // d_{x^k} G (b part) and d_{y^k} G (c part).
    for (int m = 0; m < n; ++m) {
      xs[m] = H(x.coords[m], m == k ? 1.0 : 0.0, 0.0, 0.0);
      ys[m] = H(y[m], 0.0, m == k ? 1.0 : 0.0, 0.0);
    }
    call();
    for (int i = 0; i < n; ++i) {
      G0[i] = G[i].a;
      dGx(i, k) = G[i].b;
      N(i, k) = G[i].c;
    }
  }
  for (int k = 0; k < n; ++k) {
    // y^j d_{x^j} d_{y^k} G.
    for (int m = 0; m < n; ++m) {
      xs[m] = H(x.coords[m], y[m], 0.0, 0.0);
      ys[m] = H(y[m], 0.0, m == k ? 1.0 : 0.0, 0.0);
    }
    call();
    for (int i = 0; i < n; ++i) A(i, k) = G[i].d;
    // G^j d_{y^j} d_{y^k} G.
    for (int m = 0; m < n; ++m) {
      xs[m] = H(x.coords[m]);
      ys[m] = H(y[m], G0[m], m == k ? 1.0 : 0.0, 0.0);
    }
    call();
    for (int i = 0; i < n; ++i) B(i, k) = G[i].d;
  }
  return 2.0 * dGx - A + 2.0 * B - N * N;
}

double flag_curvature(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V, const Vector& W) {
  check_direction(metric, x, V);
  if (W.size() != V.size() || !W.allFinite()) throw DomainError("bad transverse vector");
  Matrix g = fundamental_tensor(metric, x, V).matrix;
  const double gvv = V.dot(g * V), gww = W.dot(g * W), gvw = V.dot(g * W);
  const double denom = gvv * gww - gvw * gvw;
  if (!(denom > 1e-12 * gvv * gww)) throw DegenerateFlagError("flagpole and transverse edge are dependent");
  Matrix R = jacobi_endomorphism(metric, x, V);
  return W.dot(g * (R * W)) / denom;
}

double ricci(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V) {
  check_direction(metric, x, V);
  const double f = metric.F(x, V);
  return jacobi_endomorphism(metric, x, V).trace() / (f * f);
}

std::vector<Vector> transverse_frame(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V,
                                     const Matrix& seed) {
  const int n = metric.dimension();
  Matrix g = fundamental_tensor(metric, x, V).matrix;
  std::vector<Vector> basis{V / std::sqrt(V.dot(g * V))};
  for (int c = 0; c < seed.cols() && static_cast<int>(basis.size()) < n; ++c) {
    Vector w = seed.col(c);
    for (const Vector& b : basis) w -= b.dot(g * w) * b;
    for (const Vector& b : basis) w -= b.dot(g * w) * b;  // second pass for stability
    double len = std::sqrt(std::max(0.0, w.dot(g * w)));
    if (len < 1e-8 * std::sqrt(seed.col(c).dot(g * seed.col(c)))) continue;
    basis.push_back(w / len);
  }
  if (static_cast<int>(basis.size()) < n) throw DegenerateFlagError("seed vectors do not span a complement");
  basis.erase(basis.begin());
  return basis;
}

double ricci_from_frame(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V, const Matrix& seed) {
  double acc = 0.0;
  for (const Vector& e : transverse_frame(metric, x, V, seed)) acc += flag_curvature(metric, x, V, e);
  return acc;
}

double distortion(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x, const Vector& y) {
  Matrix g = fundamental_tensor(metric, x, y).matrix;
  return 0.5 * std::log(g.determinant()) - std::log(sigma(x));
}

namespace {

/// tau at gamma(t) for the unit-speed geodesic with gamma'(0) = u; negative t
/// integrates the reverse metric from -u.
double tau_at(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x, const Vector& u,
              double t) {
  if (t == 0.0) return distortion(metric, sigma, x, u);
  FlowState s;
  s.x = x;
  if (t > 0.0) {
    s.v = u;
    FlowState e = GeodesicFlow(metric).advance(s, t);
    return distortion(metric, sigma, e.x, e.v);
  }
  FinslerMetricModel rev = metric.reversed();
  s.v = -u;
  FlowState e = GeodesicFlow(rev).advance(s, -t);
  return distortion(metric, sigma, e.x, Vector(-e.v));
}

}  // namespace

double s_curvature(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x, const Vector& y,
                   const SOptions& options) {
  check_direction(metric, x, y);
  const double f = metric.F(x, y);
  const Vector u = y / f;
  const double h = options.step;
  return f * (tau_at(metric, sigma, x, u, h) - tau_at(metric, sigma, x, u, -h)) / (2.0 * h);
}

double s_dot(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x, const Vector& y,
             const SOptions& options) {
  check_direction(metric, x, y);
  const Vector u = y / metric.F(x, y);
  const double h = options.dot_step;
  const double t0 = tau_at(metric, sigma, x, u, 0.0);
  const double p1 = tau_at(metric, sigma, x, u, h), m1 = tau_at(metric, sigma, x, u, -h);
  const double p2 = tau_at(metric, sigma, x, u, 2 * h), m2 = tau_at(metric, sigma, x, u, -2 * h);
  return (-p2 + 16 * p1 - 30 * t0 + 16 * m1 - m2) / (12 * h * h);
}

double weighted_ricci(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x,
                      const Vector& V, double N, double s_zero_tol) {
  const int n = metric.dimension();
  if (std::isnan(N) || N < n) throw ParameterError("weighted Ricci needs N >= n");
  const double f = metric.F(x, V);
  const double S = s_curvature(metric, sigma, x, V);
  const double base = ricci(metric, x, V) + s_dot(metric, sigma, x, V);
  if (N == n) return std::abs(S / f) <= s_zero_tol ? base : kMinusInfinity;
  if (std::isinf(N)) return base;
  return base - S * S / ((N - n) * f * f);
}

nlohmann::json CurvatureReport::to_json() const {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j;
  j["chart"] = flag_base.chart;
  j["x"] = vec(flag_base.coords);
  j["V"] = vec(flagpole);
  j["W"] = vec(transverse);
  j["K"] = K;
  j["Ric"] = Ric;
  j["S"] = S;
  j["S_dot"] = S_dot;
  if (std::isinf(Ric_N))
    j["Ric_N"] = "-inf";
  else
    j["Ric_N"] = Ric_N;
  if (std::isinf(N_param))
    j["N"] = "inf";
  else
    j["N"] = N_param;
  return j;
}

CurvatureReport curvature_report(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& x,
                                 const Vector& V, const Vector& W, double N) {
  CurvatureReport r;
  r.flag_base = x;
  r.flagpole = V;
  r.transverse = W;
  r.K = flag_curvature(metric, x, V, W);
  r.Ric = ricci(metric, x, V);
  r.S = s_curvature(metric, sigma, x, V);
  r.S_dot = s_dot(metric, sigma, x, V);
  r.Ric_N = weighted_ricci(metric, sigma, x, V, N);
  r.N_param = N;
  return r;
}

double flag_curvature_osculating(const FinslerMetricModel& metric, const ChartPoint& x_in, const Vector& V_in,
                                 const Vector& W_in, double back, double h) {
  check_direction(metric, x_in, V_in);
  const ChartAtlas& atlas = metric.atlas();
  const int n = metric.dimension();
  const TangentVector tv = atlas.normalize(TangentVector{x_in, V_in});
  const ChartPoint x = tv.base;
  const Vector V = tv.components;
  const Vector W = x.chart == x_in.chart ? W_in : Vector(atlas.transition_jacobian(x_in, x.chart) * W_in);
  const Vector u = V / metric.F(x, V);

  // Source point p = gamma(-back) and the forward unit velocity there.
  FinslerMetricModel rev = metric.reversed();
  FlowState s;
  s.x = x;
  s.v = -u;
  FlowState e = GeodesicFlow(rev).advance(s, back);
  LocalDistanceField field(metric, e.x, Vector(-back * e.v));

  auto gY = [&](const Vector& offset) {
    ChartPoint z{x.chart, x.coords + offset};
    return fundamental_tensor(metric, z, field.at(z).grad).matrix;
  };
  static constexpr std::array<int, 4> off{-2, -1, 1, 2};
  static constexpr std::array<double, 4> c1{1.0, -8.0, 8.0, -1.0};
  const Matrix g0 = gY(Vector::Zero(n));
  std::vector<Matrix> dg(n, Matrix::Zero(n, n));
  std::vector<Matrix> ddg(n * n, Matrix::Zero(n, n));
  for (int k = 0; k < n; ++k) {
    Matrix second = -30.0 * g0;
    for (int a = 0; a < 4; ++a) {
      Matrix ga = gY(off[a] * h * Vector::Unit(n, k));
      dg[k] += c1[a] * ga;
      second += (std::abs(off[a]) == 1 ? 16.0 : -1.0) * ga;
    }
    dg[k] /= 12.0 * h;
    ddg[k * n + k] = second / (12.0 * h * h);
    for (int l = k + 1; l < n; ++l) {
      Matrix mixed = Matrix::Zero(n, n);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          mixed += c1[a] * c1[b] * gY(off[a] * h * Vector::Unit(n, k) + off[b] * h * Vector::Unit(n, l));
      ddg[k * n + l] = ddg[l * n + k] = mixed / (144.0 * h * h);
    }
  }

  const Matrix ginv = g0.inverse();
  auto idx = [n](int i, int j, int k) { return (i * n + j) * n + k; };
  // First-kind symbols and their derivatives: L[m,k,l], dL[j][m,k,l].
  std::vector<double> L(n * n * n), Gam(n * n * n);
  std::vector<std::vector<double>> dL(n, std::vector<double>(n * n * n)), dGam(n, std::vector<double>(n * n * n));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        L[idx(m, k, l)] = 0.5 * (dg[k](m, l) + dg[l](m, k) - dg[m](k, l));
        for (int j = 0; j < n; ++j)
          dL[j][idx(m, k, l)] = 0.5 * (ddg[j * n + k](m, l) + ddg[j * n + l](m, k) - ddg[j * n + m](k, l));
      }
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int l = 0; l < n; ++l) {
        double v = 0.0;
        for (int m = 0; m < n; ++m) v += ginv(i, m) * L[idx(m, k, l)];
        Gam[idx(i, k, l)] = v;
      }
  for (int j = 0; j < n; ++j) {
    Matrix dginv = -ginv * dg[j] * ginv;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.0;
          for (int m = 0; m < n; ++m) v += dginv(i, m) * L[idx(m, k, l)] + ginv(i, m) * dL[j][idx(m, k, l)];
          dGam[j][idx(i, k, l)] = v;
        }
  }
  // R(d_k, d_l) d_j = R^i_{jkl} d_i with
  // R^i_{jkl} = d_k Gam^i_{lj} - d_l Gam^i_{kj} + Gam^i_{km} Gam^m_{lj} - Gam^i_{lm} Gam^m_{kj}.
  // K = g(R(W, V) V, W) / (|V|^2 |W|^2 - <V,W>^2).
  Vector RV = Vector::Zero(n);  // R(W, V) V
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double r = dGam[k][idx(i, l, j)] - dGam[l][idx(i, k, j)];
          for (int m = 0; m < n; ++m) r += Gam[idx(i, k, m)] * Gam[idx(m, l, j)] - Gam[idx(i, l, m)] * Gam[idx(m, k, j)];
          acc += r * V[j] * W[k] * V[l];
        }
    RV[i] = acc;
  }
  const double gvv = V.dot(g0 * V), gww = W.dot(g0 * W), gvw = V.dot(g0 * W);
  const double denom = gvv * gww - gvw * gvw;
  if (!(denom > 1e-12 * gvv * gww)) throw DegenerateFlagError("flagpole and transverse edge are dependent");
  return W.dot(g0 * RV) / denom;
}

}  // namespace finsler

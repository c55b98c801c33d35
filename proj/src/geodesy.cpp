#include "finsler/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "finsler/spray.hpp"

namespace finsler {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

// Layout: x(n) v(n) length dx_0(n) dv_0(n) dx_1(n) dv_1(n) ... E_0(n) E_1(n) ...
struct Layout {
  int n;
  int m;
  int p = 0;
  int size() const { return 2 * n + 1 + 2 * n * m + n * p; }
  int dx(int a) const { return 2 * n + 1 + 2 * n * a; }
  int dv(int a) const { return dx(a) + n; }
  int e(int b) const { return 2 * n + 1 + 2 * n * m + n * b; }
};

State pack(const FlowState& s, const Layout& L) {
  State out(L.size());
  for (int i = 0; i < L.n; ++i) {
    out[i] = s.x.coords[i];
    out[L.n + i] = s.v[i];
  }
  out[2 * L.n] = s.length;
  for (int a = 0; a < L.m; ++a)
    for (int i = 0; i < L.n; ++i) {
      out[L.dx(a) + i] = s.dx[a][i];
      out[L.dv(a) + i] = s.dv[a][i];
    }
  for (int b = 0; b < L.p; ++b)
    for (int i = 0; i < L.n; ++i) out[L.e(b) + i] = s.transported[b][i];
  return out;
}

void unpack(const State& st, const Layout& L, FlowState& s) {
  for (int i = 0; i < L.n; ++i) {
    s.x.coords[i] = st[i];
    s.v[i] = st[L.n + i];
  }
  s.length = st[2 * L.n];
  for (int a = 0; a < L.m; ++a)
    for (int i = 0; i < L.n; ++i) {
      s.dx[a][i] = st[L.dx(a) + i];
      s.dv[a][i] = st[L.dv(a) + i];
    }
  for (int b = 0; b < L.p; ++b)
    for (int i = 0; i < L.n; ++i) s.transported[b][i] = st[L.e(b) + i];
}

struct GeodesicSystem {
  const FinslerMetricModel& metric;
  Layout L;
  int chart;

  void operator()(const State& s, State& ds, double /*t*/) const {
    const int n = L.n;
    const double* x = s.data();
    const double* v = s.data() + n;
    double G[kMaxDim];
    if (L.m == 0 && L.p == 0) {
      spray_G(metric, chart, x, v, G);
    }
    const double zero[kMaxDim] = {};
    for (int b = 0; b < L.p; ++b) {
      // N(x, v) E is the y-derivative of G along E.
      double NE[kMaxDim];
      spray_dG(metric, chart, x, v, zero, s.data() + L.e(b), G, NE);
      for (int i = 0; i < n; ++i) ds[L.e(b) + i] = -NE[i];
    }
    for (int a = 0; a < L.m; ++a) {
      double dG[kMaxDim];
      spray_dG(metric, chart, x, v, s.data() + L.dx(a), s.data() + L.dv(a), G, dG);
      for (int i = 0; i < n; ++i) {
        ds[L.dx(a) + i] = s[L.dv(a) + i];
        ds[L.dv(a) + i] = -2.0 * dG[i];
      }
    }
    for (int i = 0; i < n; ++i) {
      ds[i] = v[i];
      ds[n + i] = -2.0 * G[i];
    }
    ds[2 * n] = metric.eval<double>(chart, std::span<const double>(x, n), std::span<const double>(v, n));
  }
};

}  // namespace

GeodesicFlow::GeodesicFlow(const FinslerMetricModel& metric, GeodesicOptions options)
    : metric_(metric), options_(options) {}

FlowState GeodesicFlow::to_chart(const FlowState& s, int chart) const {
  if (s.x.chart == chart) return s;
  const ChartAtlas& atlas = metric_.atlas();
  const int n = metric_.dimension();
  FlowState out = s;
  Matrix J = atlas.transition_jacobian(s.x, chart);
  out.x = atlas.to_chart(s.x, chart);
  out.v = J * s.v;
  // (dx, dv) -> (J dx, J dv + D^2 phi(dx, v)).
  using H = HyperDual<double>;
  for (size_t a = 0; a < s.dx.size(); ++a) {
    Buf<H> in;
    Buf<H> res;
    for (int i = 0; i < n; ++i) in[i] = H(s.x.coords[i], s.dx[a][i], s.v[i], 0.0);
    atlas.transition<H>(s.x.chart, chart, std::span<const H>(in.data(), n), res.data());
    Vector jdv = J * s.dv[a];
    for (int i = 0; i < n; ++i) {
      out.dx[a][i] = res[i].b;
      out.dv[a][i] = jdv[i] + res[i].d;
    }
  }
  for (auto& e : out.transported) e = J * e;
  ++out.chart_switches;
  return out;
}

FlowState GeodesicFlow::advance(FlowState s, double t_end, const StepCallback& on_step) const {
  const int n = metric_.dimension();
  Layout L{n, static_cast<int>(s.dx.size()), static_cast<int>(s.transported.size())};
  auto stepper = odeint::make_controlled(options_.abs_tol, options_.rel_tol, odeint::runge_kutta_fehlberg78<State>());
  const double span = t_end - s.t;
  if (span < 0.0) throw DomainError("integration end precedes start");
  double dt = std::min(options_.initial_step, span);
  const double eps = 1e-14 * std::max(1.0, std::abs(t_end));
  State st = pack(s, L);
  int steps = 0;
  while (t_end - s.t > eps) {
    if (++steps > options_.max_steps) throw IntegrationError("geodesic step budget exhausted");
    dt = std::min(dt, t_end - s.t);
    GeodesicSystem sys{metric_, L, s.x.chart};
    double t = s.t;
    auto result = stepper.try_step(sys, st, t, dt);
    if (result == odeint::fail) {
      if (dt < options_.min_step) throw IntegrationError("geodesic step size underflow");
      continue;
    }
    FlowState next = s;
    next.t = t;
    unpack(st, L, next);
    if (!next.x.coords.allFinite() || !next.v.allFinite()) throw IntegrationError("non-finite geodesic state");
    if (on_step) on_step(s, next);
    if (metric_.atlas().kind() == ChartAtlas::Kind::sphere &&
        next.x.coords.norm() > metric_.atlas().switch_threshold()) {
      next = to_chart(next, 1 - next.x.chart);
      st = pack(next, L);
    }
    s = std::move(next);
  }
  return s;
}

GeodesicPath integrate_geodesic(const FinslerMetricModel& metric, const ChartPoint& x0, const Vector& y0, double T,
                                const GeodesicOptions& options) {
  metric.atlas().validate(x0);
  if (y0.isZero(0.0)) throw SingularityError("geodesic with zero initial velocity");
  if (!(T > 0.0)) throw DomainError("integration time must be positive");
  GeodesicFlow flow(metric, options);
  FlowState s;
  s.x = metric.atlas().normalize(TangentVector{x0, y0}).base;
  s.v = metric.atlas().normalize(TangentVector{x0, y0}).components;
  s.chart_switches = s.x.chart == x0.chart ? 0 : 1;
  GeodesicPath path;
  auto record = [&](const FlowState& st) {
    path.times.push_back(st.t);
    path.points.push_back(st.x);
    path.velocities.push_back(st.v);
  };
  record(s);
  FlowState last = s;
  try {
    last = flow.advance(s, T, [&](const FlowState&, const FlowState& after) {
      if (options.record) record(after);
      last = after;
    });
  } catch (const IntegrationError& e) {
    path.termination = Termination::step_failure;
    path.message = e.what();
  }
  if (path.termination == Termination::completed) {
    // The recorded endpoint is pre-switch; store the final state as returned.
    if (!options.record) record(last);
    path.points.back() = last.x;
    path.velocities.back() = last.v;
  }
  path.f_length = last.length;
  path.chart_switches = last.chart_switches;
  return path;
}

void write_path_csv(const FinslerMetricModel& metric, const GeodesicPath& path, std::ostream& out) {
  const int n = metric.dimension();
  out << "t,chart";
  for (int i = 0; i < n; ++i) out << ",x" << i + 1;
  for (int i = 0; i < n; ++i) out << ",y" << i + 1;
  out << ",F\n";
  out.precision(17);
  for (size_t k = 0; k < path.times.size(); ++k) {
    out << path.times[k] << ',' << metric.atlas().chart_name(path.points[k].chart);
    for (int i = 0; i < n; ++i) out << ',' << path.points[k].coords[i];
    for (int i = 0; i < n; ++i) out << ',' << path.velocities[k][i];
    out << ',' << metric.F(path.points[k], path.velocities[k]) << '\n';
  }
}

ExpResult exp_map(const FinslerMetricModel& metric, const ChartPoint& p, const Vector& v, bool with_jacobian,
                  const GeodesicOptions& options) {
  const int n = metric.dimension();
  ExpResult out;
  if (v.isZero(0.0)) {
    out.point = p;
    out.velocity = v;
    out.jacobian = Matrix::Identity(n, n);
    return out;
  }
  GeodesicFlow flow(metric, options);
  FlowState s;
  s.x = p;
  s.v = v;
  if (with_jacobian) {
    for (int a = 0; a < n; ++a) {
      s.dx.push_back(Vector::Zero(n));
      s.dv.push_back(Vector::Unit(n, a));
    }
  }
  if (metric.atlas().kind() == ChartAtlas::Kind::sphere && p.coords.norm() > metric.atlas().switch_threshold()) {
    s = flow.to_chart(s, 1 - p.chart);
  }
  FlowState e = flow.advance(s, 1.0);
  out.point = e.x;
  out.velocity = e.v;
  out.length = e.length;
  if (with_jacobian) {
    out.jacobian = Matrix(n, n);
    for (int a = 0; a < n; ++a) out.jacobian.col(a) = e.dx[a];
  }
  return out;
}

std::vector<Vector> sphere_directions(int n, int count) {
  std::vector<Vector> out;
  if (n == 1) {
    out.push_back(Vector::Constant(1, 1.0));
    out.push_back(Vector::Constant(1, -1.0));
    return out;
  }
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      double t = 2.0 * std::numbers::pi * (i + 0.5) / count;
      out.push_back((Vector(2) << std::cos(t), std::sin(t)).finished());
    }
    return out;
  }
  if (n == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / count;
      double rho = std::sqrt(1.0 - z * z);
      out.push_back((Vector(3) << rho * std::cos(golden * i), rho * std::sin(golden * i), z).finished());
    }
    return out;
  }
  std::mt19937_64 rng(977);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < count; ++i) {
    Vector v(n);
    for (int k = 0; k < n; ++k) v[k] = g(rng);
    out.push_back(v / v.norm());
  }
  return out;
}

namespace {

/// Endpoint of exp_p(v) in `chart`, with Jacobian when requested.
ExpResult exp_in_chart(const FinslerMetricModel& metric, const ChartPoint& p, const Vector& v, int chart,
                       bool with_jacobian) {
  ExpResult e = exp_map(metric, p, v, with_jacobian);
  if (e.point.chart != chart) {
    Matrix J = metric.atlas().transition_jacobian(e.point, chart);
    e.velocity = J * e.velocity;
    if (with_jacobian) e.jacobian = J * e.jacobian;
    e.point = metric.atlas().to_chart(e.point, chart);
  }
  return e;
}

double gap_of(const FinslerMetricModel& metric, const ChartPoint& p, const ChartPoint& q, const Vector& v) {
  ExpResult e = exp_in_chart(metric, p, v, q.chart, false);
  double g = (e.point.coords - q.coords).norm();
  return std::isfinite(g) ? g : 1e300;
}

/// Nelder-Mead on the arrival gap, used when Newton stalls.
double nelder_mead(const std::function<double(const Vector&)>& f, Vector& x, double scale, double tol, int max_evals) {
  const int n = static_cast<int>(x.size());
  std::vector<Vector> simplex{x};
  std::vector<double> vals{f(x)};
  for (int i = 0; i < n; ++i) {
    Vector y = x;
    y[i] += scale;
    simplex.push_back(y);
    vals.push_back(f(y));
  }
  int evals = n + 1;
  while (evals < max_evals) {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = idx[0], worst = idx[n], second = idx[n - 1];
    if (vals[best] <= tol) break;
    Vector centroid = Vector::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[idx[i]];
    centroid /= n;
    Vector xr = centroid + (centroid - simplex[worst]);
    double fr = f(xr);
    ++evals;
    if (fr < vals[best]) {
      Vector xe = centroid + 2.0 * (centroid - simplex[worst]);
      double fe = f(xe);
      ++evals;
      if (fe < fr) {
        simplex[worst] = xe;
        vals[worst] = fe;
      } else {
        simplex[worst] = xr;
        vals[worst] = fr;
      }
    } else if (fr < vals[second]) {
      simplex[worst] = xr;
      vals[worst] = fr;
    } else {
      Vector xc = centroid + 0.5 * (simplex[worst] - centroid);
      double fc = f(xc);
      ++evals;
      if (fc < vals[worst]) {
        simplex[worst] = xc;
        vals[worst] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          simplex[idx[i]] = simplex[best] + 0.5 * (simplex[idx[i]] - simplex[best]);
          vals[idx[i]] = f(simplex[idx[i]]);
          ++evals;
        }
      }
    }
  }
  int best = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  x = simplex[best];
  return vals[best];
}

}  // namespace

double shoot_to(const FinslerMetricModel& metric, const ChartPoint& p, const ChartPoint& q_in, Vector& v,
                const ShootingOptions& options) {
  // Levenberg-Marquardt on exp_p(v) - q. The Jacobian comes from the
  // variational equations and is carried forward by Broyden updates; it is
  // recomputed only when an update fails to make progress.
  const int n = metric.dimension();
  const ChartPoint q = metric.atlas().normalize(q_in);
  ExpResult e = exp_in_chart(metric, p, v, q.chart, true);
  Matrix J = e.jacobian;
  Vector r = e.point.coords - q.coords;
  double rn = r.norm();
  double mu = 0.0;
  bool fresh = true;
  int rejects = 0;
  for (int it = 0; it < 4 * options.newton_iterations && rn > options.newton_tol; ++it) {
    Matrix JtJ = J.transpose() * J;
    Vector step = (JtJ + mu * Matrix::Identity(n, n)).ldlt().solve(-J.transpose() * r);
    const double cap = 0.5 * std::max(1.0, v.norm());
    if (step.allFinite() && step.norm() > cap) step *= cap / step.norm();
    bool improved = false;
    Vector trial = v + step;
    Vector rt;
    if (step.allFinite() && !trial.isZero(0.0)) {
      try {
        rt = exp_in_chart(metric, p, trial, q.chart, false).point.coords - q.coords;
        improved = rt.allFinite() && rt.norm() < rn;
      } catch (const Error&) {
      }
    }
    if (improved) {
      Vector dr = rt - r;
      J += (dr - J * step) * step.transpose() / step.squaredNorm();
      v = trial;
      r = rt;
      rn = rt.norm();
      mu = mu * 0.1 < 1e-14 ? 0.0 : mu * 0.1;
      fresh = false;
      rejects = 0;
      continue;
    }
    if (!fresh) {
      J = exp_in_chart(metric, p, v, q.chart, true).jacobian;
      fresh = true;
      continue;
    }
    mu = std::max(mu * 10.0, 1e-10 * (1.0 + JtJ.norm()));
    if (++rejects > 12) break;
  }
  return rn;
}

DistanceResult forward_distance(const FinslerMetricModel& metric, const ChartPoint& p_in, const ChartPoint& q_in,
                                const ShootingOptions& options) {
  const ChartAtlas& atlas = metric.atlas();
  atlas.validate(p_in);
  atlas.validate(q_in);
  const int n = metric.dimension();
  const ChartPoint p = atlas.normalize(p_in);
  const ChartPoint q = atlas.normalize(q_in);
  DistanceResult res;
  res.from = p_in;
  res.to = q_in;
  res.multistart_count = options.multistart;
  const AmbientVector Xq = atlas.embed(q);
  if ((atlas.embed(p) - Xq).norm() < 1e-14) {
    res.distance = 0.0;
    res.initial_direction = Vector::Zero(n);
    res.arrival_velocity = Vector::Zero(n);
    return res;
  }
  const double horizon =
      options.horizon > 0.0 ? options.horizon : 1.5 * std::numbers::pi / std::sqrt(metric.curvature_scale());

  struct Candidate {
    double gap;
    Vector v;
  };
  std::vector<Candidate> candidates;
  GeodesicOptions screen;
  screen.abs_tol = 1e-9;
  screen.rel_tol = 1e-9;
  screen.initial_step = 0.05;
  GeodesicFlow flow(metric, screen);
  for (const Vector& d : sphere_directions(n, options.multistart)) {
    Vector unit = d / metric.F(p, d);
    double best_gap = 1e300;
    double best_t = 0.0;
    auto watch = [&](const FlowState& a, const FlowState& b) {
      const double h = b.t - a.t;
      for (int k = 1; k <= 16; ++k) {
        const double s = k / 16.0;
        const double h00 = 2 * s * s * s - 3 * s * s + 1, h10 = s * s * s - 2 * s * s + s;
        const double h01 = -2 * s * s * s + 3 * s * s, h11 = s * s * s - s * s;
        ChartPoint z{a.x.chart, h00 * a.x.coords + h10 * h * a.v + h01 * b.x.coords + h11 * h * b.v};
        double g = (atlas.embed(z) - Xq).norm();
        if (g < best_gap) {
          best_gap = g;
          best_t = a.t + s * h;
        }
      }
    };
    FlowState s;
    s.x = p;
    s.v = unit;
    try {
      flow.advance(s, horizon, watch);
    } catch (const IntegrationError&) {
    }
    if (best_t > 0.0) candidates.push_back({best_gap, best_t * unit});
  }
  if (candidates.empty()) throw UnreachableError("no shooting start produced a usable geodesic");
  // Keep the closest approaches, then refine in order of arrival time so
  // that later (longer) candidates can be skipped once a short one converges.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) { return a.gap < b.gap; });
  const double gap_cut = std::max(0.35, 3.0 * candidates.front().gap);
  std::vector<Candidate> pool;
  for (size_t c = 0; c < candidates.size() && static_cast<int>(pool.size()) < options.refine_candidates; ++c)
    if (c < 2 || candidates[c].gap <= gap_cut) pool.push_back(candidates[c]);
  std::sort(pool.begin(), pool.end(), [&](const Candidate& a, const Candidate& b) {
    return metric.F(p, a.v) < metric.F(p, b.v);
  });

  double best_len = 1e300;
  Vector best_v;
  double best_gap = 1e300;
  auto consider = [&](Vector v, double gap) {
    if (gap > options.shoot_tol) return;
    double len = metric.F(p, v);
    if (len < best_len) {
      best_len = len;
      best_v = v;
      best_gap = gap;
    }
  };
  for (const Candidate& c : pool) {
    if (metric.F(p, c.v) > best_len + c.gap + 0.05) continue;
    Vector v = c.v;
    consider(v, shoot_to(metric, p, q, v, options));
  }
  if (best_v.size() == 0) {
    // Derivative-free fallback from the closest approach.
    Vector w = candidates.front().v;
    double gap = nelder_mead([&](const Vector& u) { return gap_of(metric, p, q, u); }, w,
                             0.05 * std::max(0.1, w.norm()), options.shoot_tol * 1e-3, 600);
    Vector v = w;
    double g2 = shoot_to(metric, p, q, v, options);
    if (g2 < gap) w = v;
    consider(w, std::min(gap, g2));
  }
  if (best_v.size() == 0) throw UnreachableError("no shooting start reached the target");
  ExpResult e = exp_in_chart(metric, p, best_v, q.chart, false);
  res.distance = best_len;
  res.initial_direction = best_v;
  res.arrival_gap = best_gap;
  Matrix J = atlas.transition_jacobian(q, q_in.chart);
  res.arrival_velocity = J * e.velocity;
  if (p.chart != p_in.chart) res.initial_direction = atlas.transition_jacobian(p, p_in.chart) * best_v;
  return res;
}

LocalDistanceField::LocalDistanceField(const FinslerMetricModel& metric, const ChartPoint& p, const Vector& v_ref)
    : metric_(metric), p_(p), v_ref_(v_ref), ref_(exp_map(metric, p, v_ref, true)) {}

LocalDistanceField::Sample LocalDistanceField::at(const ChartPoint& z_in) const {
  const ChartAtlas& atlas = metric_.atlas();
  const int chart = ref_.point.chart;
  const ChartPoint z = atlas.to_chart(z_in, chart);
  auto lu = ref_.jacobian.partialPivLu();
  Vector v = v_ref_ + lu.solve(Vector(z.coords - ref_.point.coords));
  const double tol = 1e-13 * std::max(1.0, z.coords.norm());
  ExpResult e;
  bool converged = false;
  for (int it = 0; it < 12; ++it) {
    e = exp_in_chart(metric_, p_, v, chart, false);
    Vector r = e.point.coords - z.coords;
    if (r.norm() <= tol) {
      converged = true;
      break;
    }
    v -= lu.solve(r);
  }
  if (!converged) {
    ShootingOptions opt;
    opt.newton_tol = tol;
    double gap = shoot_to(metric_, p_, z, v, opt);
    if (gap > 1e-10) throw ConvergenceError("local distance field did not converge", gap);
    e = exp_in_chart(metric_, p_, v, chart, false);
  }
  Sample s;
  s.v = v;
  s.r = metric_.F(p_, v);
  Vector grad = e.velocity / s.r;
  if (z_in.chart != chart) grad = atlas.transition_jacobian(z, z_in.chart) * grad;
  s.grad = grad;
  return s;
}

DiameterResult diameter_estimate(const FinslerMetricModel& metric, int sample_pairs, unsigned seed,
                                 const std::vector<std::pair<ChartPoint, ChartPoint>>& candidates,
                                 const ShootingOptions& options) {
  if (!metric.traits().compact) throw DomainError("diameter needs a compact model");
  const ChartAtlas& atlas = metric.atlas();
  const int n = metric.dimension();
  std::vector<std::pair<ChartPoint, ChartPoint>> pairs = candidates;
  ChartPoint south{0, Vector::Zero(n)};
  ChartPoint north{1, Vector::Zero(n)};
  pairs.emplace_back(south, north);
  pairs.emplace_back(north, south);
  Vector xi = Vector::Unit(n, 0);
  xi /= metric.F(south, xi);
  ExpResult far = exp_map(metric, south, xi * (std::numbers::pi / std::sqrt(metric.curvature_scale())), false);
  pairs.emplace_back(south, far.point);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < sample_pairs; ++i) {
    ChartPoint a = atlas.sample(rng);
    ChartPoint b = atlas.sample(rng);
    pairs.emplace_back(a, b);
  }
  DiameterResult out;
  out.diameter = -1.0;
  for (const auto& [a, b] : pairs) {
    DistanceResult d = forward_distance(metric, a, b, options);
    ++out.pairs;
    if (d.distance > out.diameter) {
      out.diameter = d.distance;
      out.p = a;
      out.q = b;
    }
  }
  return out;
}

double segment_identity_check(const FinslerMetricModel& metric, const ChartPoint& p, const ChartPoint& q,
                              const std::vector<ChartPoint>& xs, double expected, const ShootingOptions& options) {
  double worst = 0.0;
  for (const ChartPoint& x : xs) {
    double a = forward_distance(metric, p, x, options).distance;
    double b = forward_distance(metric, x, q, options).distance;
    worst = std::max(worst, std::abs(a + b - expected));
  }
  return worst;
}

}  // namespace finsler

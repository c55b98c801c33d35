#include "finsler/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "finsler/curvature.hpp"

namespace finsler {

namespace {

constexpr double kPi = std::numbers::pi;

Vector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

std::vector<ChartPoint> sample_points(const ChartAtlas& atlas, int count, std::mt19937_64& rng) {
  std::vector<ChartPoint> out;
  for (int i = 0; i < count; ++i) out.push_back(atlas.sample(rng));
  return out;
}

double sphere_volume(int n, double rho) {
  return 2.0 * std::pow(kPi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1)) * std::pow(rho, n);
}

double model_laplacian(int n, double k, double r) { return (n - 1) * std::sqrt(k) / std::tan(std::sqrt(k) * r); }

// Radii evenly spaced on [0.3, pi - 0.3] / sqrt(k) (or [0.3, 1.5] / sqrt(k) off model spheres).
std::vector<double> radial_range(const ModelContext& m, int count) {
  const double s = std::sqrt(m.k);
  const double lo = 0.3 / s;
  const double hi = (m.model_sphere() ? kPi - 0.3 : 1.5) / s;
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  return out;
}

// 5-point derivative of f at t with step d.
template <class Fn>
double derivative(const Fn& f, double t, double d) {
  return (f(t - 2 * d) - 8 * f(t - d) + 8 * f(t + d) - f(t + 2 * d)) / (12 * d);
}

bool invariant_under_wind(const ModelContext& m, const ScalarField& f) {
  if (m.bundle.metric->traits().riemannian) return true;
  if (!m.bundle.nav) return false;
  std::mt19937_64 rng(7);
  for (const ChartPoint& x : sample_points(m.metric().atlas(), 16, rng))
    if (std::abs(f.differential(x).dot(m.bundle.nav->W->at(x))) > 1e-12) return false;
  return true;
}

}  // namespace

// ---- check records -------------------------------------------------------------

std::string to_string(Comparison c) {
  switch (c) {
    case Comparison::abs_diff: return "abs_diff";
    case Comparison::rel_diff: return "rel_diff";
    case Comparison::at_most: return "at_most";
    case Comparison::at_least: return "at_least";
  }
  return "?";
}

nlohmann::json CheckRecord::to_json() const {
  nlohmann::json j;
  j["check_id"] = check_id;
  j["anchor"] = anchor;
  j["measured"] = measured;
  j["expected"] = expected;
  j["tolerance"] = tolerance;
  j["comparison"] = to_string(comparison);
  j["pass"] = pass;
  if (!detail.empty()) j["detail"] = detail;
  return j;
}

CheckRecord make_check(std::string id, std::string anchor, double measured, double expected, double tolerance,
                       Comparison comparison, nlohmann::json detail) {
  CheckRecord r{std::move(id), std::move(anchor), measured, expected, tolerance, comparison, false, std::move(detail)};
  switch (comparison) {
    case Comparison::abs_diff: r.pass = std::abs(measured - expected) <= tolerance; break;
    case Comparison::rel_diff: r.pass = std::abs(measured - expected) <= tolerance * std::abs(expected); break;
    case Comparison::at_most: r.pass = measured <= expected + tolerance; break;
    case Comparison::at_least: r.pass = measured >= expected - tolerance; break;
  }
  return r;
}

// ---- model context ---------------------------------------------------------------

ModelContext::ModelContext(ModelBundle b)
    : bundle(std::move(b)),
      reverse(std::make_shared<const FinslerMetricModel>(reverse_metric(*bundle.metric))),
      sigma(VolumeDensity::busemann_hausdorff(*bundle.metric)),
      n(bundle.metric->dimension()),
      k(bundle.metric->traits().flag_curvature.value_or(bundle.metric->curvature_scale())) {}

bool ModelContext::model_sphere() const {
  const ModelTraits& t = bundle.metric->traits();
  return t.compact && t.zero_s_curvature && t.flag_curvature && *t.flag_curvature > 0.0 &&
         bundle.metric->atlas().kind() == ChartAtlas::Kind::sphere;
}

CheckSettings CheckSettings::defaults() {
  CheckSettings s;
  s.samples = {{"flags", 50},           {"vectors", 50},          {"oracle_samples", 20}, {"oracle_flags", 10},
               {"diameter_pairs", 10},  {"segment_points", 20},   {"radii", 20},          {"random_functions", 20},
               {"duality_samples", 30}, {"structure_points", 30}, {"hessian_configs", 20}};
  s.tolerances = {{"flag_curvature", 1e-4}, {"s_curvature", 1e-4},   {"s_homogeneity", 1e-6}, {"tensor", 1e-6},
                  {"legendre", 1e-10},      {"chern", 1e-4},         {"diameter", 1e-2},      {"segment", 2e-2},
                  {"volume", 5e-3},         {"laplacian", 1e-3},     {"riccati", 1e-3},       {"eigen_residual", 1e-2},
                  {"eigen_mean", 1e-4},     {"rayleigh", 1e-3},      {"rayleigh_bound", 1e-3}, {"bg_slack", 2e-2},
                  {"small_ball", 2e-2},     {"duality", 1e-5},       {"structure", 1e-6},     {"hessian", 1e-3}};
  return s;
}

int CheckSettings::count(const std::string& key) const {
  auto it = samples.find(key);
  if (it == samples.end()) throw ConfigError("unknown sample count '" + key + "'");
  return it->second;
}

double CheckSettings::tol(const std::string& key) const {
  auto it = tolerances.find(key);
  if (it == tolerances.end()) throw ConfigError("unknown tolerance '" + key + "'");
  return it->second;
}

std::pair<ChartPoint, Vector> radial_source(const ModelContext& m, unsigned seed) {
  std::mt19937_64 rng(seed * 7919u + 17u);
  ChartPoint p = m.metric().atlas().sample(rng);
  return {p, random_vector(rng, m.n)};
}

// ---- checks ------------------------------------------------------------------------

std::vector<CheckRecord> check_flag_curvature(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  const auto K0 = m.metric().traits().flag_curvature;
  if (!K0) return {};
  std::mt19937_64 rng(seed);
  const int count = s.count("flags");
  double worst_K = *K0;
  double worst_ric = (m.n - 1) * *K0;
  for (int i = 0; i < count; ++i) {
    ChartPoint x = m.metric().atlas().sample(rng);
    Vector V = random_vector(rng, m.n);
    Vector W = random_vector(rng, m.n);
    double K = flag_curvature(m.metric(), x, V, W);
    if (std::abs(K - *K0) > std::abs(worst_K - *K0)) worst_K = K;
    double ric = ricci(m.metric(), x, V);
    if (std::abs(ric - (m.n - 1) * *K0) > std::abs(worst_ric - (m.n - 1) * *K0)) worst_ric = ric;
  }
  const double tol = s.tol("flag_curvature");
  return {make_check("flag_curvature", "flag-curvature-constant", worst_K, *K0, tol, Comparison::abs_diff,
                     {{"flags", count}}),
          make_check("ricci", "ricci-constant", worst_ric, (m.n - 1) * *K0, (m.n - 1) * tol, Comparison::abs_diff,
                     {{"flags", count}})};
}

std::vector<CheckRecord> check_s_curvature(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  std::mt19937_64 rng(seed + 1);
  const int count = s.count("vectors");
  std::vector<CheckRecord> out;
  if (m.metric().traits().zero_s_curvature) {
    double worst = 0.0;
    double worst_dot = 0.0;
    for (int i = 0; i < count; ++i) {
      ChartPoint x = m.metric().atlas().sample(rng);
      Vector y = random_vector(rng, m.n);
      y /= m.metric().F(x, y);
      double S = s_curvature(m.metric(), m.sigma, x, y);
      if (std::abs(S) > std::abs(worst)) worst = S;
      if (i < 5) worst_dot = std::max(worst_dot, std::abs(s_dot(m.metric(), m.sigma, x, y)));
    }
    out.push_back(make_check("s_curvature", "s-curvature-vanishes", worst, 0.0, s.tol("s_curvature"),
                             Comparison::abs_diff, {{"vectors", count}, {"max_abs_s_dot", worst_dot}}));
    if (auto K0 = m.metric().traits().flag_curvature) {
      ChartPoint x = m.metric().atlas().sample(rng);
      Vector y = random_vector(rng, m.n);
      y /= m.metric().F(x, y);
      double ricn = weighted_ricci(m.metric(), m.sigma, x, y, m.n);
      out.push_back(make_check("weighted_ricci_n", "weighted-ricci-n", ricn, (m.n - 1) * *K0,
                               (m.n - 1) * s.tol("flag_curvature"), Comparison::abs_diff));
    }
  } else {
    double worst = 0.0;
    double largest = 0.0;
    for (int i = 0; i < std::min(count, 10); ++i) {
      ChartPoint x = m.metric().atlas().sample(rng);
      Vector y = random_vector(rng, m.n);
      double S1 = s_curvature(m.metric(), m.sigma, x, y);
      double S2 = s_curvature(m.metric(), m.sigma, x, Vector(2.0 * y));
      worst = std::max(worst, std::abs(S2 - 2.0 * S1));
      largest = std::max(largest, std::abs(S1 / m.metric().F(x, y)));
    }
    out.push_back(make_check("s_homogeneity", "plumbing", worst, 0.0, s.tol("s_homogeneity"),
                             Comparison::at_most, {{"max_abs_s_over_F", largest}}));
  }
  return out;
}

std::vector<CheckRecord> check_oracles(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  std::mt19937_64 rng(seed + 2);
  const FinslerMetricModel& F = m.metric();
  double tensor = 0.0;
  double roundtrip = 0.0;
  for (int i = 0; i < s.count("oracle_samples"); ++i) {
    ChartPoint x = F.atlas().sample(rng);
    Vector y = random_vector(rng, m.n);
    Matrix g = fundamental_tensor(F, x, y).matrix;
    tensor = std::max(tensor, (g - fundamental_tensor_fd(F, x, y)).cwiseAbs().maxCoeff() / std::max(1.0, g.norm()));
    Covector xi = legendre(F, x, y);
    roundtrip = std::max(roundtrip, (legendre_inverse(F, xi).components - y).norm() / y.norm());
  }
  double chern = 0.0;
  for (int i = 0; i < s.count("oracle_flags"); ++i) {
    ChartPoint x = F.atlas().sample(rng);
    Vector V = random_vector(rng, m.n);
    Vector W = random_vector(rng, m.n);
    chern = std::max(chern, std::abs(flag_curvature(F, x, V, W) - flag_curvature_osculating(F, x, V, W)));
  }
  return {make_check("tensor_ad_vs_fd", "plumbing", tensor, 0.0, s.tol("tensor"), Comparison::at_most),
          make_check("legendre_roundtrip", "plumbing", roundtrip, 0.0, s.tol("legendre"),
                     Comparison::at_most),
          make_check("flag_curvature_chern", "plumbing", chern, 0.0, s.tol("chern"), Comparison::at_most,
                     {{"flags", s.count("oracle_flags")}})};
}

std::vector<CheckRecord> check_diameter(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  if (!m.model_sphere()) return {};
  const double expected = kPi / std::sqrt(m.k);
  DiameterResult d = diameter_estimate(m.metric(), s.count("diameter_pairs"), seed + 3);
  std::mt19937_64 rng(seed + 4);
  std::vector<ChartPoint> xs = sample_points(m.metric().atlas(), s.count("segment_points"), rng);
  double seg = segment_identity_check(m.metric(), d.p, d.q, xs, expected);
  return {make_check("diameter", "maximal-diameter", d.diameter, expected, s.tol("diameter"), Comparison::rel_diff,
                     {{"pairs", d.pairs}}),
          make_check("segment_identity", "segment-identity", seg, 0.0, s.tol("segment"), Comparison::at_most,
                     {{"points", xs.size()}})};
}

std::vector<CheckRecord> check_total_volume(const ModelContext& m, const CheckSettings& s) {
  if (!m.bundle.reference || m.metric().atlas().kind() != ChartAtlas::Kind::sphere) return {};
  double vol = chart_quadrature(m.metric().atlas(), m.sigma).volume();
  double expected = sphere_volume(m.n, 1.0 / std::sqrt(m.bundle.reference->curvature_scale()));
  return {make_check("total_volume", "total-volume", vol, expected, s.tol("volume"), Comparison::rel_diff)};
}

std::vector<std::array<double, 3>> laplacian_profile(const ModelContext& m, const std::vector<double>& radii,
                                                     unsigned seed) {
  auto [p, xi] = radial_source(m, seed);
  RadialField r(m.bundle.metric, p);
  std::vector<std::array<double, 3>> rows;
  for (double t : radii) {
    ChartPoint x = r.point_at(xi, t);
    rows.push_back({t, laplacian(m.metric(), m.sigma, r, x), model_laplacian(m.n, m.k, t)});
  }
  return rows;
}

std::vector<CheckRecord> check_laplacian(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  std::vector<CheckRecord> out;
  if (m.metric().atlas().kind() == ChartAtlas::Kind::sphere) {
    std::mt19937_64 rng(seed + 5);
    auto u = std::make_shared<AmbientPolynomial>(AmbientPolynomial::random(m.metric().atlas_ptr(), rng));
    NegatedField neg(u);
    VolumeDensity srev = VolumeDensity::busemann_hausdorff(*m.reverse);
    double worst = 0.0;
    for (const ChartPoint& x : sample_points(m.metric().atlas(), 5, rng))
      worst = std::max(worst, std::abs(laplacian(m.metric(), m.sigma, neg, x) + laplacian(*m.reverse, srev, *u, x)));
    out.push_back(make_check("laplacian_reverse_duality", "reverse-laplacian-duality", worst, 0.0, s.tol("duality"),
                             Comparison::at_most));
  }
  if (!m.model_sphere()) return out;
  auto [p, xi] = radial_source(m, seed);
  RadialField r(m.bundle.metric, p);
  const double step = 1e-2 / std::sqrt(m.k);
  double lap_worst = 0.0;
  double ric_worst = 0.0;
  for (double t : radial_range(m, s.count("radii"))) {
    auto lap_at = [&](double tt) { return laplacian(m.metric(), m.sigma, r, r.point_at(xi, tt)); };
    double L = lap_at(t);
    lap_worst = std::max(lap_worst, std::abs(L - model_laplacian(m.n, m.k, t)));
    double dL = derivative(lap_at, t, step);
    ric_worst = std::max(ric_worst, std::abs(dL + L * L / (m.n - 1) + (m.n - 1) * m.k));
  }
  out.push_back(make_check("laplacian_equality", "laplacian-equality", lap_worst, 0.0, s.tol("laplacian"),
                           Comparison::at_most, {{"radii", s.count("radii")}}));
  out.push_back(make_check("riccati_equation", "riccati-equation", ric_worst, 0.0, s.tol("riccati"),
                           Comparison::at_most, {{"radii", s.count("radii")}}));
  return out;
}

std::vector<CheckRecord> check_eigen(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  if (!m.model_sphere()) return {};
  std::vector<CheckRecord> out;
  const double lambda = m.n * m.k;
  const double R = kPi / std::sqrt(m.k);
  auto [p, xi] = radial_source(m, seed);

  RadialField f(m.bundle.metric, p, RadialProfile::cosine(m.k));
  std::vector<ChartPoint> xs;
  for (double t : radial_range(m, s.count("radii"))) xs.push_back(f.point_at(xi, t));
  out.push_back(make_check("eigen_residual", "eigenfunction", eigen_residual(m.metric(), m.sigma, f, lambda, xs), 0.0,
                           s.tol("eigen_residual"), Comparison::at_most, {{"lambda", lambda}}));

  PolarQuadrature polar(m.metric(), m.sigma, p, {R});
  double vol = polar.ball_volume(0);
  double mean = polar.integrate(0, [&](const PolarQuadrature::Node& nd) { return -std::cos(std::sqrt(m.k) * nd.r); });
  out.push_back(make_check("eigen_mean", "eigenfunction-mean", std::abs(mean) / vol, 0.0, s.tol("eigen_mean"),
                           Comparison::at_most));
  RayleighResult rr = rayleigh_quotient_radial(m.metric(), polar, 0, RadialProfile::cosine(m.k));
  out.push_back(make_check("rayleigh_radial", "first-eigenvalue", rr.quotient, lambda, s.tol("rayleigh"),
                           Comparison::rel_diff, {{"mean_subtracted", rr.mean_subtracted}}));

  ManifoldQuadrature q = chart_quadrature(m.metric().atlas(), m.sigma);
  AmbientPolynomial coord = AmbientPolynomial::coordinate(m.metric().atlas_ptr(), m.n);
  if (invariant_under_wind(m, coord)) {
    RayleighResult rc = rayleigh_quotient(m.metric(), q, coord);
    out.push_back(make_check("rayleigh_invariant", "first-eigenvalue", rc.quotient, lambda, s.tol("rayleigh"),
                             Comparison::rel_diff, {{"function", "X_" + std::to_string(m.n + 1)}}));
  }
  std::mt19937_64 rng(seed + 6);
  double lowest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.count("random_functions"); ++i) {
    AmbientPolynomial g = AmbientPolynomial::random(m.metric().atlas_ptr(), rng);
    lowest = std::min(lowest, rayleigh_quotient(m.metric(), q, g).quotient);
  }
  out.push_back(make_check("rayleigh_lower_bound", "eigenvalue-lower-bound", lowest, lambda, s.tol("rayleigh_bound"),
                           Comparison::at_least, {{"functions", s.count("random_functions")}}));
  return out;
}

std::vector<CheckRecord> check_volume_comparison(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  if (m.metric().atlas().kind() != ChartAtlas::Kind::sphere) return {};
  std::vector<CheckRecord> out = check_total_volume(m, s);
  auto [p, xi] = radial_source(m, seed);
  (void)xi;
  out.push_back(make_check("small_ball", "small-ball-limit",
                           small_ball_ratio(m.metric(), m.sigma, p, 0.1 / std::sqrt(m.k)), 1.0, s.tol("small_ball"),
                           Comparison::abs_diff));
  if (!m.model_sphere()) return out;
  const double sk = std::sqrt(m.k);
  std::vector<double> radii;
  for (double t : {0.25, 0.5, 1.0, 1.5, 2.0, 2.5, kPi}) radii.push_back(t / sk);
  for (BallSide side : {BallSide::forward, BallSide::backward}) {
    const std::string tag = side == BallSide::forward ? "forward" : "backward";
    std::vector<double> ratios = bishop_gromov_ratio(m.metric(), m.sigma, p, radii, m.n, m.k, side);
    double rise = 0.0;
    double spread = 0.0;
    for (size_t i = 1; i < ratios.size(); ++i) rise = std::max(rise, ratios[i] / ratios[i - 1] - 1.0);
    for (double v : ratios) spread = std::max(spread, std::abs(v / ratios.front() - 1.0));
    out.push_back(make_check("bg_" + tag + "_monotone", "bishop-gromov", rise, 0.0, s.tol("bg_slack"),
                             Comparison::at_most, {{"ratios", ratios}, {"radii", radii}}));
    out.push_back(make_check("bg_" + tag + "_constant", "bishop-gromov", spread, 0.0, s.tol("bg_slack"),
                             Comparison::at_most));
  }
  return out;
}

std::vector<CheckRecord> check_dualities(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  std::mt19937_64 rng(seed + 8);
  const FinslerMetricModel& F = m.metric();
  const FinslerMetricModel& R = *m.reverse;
  const int count = s.count("duality_samples");
  const bool compact = F.atlas().kind() == ChartAtlas::Kind::sphere;
  std::vector<CheckRecord> out;

  if (compact) {
    double dist = 0.0;
    for (int i = 0; i < count; ++i) {
      ChartPoint p = F.atlas().sample(rng);
      ChartPoint q = F.atlas().sample(rng);
      dist = std::max(dist, std::abs(forward_distance(R, p, q).distance - forward_distance(F, q, p).distance));
    }
    out.push_back(make_check("distance_duality", "reverse-distance-duality", dist, 0.0, s.tol("duality"),
                             Comparison::at_most, {{"samples", count}}));
  }

  std::shared_ptr<ScalarField> u;
  if (compact)
    u = std::make_shared<AmbientPolynomial>(AmbientPolynomial::random(F.atlas_ptr(), rng));
  else
    u = std::make_shared<FunctionField>(
        [](const ChartPoint& x) { return std::sin(x.coords[0]) + x.coords.squaredNorm(); }, "sin-quadratic");
  NegatedField neg(u);
  VolumeDensity srev = VolumeDensity::busemann_hausdorff(R);
  double grad = 0.0;
  double lap = 0.0;
  double ricw = 0.0;
  for (int i = 0; i < count; ++i) {
    ChartPoint x = F.atlas().sample(rng);
    grad = std::max(grad, (gradient(R, *u, x) + gradient(F, neg, x)).norm());
    lap = std::max(lap, std::abs(laplacian(F, m.sigma, neg, x) + laplacian(R, srev, *u, x)));
    Vector y = random_vector(rng, m.n);
    for (double N : {std::numeric_limits<double>::infinity(), m.n + 1.0}) {
      double a = weighted_ricci(R, srev, x, y, N);
      double b = weighted_ricci(F, m.sigma, x, Vector(-y), N);
      ricw = std::max(ricw, std::abs(a - b));
    }
  }
  out.push_back(make_check("gradient_duality", "reverse-gradient-duality", grad, 0.0, s.tol("duality"),
                           Comparison::at_most, {{"samples", count}}));
  out.push_back(make_check("laplacian_duality", "reverse-laplacian-duality", lap, 0.0, s.tol("duality"),
                           Comparison::at_most, {{"samples", count}}));
  out.push_back(make_check("weighted_ricci_duality", "reverse-weighted-ricci-duality", ricw, 0.0, s.tol("duality"),
                           Comparison::at_most, {{"samples", count}, {"N", {"inf", m.n + 1}}}));
  return out;
}

std::vector<CheckRecord> check_structure(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  if (!m.bundle.bao_shen) return {};
  std::mt19937_64 rng(seed + 9);
  auto pts = sample_points(m.metric().atlas(), s.count("structure_points"), rng);
  return {make_check("structure_equations", "structure-equations", structure_equation_residual(*m.bundle.bao_shen, pts),
                     0.0, s.tol("structure"), Comparison::at_most, {{"points", pts.size()}})};
}

std::vector<CheckRecord> check_hessian(const ModelContext& m, const CheckSettings& s, unsigned seed) {
  if (m.metric().atlas().kind() != ChartAtlas::Kind::sphere) return {};
  const bool model = m.model_sphere();
  const double sk = std::sqrt(m.k);
  const double d = 1e-2 / sk;
  std::mt19937_64 rng(seed + 10);
  std::uniform_real_distribution<double> U(0.3 / sk, (model ? kPi - 0.3 : 1.5) / sk);
  double form = 0.0;
  double bochner = 0.0;
  double riccati = 0.0;
  double oracle = 0.0;
  const int count = s.count("hessian_configs");
  for (int i = 0; i < count; ++i) {
    ChartPoint p = m.metric().atlas().sample(rng);
    Vector xi = random_vector(rng, m.n);
    double t = U(rng);
    RadialFrame frame(m.metric(), p, xi);
    RadialField r(m.bundle.metric, p);
    auto hess = [&](double tt) {
      RadialFrame::Sample smp = frame.at(tt);
      r.point_at(xi, tt);
      return hessian_second_difference(r, smp.x, smp.frame);
    };
    RadialFrame::Sample smp = frame.at(t);
    ChartPoint x = r.point_at(xi, t);
    Matrix H = hessian_second_difference(r, x, smp.frame);
    if (model) {
      Matrix target = Matrix::Identity(m.n - 1, m.n - 1) * (sk / std::tan(sk * t));
      form = std::max(form, (H - target).cwiseAbs().maxCoeff());
    }
    if (i < 3) oracle = std::max(oracle, (H - hessian_connection(r, x, smp.frame)).cwiseAbs().maxCoeff());
    double lap = laplacian(m.metric(), m.sigma, r, x);
    double S = s_curvature(m.metric(), m.sigma, x, smp.velocity);
    bochner = std::max(bochner, std::abs(lap - (H.trace() - S)));
    double dtr = derivative([&](double tt) { return hess(tt).trace(); }, t, d);
    riccati = std::max(riccati, std::abs(dtr + ricci(m.metric(), x, smp.velocity) + H.squaredNorm()));
  }
  const double tol = s.tol("hessian");
  std::vector<CheckRecord> out;
  if (model)
    out.push_back(make_check("hessian_model_form", "hessian-model-form", form, 0.0, tol, Comparison::at_most,
                             {{"configs", count}}));
  out.push_back(make_check("bochner_trace", "bochner-trace", bochner, 0.0, tol, Comparison::at_most,
                           {{"configs", count}}));
  out.push_back(make_check("riccati_trace", "riccati-trace", riccati, 0.0, tol, Comparison::at_most,
                           {{"configs", count}}));
  out.push_back(make_check("hessian_oracle", "plumbing", oracle, 0.0, tol, Comparison::at_most));
  return out;
}

// ---- suites and reports ------------------------------------------------------------

namespace {

const std::vector<std::pair<Suite, std::string>>& suite_names() {
  static const std::vector<std::pair<Suite, std::string>> names = {
      {Suite::curvature, "curvature"},
      {Suite::s_curvature, "s_curvature"},
      {Suite::diameter, "diameter"},
      {Suite::laplacian_comparison, "laplacian_comparison"},
      {Suite::eigen, "eigen"},
      {Suite::volume_comparison, "volume_comparison"},
      {Suite::full, "full"}};
  return names;
}

const std::set<std::string> kReservedKeys = {"model", "suite", "seed", "samples", "tolerances", "report"};

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

std::string to_string(Suite s) {
  for (const auto& [k, v] : suite_names())
    if (k == s) return v;
  return "?";
}

Suite parse_suite(const std::string& name) {
  for (const auto& [k, v] : suite_names())
    if (v == name) return k;
  throw ConfigError("unknown suite '" + name + "'");
}

SuiteConfig SuiteConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be an object");
  SuiteConfig c;
  if (!j.contains("model")) throw ConfigError("config needs a 'model' entry");
  const nlohmann::json& model = j.at("model");
  if (model.is_object()) {
    for (const auto& [key, value] : j.items())
      if (!kReservedKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
    if (!model.contains("model") || !model["model"].is_string()) throw ConfigError("model needs a 'model' name");
    c.model = model;
  } else if (model.is_string()) {
    c.model = nlohmann::json::object();
    for (const auto& [key, value] : j.items())
      if (!kReservedKeys.count(key) || key == "model") c.model[key] = value;
  } else {
    throw ConfigError("'model' must be a name or an object");
  }
  if (j.contains("suite")) {
    if (!j["suite"].is_string()) throw ConfigError("'suite' must be a string");
    c.suite = parse_suite(j["suite"].get<std::string>());
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
      throw ConfigError("'seed' must be a non-negative integer");
    c.seed = j["seed"].get<unsigned>();
  }
  if (j.contains("samples")) {
    if (!j["samples"].is_object()) throw ConfigError("'samples' must be an object");
    for (const auto& [key, value] : j["samples"].items()) {
      if (!c.settings.samples.count(key)) throw ConfigError("unknown sample count '" + key + "'");
      if (!value.is_number_integer() || value.get<long long>() < 1)
        throw ConfigError("sample count '" + key + "' must be an integer >= 1");
      c.settings.samples[key] = value.get<int>();
    }
  }
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw ConfigError("'tolerances' must be an object");
    for (const auto& [key, value] : j["tolerances"].items()) {
      if (!c.settings.tolerances.count(key)) throw ConfigError("unknown tolerance '" + key + "'");
      if (!value.is_number() || !(value.get<double>() > 0.0))
        throw ConfigError("tolerance '" + key + "' must be positive");
      c.settings.tolerances[key] = value.get<double>();
    }
  }
  if (j.contains("report")) {
    if (!j["report"].is_string()) throw ConfigError("'report' must be a path string");
    c.report_path = j["report"].get<std::string>();
  }
  return c;
}

nlohmann::json SuiteConfig::to_json() const {
  nlohmann::json j;
  j["model"] = model;
  j["suite"] = to_string(suite);
  j["seed"] = seed;
  j["samples"] = settings.samples;
  j["tolerances"] = settings.tolerances;
  if (!report_path.empty()) j["report"] = report_path;
  return j;
}

nlohmann::json SuiteConfig::schema() {
  CheckSettings d = CheckSettings::defaults();
  nlohmann::json models = nlohmann::json::object();
  for (const ModelInfo& info : model_registry()) models[info.name] = {{"summary", info.summary}, {"parameters", info.schema}};
  nlohmann::json suites = nlohmann::json::array();
  for (const auto& [k, v] : suite_names()) suites.push_back(v);
  return {{"model", {{"type", "string or object"},
                     {"description", "model name with its parameters beside it, or an object {\"model\": name, ...}"},
                     {"models", models}}},
          {"suite", {{"type", "string"}, {"enum", suites}, {"default", "full"}}},
          {"seed", {{"type", "integer"}, {"minimum", 0}, {"default", 1}}},
          {"samples", {{"type", "object"}, {"description", "sample counts, integers >= 1"}, {"defaults", d.samples}}},
          {"tolerances", {{"type", "object"}, {"description", "positive reals"}, {"defaults", d.tolerances}}},
          {"report", {{"type", "string"}, {"description", "report path; default <FINSLER_REPORT_DIR or .>/<model>_<suite>_<seed>.jsonl"}}}};
}

int VerificationReport::passed() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; }));
}

int VerificationReport::failed() const { return static_cast<int>(records.size()) - passed(); }

void VerificationReport::write_jsonl(std::ostream& out) const {
  for (const CheckRecord& r : records) out << r.to_json().dump() << '\n';
  nlohmann::json summary;
  summary["summary"] = {{"model", config.model},
                        {"suite", to_string(config.suite)},
                        {"seed", config.seed},
                        {"total", records.size()},
                        {"passed", passed()},
                        {"failed", failed()}};
  summary["timestamp"] = {{"utc", utc}, {"elapsed_s", elapsed}};
  out << summary.dump() << '\n';
}

void VerificationReport::write_summary(std::ostream& out) const {
  out << "model " << config.model.dump() << "  suite " << to_string(config.suite) << "  seed " << config.seed << '\n';
  for (const CheckRecord& r : records) {
    out << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(28) << r.check_id << " measured "
        << std::setprecision(10) << r.measured << "  expected " << r.expected << "  tol " << std::setprecision(3)
        << r.tolerance << " (" << to_string(r.comparison) << ")\n";
  }
  out << passed() << " passed, " << failed() << " failed";
  if (records.empty()) out << " (no checks apply to this model and suite)";
  out << "  [" << std::fixed << std::setprecision(1) << elapsed << " s]" << std::defaultfloat << '\n';
}

VerificationReport run_suite(const SuiteConfig& config) {
  auto start = std::chrono::steady_clock::now();
  ModelContext m(make_model(config.model));
  const CheckSettings& s = config.settings;
  const unsigned seed = config.seed;
  VerificationReport report;
  report.config = config;
  // A numerical failure inside a check group becomes a failing record; config errors propagate.
  auto add = [&](const std::string& group, auto&& fn) {
    try {
      for (auto& r : fn()) report.records.push_back(std::move(r));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      report.records.push_back(make_check(group, "plumbing", std::nan(""), 0.0, 0.0, Comparison::abs_diff,
                                          {{"error", e.what()}}));
    }
  };
  const Suite suite = config.suite;
  const bool full = suite == Suite::full;
  if (full || suite == Suite::curvature) {
    add("flag_curvature", [&] { return check_flag_curvature(m, s, seed); });
    add("oracles", [&] { return check_oracles(m, s, seed); });
    add("structure_equations", [&] { return check_structure(m, s, seed); });
  }
  if (full || suite == Suite::s_curvature) add("s_curvature", [&] { return check_s_curvature(m, s, seed); });
  if (full || suite == Suite::diameter) add("diameter", [&] { return check_diameter(m, s, seed); });
  if (full || suite == Suite::laplacian_comparison) {
    add("laplacian", [&] { return check_laplacian(m, s, seed); });
    add("hessian", [&] { return check_hessian(m, s, seed); });
  }
  if (full || suite == Suite::eigen) add("eigen", [&] { return check_eigen(m, s, seed); });
  if (full || suite == Suite::volume_comparison)
    add("volume_comparison", [&] { return check_volume_comparison(m, s, seed); });
  if (full) add("dualities", [&] { return check_dualities(m, s, seed); });
  report.utc = utc_now();
  report.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

// ---- plot data -------------------------------------------------------------------------

PlotKind parse_plot(const std::string& name) {
  if (name == "laplacian_profile") return PlotKind::laplacian_profile;
  if (name == "bg_ratio") return PlotKind::bg_ratio;
  if (name == "indicatrix") return PlotKind::indicatrix;
  if (name == "geodesic") return PlotKind::geodesic;
  throw ConfigError("unknown plot selector '" + name + "'");
}

std::string to_string(PlotKind p) {
  switch (p) {
    case PlotKind::laplacian_profile: return "laplacian_profile";
    case PlotKind::bg_ratio: return "bg_ratio";
    case PlotKind::indicatrix: return "indicatrix";
    case PlotKind::geodesic: return "geodesic";
  }
  return "?";
}

void emit_plot_data(const SuiteConfig& config, PlotKind kind, std::ostream& out) {
  ModelContext m(make_model(config.model));
  const bool sphere = m.metric().atlas().kind() == ChartAtlas::Kind::sphere;
  out << std::setprecision(12);
  switch (kind) {
    case PlotKind::laplacian_profile: {
      if (!sphere) throw DomainError("laplacian_profile needs a compact model");
      out << "r,laplacian,model\n";
      for (const auto& row : laplacian_profile(m, radial_range(m, config.settings.count("radii")), config.seed))
        out << row[0] << ',' << row[1] << ',' << row[2] << '\n';
      return;
    }
    case PlotKind::bg_ratio: {
      if (!sphere) throw DomainError("bg_ratio needs a compact model");
      const double R = (m.model_sphere() ? kPi : 1.5) / std::sqrt(m.k);
      std::vector<double> radii;
      for (int i = 1; i <= 16; ++i) radii.push_back(R * i / 16);
      auto [p, xi] = radial_source(m, config.seed);
      (void)xi;
      auto fwd = bishop_gromov_ratio(m.metric(), m.sigma, p, radii, m.n, m.k, BallSide::forward);
      auto bwd = bishop_gromov_ratio(m.metric(), m.sigma, p, radii, m.n, m.k, BallSide::backward);
      // r -> 0 limit of the ratio for the Busemann-Hausdorff measure: |S^{n-1}|.
      const double bound = 2.0 * std::pow(kPi, 0.5 * m.n) / std::tgamma(0.5 * m.n);
      out << "r,forward,backward,model_bound\n";
      for (size_t i = 0; i < radii.size(); ++i)
        out << radii[i] << ',' << fwd[i] << ',' << bwd[i] << ',' << bound << '\n';
      return;
    }
    case PlotKind::indicatrix: {
      ChartPoint x{0, Vector::Zero(m.n)};
      out << "theta,y1,y2\n";
      for (int j = 0; j < 64; ++j) {
        double th = 2.0 * kPi * j / 64;
        Vector u = Vector::Zero(m.n);
        u[0] = std::cos(th);
        u[1] = std::sin(th);
        Vector y = u / m.metric().F(x, u);
        out << th << ',' << y[0] << ',' << y[1] << '\n';
      }
      return;
    }
    case PlotKind::geodesic: {
      auto [p, xi] = radial_source(m, config.seed);
      if (!sphere) p = ChartPoint{0, Vector::Zero(m.n)};
      Vector v = xi / m.metric().F(p, xi);
      double T = sphere ? kPi / std::sqrt(m.k) : 2.0;
      write_path_csv(m.metric(), integrate_geodesic(m.metric(), p, v, T), out);
      return;
    }
  }
}

}  // namespace finsler

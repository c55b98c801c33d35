#include "finsler/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "finsler/spray.hpp"

namespace finsler {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double fourth_order(double fm2, double fm1, double fp1, double fp2, double h) {
  return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

ChartPoint shifted(const ChartPoint& x, int i, double s) {
  ChartPoint z = x;
  z.coords[i] += s;
  return z;
}

// Euclidean unit directions on S^{n-1} with area weights.
void sphere_rule(int n, int angular, int polar, std::vector<Vector>& dirs, std::vector<double>& weights) {
  if (n == 2) {
    for (int j = 0; j < angular; ++j) {
      double t = kTwoPi * (j + 0.5) / angular;
      dirs.push_back((Vector(2) << std::cos(t), std::sin(t)).finished());
      weights.push_back(kTwoPi / angular);
    }
    return;
  }
  if (n == 3) {
    QuadratureRule gz = gauss_legendre(polar);
    for (size_t i = 0; i < gz.nodes.size(); ++i) {
      double z = gz.nodes[i];
      double rho = std::sqrt(1.0 - z * z);
      for (int j = 0; j < angular; ++j) {
        double t = kTwoPi * (j + 0.5) / angular;
        dirs.push_back((Vector(3) << rho * std::cos(t), rho * std::sin(t), z).finished());
        weights.push_back(gz.weights[i] * kTwoPi / angular);
      }
    }
    return;
  }
  throw DomainError("spherical quadrature supports n = 2, 3");
}

// Orthonormal tangent basis of S^{n-1} at u.
std::vector<Vector> sphere_tangents(const Vector& u) {
  const int n = static_cast<int>(u.size());
  std::vector<Vector> out;
  for (int i = 0; i < n && static_cast<int>(out.size()) < n - 1; ++i) {
    Vector t = Vector::Unit(n, i);
    t -= t.dot(u) * u;
    for (const Vector& e : out) t -= t.dot(e) * e;
    if (t.norm() > 0.3) out.push_back(t.normalized());
  }
  return out;
}

}  // namespace

// ---- scalar fields -----------------------------------------------------------

Vector ScalarField::differential(const ChartPoint& x) const {
  const int n = static_cast<int>(x.coords.size());
  const double h = 1e-4;
  Vector out(n);
  for (int i = 0; i < n; ++i)
    out[i] = fourth_order(value(shifted(x, i, -2 * h)), value(shifted(x, i, -h)), value(shifted(x, i, h)),
                          value(shifted(x, i, 2 * h)), h);
  return out;
}

std::optional<Vector> ScalarField::gradient_hook(const FinslerMetricModel&, const ChartPoint&) const {
  return std::nullopt;
}

Vector FunctionField::differential(const ChartPoint& x) const {
  return diff_ ? diff_(x) : ScalarField::differential(x);
}

AmbientPolynomial::AmbientPolynomial(std::shared_ptr<const ChartAtlas> atlas, double c, AmbientVector a,
                                     Eigen::MatrixXd B)
    : atlas_(std::move(atlas)), c_(c), a_(std::move(a)), B_(std::move(B)) {
  const int N = atlas_->ambient_dimension();
  if (a_.size() != N || B_.rows() != N || B_.cols() != N) throw ParameterError("polynomial coefficient size mismatch");
}

AmbientPolynomial AmbientPolynomial::coordinate(std::shared_ptr<const ChartAtlas> atlas, int i) {
  const int N = atlas->ambient_dimension();
  if (i < 0 || i >= N) throw ParameterError("ambient coordinate index out of range");
  AmbientVector a = AmbientVector::Unit(N, i);
  return AmbientPolynomial(std::move(atlas), 0.0, a, Eigen::MatrixXd::Zero(N, N));
}

AmbientPolynomial AmbientPolynomial::random(std::shared_ptr<const ChartAtlas> atlas, std::mt19937_64& rng) {
  const int N = atlas->ambient_dimension();
  std::normal_distribution<double> g;
  AmbientVector a(N);
  for (int i = 0; i < N; ++i) a[i] = g(rng);
  Eigen::MatrixXd M(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) M(i, j) = g(rng);
  return AmbientPolynomial(std::move(atlas), g(rng), a, 0.5 * (M + M.transpose()));
}

double AmbientPolynomial::value(const ChartPoint& x) const {
  Eigen::VectorXd X = atlas_->embed(x);
  return c_ + a_.dot(X) + X.dot(B_ * X);
}

Vector AmbientPolynomial::differential(const ChartPoint& x) const {
  const int n = atlas_->dimension();
  Eigen::VectorXd X = atlas_->embed(x);
  Eigen::VectorXd grad = Eigen::VectorXd(a_) + 2.0 * B_ * X;
  Vector out(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd dX = atlas_->push_forward(TangentVector{x, Vector::Unit(n, i)});
    out[i] = grad.dot(dX);
  }
  return out;
}

AmbientPolynomial AmbientPolynomial::shifted(double dc) const {
  AmbientPolynomial out = *this;
  out.c_ += dc;
  return out;
}

RadialProfile RadialProfile::identity() {
  return {[](double r) { return r; }, [](double) { return 1.0; }, "r"};
}

RadialProfile RadialProfile::cosine(double k) {
  const double s = std::sqrt(k);
  return {[s](double r) { return -std::cos(s * r); }, [s](double r) { return s * std::sin(s * r); }, "-cos"};
}

RadialField::RadialField(std::shared_ptr<const FinslerMetricModel> metric, ChartPoint p, RadialProfile profile)
    : metric_(std::move(metric)), p_(std::move(p)), profile_(std::move(profile)) {
  metric_->atlas().validate(p_);
}

ChartPoint RadialField::point_at(const Vector& xi, double r) const {
  if (!(r > 0.0)) throw CriticalPointError("radial sample at the source point");
  Vector v = xi * (r / metric_->F(p_, xi));
  auto field = std::make_unique<LocalDistanceField>(*metric_, p_, v);
  ChartPoint end = field->reference().point;
  seeds_.push_back({metric_->atlas().embed(end), std::move(field)});
  return end;
}

const LocalDistanceField& RadialField::local_for(const ChartPoint& x) const {
  AmbientVector X = metric_->atlas().embed(x);
  const Seed* best = nullptr;
  double best_d = 0.15;
  for (const Seed& s : seeds_) {
    double d = (s.end - X).norm();
    if (d < best_d) {
      best_d = d;
      best = &s;
    }
  }
  if (best) return *best->field;
  DistanceResult d = forward_distance(*metric_, p_, x);
  if (d.distance < 1e-12) throw CriticalPointError("distance function queried at its source");
  seeds_.push_back({X, std::make_unique<LocalDistanceField>(*metric_, p_, d.initial_direction)});
  return *seeds_.back().field;
}

LocalDistanceField::Sample RadialField::distance(const ChartPoint& x) const { return local_for(x).at(x); }

double RadialField::value(const ChartPoint& x) const { return profile_.phi(distance(x).r); }

Vector RadialField::differential(const ChartPoint& x) const {
  LocalDistanceField::Sample s = distance(x);
  return profile_.dphi(s.r) * legendre(*metric_, x, s.grad).components;
}

std::optional<Vector> RadialField::gradient_hook(const FinslerMetricModel& metric, const ChartPoint& x) const {
  if (metric.name() != metric_->name()) return std::nullopt;
  LocalDistanceField::Sample s = distance(x);
  double d = profile_.dphi(s.r);
  if (!(d > 0.0)) return std::nullopt;
  return Vector(d * s.grad);
}

// ---- differential operators --------------------------------------------------

Vector gradient(const FinslerMetricModel& metric, const ScalarField& u, const ChartPoint& x) {
  if (auto g = u.gradient_hook(metric, x)) return *g;
  Vector du = u.differential(x);
  if (du.isZero(0.0)) return Vector::Zero(du.size());
  return legendre_inverse(metric, Covector{x, du}).components;
}

double divergence(const std::function<Vector(const ChartPoint&)>& V, const VolumeDensity& sigma, const ChartPoint& x,
                  double step) {
  const int n = static_cast<int>(x.coords.size());
  double acc = V(x).dot(sigma.log_gradient(x));
  for (int i = 0; i < n; ++i) {
    acc += fourth_order(V(shifted(x, i, -2 * step))[i], V(shifted(x, i, -step))[i], V(shifted(x, i, step))[i],
                        V(shifted(x, i, 2 * step))[i], step);
  }
  return acc;
}

double divergence(const VectorFieldModel& V, const VolumeDensity& sigma, const ChartPoint& x, double step) {
  return divergence([&V](const ChartPoint& z) { return V.at(z); }, sigma, x, step);
}

double laplacian(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ScalarField& u,
                 const ChartPoint& x, const LaplacianOptions& options) {
  auto grad = [&](const ChartPoint& z) {
    Vector g = gradient(metric, u, z);
    if (g.isZero(0.0) || metric.F(z, g) <= options.critical_tol)
      throw CriticalPointError("Laplacian stencil touches a critical point");
    return g;
  };
  return divergence(grad, sigma, x, options.step);
}

// ---- integration -------------------------------------------------------------

double pairwise_sum(const std::vector<double>& values) {
  auto rec = [&](auto&& self, size_t lo, size_t hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (size_t i = lo; i < hi; ++i) s += values[i];
      return s;
    }
    size_t mid = lo + (hi - lo) / 2;
    return self(self, lo, mid) + self(self, mid, hi);
  };
  return rec(rec, 0, values.size());
}

double ManifoldQuadrature::volume() const { return pairwise_sum(weights); }

double ManifoldQuadrature::integrate(const std::function<double(const ChartPoint&)>& f) const {
  std::vector<double> terms(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) terms[i] = weights[i] * f(nodes[i]);
  return pairwise_sum(terms);
}

double ManifoldQuadrature::integrate(const ScalarField& f) const {
  return integrate([&f](const ChartPoint& x) { return f.value(x); });
}

ManifoldQuadrature chart_quadrature(const ChartAtlas& atlas, const VolumeDensity& sigma,
                                    const ChartQuadratureOptions& options) {
  if (atlas.kind() != ChartAtlas::Kind::sphere) throw DomainError("integration needs a compact model");
  const int n = atlas.dimension();
  std::vector<Vector> dirs;
  std::vector<double> dw;
  sphere_rule(n, options.azimuth, options.polar, dirs, dw);
  QuadratureRule radial = gauss_legendre(options.radial, 0.0, 1.0);
  ManifoldQuadrature q;
  for (int chart = 0; chart < 2; ++chart) {
    for (size_t i = 0; i < radial.nodes.size(); ++i) {
      const double rho = radial.nodes[i];
      const double jac = std::pow(rho, n - 1) * radial.weights[i];
      for (size_t j = 0; j < dirs.size(); ++j) {
        ChartPoint x{chart, Vector(rho * dirs[j])};
        q.nodes.push_back(x);
        q.weights.push_back(jac * dw[j] * sigma(x));
      }
    }
  }
  return q;
}

double integrate(const ChartAtlas& atlas, const VolumeDensity& sigma, const ScalarField& f,
                 const ChartQuadratureOptions& options) {
  return chart_quadrature(atlas, sigma, options).integrate(f);
}

PolarQuadrature::PolarQuadrature(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& p,
                                 std::vector<double> radii, const PolarOptions& options)
    : radii_(std::move(radii)) {
  const int n = metric.dimension();
  metric.atlas().validate(p);
  // Composite rule on the intervals between sorted radii, so nested balls share nodes.
  std::vector<double> breaks = radii_;
  for (double R : breaks)
    if (!(R > 0.0)) throw DomainError("ball radius must be positive");
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<double> times;
  double lo = 0.0;
  for (double hi : breaks) {
    const int m = std::max(6, static_cast<int>(std::ceil(options.radial * (hi - lo) / breaks.back())));
    QuadratureRule rule = gauss_legendre(m, lo, hi);
    times.insert(times.end(), rule.nodes.begin(), rule.nodes.end());
    rweights_.insert(rweights_.end(), rule.weights.begin(), rule.weights.end());
    lo = hi;
  }
  for (double R : radii_)
    ends_.push_back(static_cast<int>(std::upper_bound(times.begin(), times.end(), R) - times.begin()));
  std::vector<int> order(times.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<Vector> dirs;
  std::vector<double> dw;
  sphere_rule(n, options.azimuth, options.polar, dirs, dw);
  GeodesicOptions gopt = options.geodesic;
  gopt.record = false;
  GeodesicFlow flow(metric, gopt);
  for (size_t j = 0; j < dirs.size(); ++j) {
    const Vector& u = dirs[j];
    const double Fu = metric.F(p, u);
    const Vector dF = legendre(metric, p, u).components / Fu;
    FlowState s;
    s.x = p;
    s.v = u / Fu;
    for (const Vector& t : sphere_tangents(u)) {
      s.dx.push_back(Vector::Zero(n));
      s.dv.push_back(t / Fu - u * (dF.dot(t) / (Fu * Fu)));
    }
    Ray ray;
    ray.u = u;
    ray.weight = dw[j];
    ray.nodes.resize(times.size());
    double sign = 0.0;
    bool alive = true;
    for (int idx : order) {
      s = flow.advance(s, times[idx]);
      Matrix M(n, n);
      M.col(0) = s.v;
      for (int a = 0; a < n - 1; ++a) M.col(a + 1) = s.dx[a];
      // The chart transition u / |u|^2 reverses orientation.
      double det = M.determinant() * (s.chart_switches % 2 ? -1.0 : 1.0);
      if (sign == 0.0) sign = det > 0 ? 1.0 : -1.0;
      if (det * sign <= 0.0) alive = false;
      Node& node = ray.nodes[idx];
      node.r = times[idx];
      node.x = s.x;
      node.velocity = s.v;
      node.density = alive ? sigma(s.x) * std::abs(det) : 0.0;
    }
    rays_.push_back(std::move(ray));
  }
}

double PolarQuadrature::integrate(size_t radius_index, const std::function<double(const Node&)>& f) const {
  if (radius_index >= radii_.size()) throw DomainError("radius index out of range");
  const int begin = 0;
  const int end = ends_[radius_index];
  std::vector<double> terms;
  terms.reserve(rays_.size() * (end - begin));
  for (const Ray& ray : rays_)
    for (int i = begin; i < end; ++i) {
      const Node& node = ray.nodes[i];
      terms.push_back(ray.weight * rweights_[i] * node.density * (node.density != 0.0 ? f(node) : 0.0));
    }
  return pairwise_sum(terms);
}

double PolarQuadrature::ball_volume(size_t radius_index) const {
  return integrate(radius_index, [](const Node&) { return 1.0; });
}

std::vector<double> ball_volumes(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& center,
                                 const std::vector<double>& radii, BallSide side, const PolarOptions& options) {
  const FinslerMetricModel used = side == BallSide::forward ? metric : reverse_metric(metric);
  PolarQuadrature q(used, sigma, center, radii, options);
  std::vector<double> out;
  for (size_t i = 0; i < radii.size(); ++i) out.push_back(q.ball_volume(i));
  return out;
}

double ball_volume(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& center, double r,
                   BallSide side, const PolarOptions& options) {
  return ball_volumes(metric, sigma, center, {r}, side, options)[0];
}

double model_ball_profile(double r, double N, double k) {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  if (k == 0.0) return std::pow(r, N) / N;
  if (k > 0.0 && r > std::numbers::pi / std::sqrt(k) * (1.0 + 1e-12))
    throw DomainError("radius beyond the model diameter");
  QuadratureRule rule = gauss_legendre(64, 0.0, r);
  const double s = std::sqrt(std::abs(k));
  double acc = 0.0;
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    double t = rule.nodes[i];
    double base = k > 0.0 ? std::sin(s * t) / s : std::sinh(s * t) / s;
    acc += rule.weights[i] * std::pow(base, N - 1.0);
  }
  return acc;
}

std::vector<double> bishop_gromov_ratio(const FinslerMetricModel& metric, const VolumeDensity& sigma,
                                        const ChartPoint& center, const std::vector<double>& radii, double N, double k,
                                        BallSide side, const PolarOptions& options) {
  for (size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw DomainError("radii must be increasing");
  std::vector<double> vols = ball_volumes(metric, sigma, center, radii, side, options);
  std::vector<double> out;
  for (size_t i = 0; i < radii.size(); ++i) out.push_back(vols[i] / model_ball_profile(radii[i], N, k));
  return out;
}

double small_ball_ratio(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& center,
                        double r, const PolarOptions& options) {
  const int n = metric.dimension();
  const double unit = std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  std::vector<double> vols = ball_volumes(metric, sigma, center, {0.5 * r, r}, BallSide::forward, options);
  double half = vols[0] / (unit * std::pow(0.5 * r, n));
  double full = vols[1] / (unit * std::pow(r, n));
  return 2.0 * half - full;
}

// ---- spectral ------------------------------------------------------------------

namespace {

RayleighResult finish_rayleigh(double vol, double int_f, double int_abs, double int_f2, double int_grad2) {
  if (!(int_f2 > 0.0)) throw DegenerateFunctionError("Rayleigh quotient of the zero function");
  RayleighResult out;
  out.mean = int_f / vol;
  out.mean_subtracted = std::abs(int_f) > 1e-4 * int_abs;
  double den = int_f2 - vol * out.mean * out.mean;
  if (!(den > 1e-14 * int_f2)) throw DegenerateFunctionError("Rayleigh quotient of a constant function");
  out.quotient = int_grad2 / den;
  return out;
}

}  // namespace

RayleighResult rayleigh_quotient(const FinslerMetricModel& metric, const ManifoldQuadrature& q, const ScalarField& f) {
  std::vector<double> fv, av, f2, g2;
  for (size_t i = 0; i < q.nodes.size(); ++i) {
    const ChartPoint& x = q.nodes[i];
    const double w = q.weights[i];
    double v = f.value(x);
    Vector df = f.differential(x);
    double dn = df.isZero(0.0) ? 0.0 : dual_norm(metric, Covector{x, df});
    fv.push_back(w * v);
    av.push_back(w * std::abs(v));
    f2.push_back(w * v * v);
    g2.push_back(w * dn * dn);
  }
  return finish_rayleigh(q.volume(), pairwise_sum(fv), pairwise_sum(av), pairwise_sum(f2), pairwise_sum(g2));
}

RayleighResult rayleigh_quotient_radial(const FinslerMetricModel& metric, const PolarQuadrature& q, size_t radius_index,
                                        const RadialProfile& profile) {
  using Node = PolarQuadrature::Node;
  double vol = q.ball_volume(radius_index);
  double int_f = q.integrate(radius_index, [&](const Node& nd) { return profile.phi(nd.r); });
  double int_abs = q.integrate(radius_index, [&](const Node& nd) { return std::abs(profile.phi(nd.r)); });
  double int_f2 = q.integrate(radius_index, [&](const Node& nd) { return std::pow(profile.phi(nd.r), 2); });
  double int_g2 = q.integrate(radius_index, [&](const Node& nd) {
    // d phi(r) = phi'(r) L(grad r).
    double d = profile.dphi(nd.r);
    if (d == 0.0) return 0.0;
    if (d > 0.0) return d * d;
    Vector dr = legendre(metric, nd.x, nd.velocity).components;
    double dn = dual_norm(metric, Covector{nd.x, Vector(d * dr)});
    return dn * dn;
  });
  return finish_rayleigh(vol, int_f, int_abs, int_f2, int_g2);
}

double eigen_residual(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ScalarField& f,
                      double lambda, const std::vector<ChartPoint>& samples, const LaplacianOptions& options) {
  double worst = 0.0;
  for (const ChartPoint& x : samples)
    worst = std::max(worst, std::abs(laplacian(metric, sigma, f, x, options) + lambda * f.value(x)));
  return worst;
}

// ---- radial frames, Hessian ----------------------------------------------------

std::vector<Vector> orthonormal_complement(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V) {
  const int n = static_cast<int>(V.size());
  Matrix g = fundamental_tensor(metric, x, V).matrix;
  auto ip = [&](const Vector& a, const Vector& b) { return a.dot(g * b); };
  std::vector<Vector> basis{V / std::sqrt(ip(V, V))};
  for (int i = 0; i < n && static_cast<int>(basis.size()) < n; ++i) {
    Vector e = Vector::Unit(n, i);
    for (const Vector& b : basis) e -= ip(e, b) * b;
    double norm = std::sqrt(ip(e, e));
    if (norm > 0.1) basis.push_back(e / norm);
  }
  basis.erase(basis.begin());
  return basis;
}

RadialFrame::RadialFrame(const FinslerMetricModel& metric, const ChartPoint& p, const Vector& xi, double start)
    : metric_(metric), p_(p), xi_(xi / metric.F(p, xi)) {
  if (!(start > 0.0)) throw DomainError("frame start must be positive");
  GeodesicOptions opt{1e-12, 1e-12};
  opt.record = false;
  GeodesicFlow flow(metric_, opt);
  FlowState s;
  s.x = p_;
  s.v = xi_;
  s = flow.advance(s, start);
  s.transported = orthonormal_complement(metric_, s.x, s.v);
  start_ = s;
}

RadialFrame::Sample RadialFrame::at(double r) const {
  if (r < start_.t) throw DomainError("radial frame queried before its start");
  GeodesicOptions opt{1e-12, 1e-12};
  opt.record = false;
  GeodesicFlow flow(metric_, opt);
  FlowState s = flow.advance(start_, r);
  return {r, s.x, s.v, s.transported};
}

Matrix hessian_second_difference(const RadialField& r, const ChartPoint& x, const std::vector<Vector>& frame,
                                 double s) {
  const FinslerMetricModel& metric = r.metric();
  const FinslerMetricModel rev = reverse_metric(metric);
  GeodesicOptions opt{1e-12, 1e-12};
  opt.record = false;
  auto along = [&](const Vector& E, double t) {
    // Backward times follow the reverse geodesic with velocity -E.
    ExpResult e = t > 0 ? exp_map(metric, x, Vector(t * E), false, opt) : exp_map(rev, x, Vector(t * E), false, opt);
    return r.distance(e.point).r;
  };
  const int n = metric.dimension();
  const LocalDistanceField::Sample base = r.distance(x);
  const Vector dr = legendre(metric, x, base.grad).components;
  // (r o eta)'' = H(E, E) + dr(Gamma(grad r)(E, E) - 2 G(x, E)); the Landsberg part of
  // Gamma drops out against dr, leaving the Berwald term G_yy(x, grad r)(E, E).
  auto correction = [&](const Vector& E) {
    using HD = HyperDual<double>;
    Buf<HD> xs, ys, out;
    for (int i = 0; i < n; ++i) {
      xs[i] = HD(x.coords[i], 0.0, 0.0, 0.0);
      ys[i] = HD(base.grad[i], E[i], E[i], 0.0);
    }
    if (!spray_kernel<HD>(metric, x.chart, std::span<const HD>(xs.data(), n), std::span<const HD>(ys.data(), n),
                          out.data()))
      throw ConvexityError("spray undefined at the Hessian base point");
    Vector G = spray(metric, x, E).G;
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += dr[i] * (2.0 * G[i] - out[i].d);
    return c;
  };
  auto Q = [&](const Vector& E) {
    double dd = (-along(E, 2 * s) + 16 * along(E, s) - 30 * base.r + 16 * along(E, -s) - along(E, -2 * s)) / (12 * s * s);
    return dd + correction(E);
  };
  const int m = static_cast<int>(frame.size());
  Matrix H(m, m);
  for (int a = 0; a < m; ++a) {
    H(a, a) = Q(frame[a]);
    for (int b = 0; b < a; ++b) H(a, b) = H(b, a) = 0.25 * (Q(Vector(frame[a] + frame[b])) - Q(Vector(frame[a] - frame[b])));
  }
  return H;
}

Matrix hessian_connection(const RadialField& r, const ChartPoint& x, const std::vector<Vector>& frame, double step) {
  const FinslerMetricModel& metric = r.metric();
  const int n = metric.dimension();
  Vector y = r.distance(x).grad;
  Matrix J(n, n);
  for (int j = 0; j < n; ++j) {
    J.col(j) = (r.distance(shifted(x, j, -2 * step)).grad - 8.0 * r.distance(shifted(x, j, -step)).grad +
                8.0 * r.distance(shifted(x, j, step)).grad - r.distance(shifted(x, j, 2 * step)).grad) /
               (12.0 * step);
  }
  Matrix D = J + spray(metric, x, y).N;
  Matrix g = fundamental_tensor(metric, x, y).matrix;
  const int m = static_cast<int>(frame.size());
  Matrix H(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) H(a, b) = frame[b].dot(g * (D * frame[a]));
  return H;
}

}  // namespace finsler

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "finsler/density.hpp"
#include "finsler/geodesy.hpp"

namespace finsler {

/// f = 0 where a nonzero function is required.
class DegenerateFunctionError : public Error {
 public:
  using Error::Error;
};

// ---- scalar fields -----------------------------------------------------------

class ScalarField {
 public:
  virtual ~ScalarField() = default;

  virtual double value(const ChartPoint& x) const = 0;
  /// du(x) in the chart of x. Default: 4th-order central differences, step 1e-4.
  virtual Vector differential(const ChartPoint& x) const;
  /// Closed-form gradient for `metric`, if the field knows one.
  virtual std::optional<Vector> gradient_hook(const FinslerMetricModel& metric, const ChartPoint& x) const;
  virtual std::string describe() const = 0;
};

class FunctionField : public ScalarField {
 public:
  using Fn = std::function<double(const ChartPoint&)>;
  using DiffFn = std::function<Vector(const ChartPoint&)>;

  FunctionField(Fn fn, std::string name, DiffFn differential = {})
      : fn_(std::move(fn)), diff_(std::move(differential)), name_(std::move(name)) {}

  double value(const ChartPoint& x) const override { return fn_(x); }
  Vector differential(const ChartPoint& x) const override;
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  DiffFn diff_;
  std::string name_;
};

/// c + a.X + X^T B X in ambient coordinates X of the embedded point; exact differential.
class AmbientPolynomial : public ScalarField {
 public:
  AmbientPolynomial(std::shared_ptr<const ChartAtlas> atlas, double c, AmbientVector a, Eigen::MatrixXd B);

  /// X_i (0-based ambient index).
  static AmbientPolynomial coordinate(std::shared_ptr<const ChartAtlas> atlas, int i);
  /// Random coefficients, standard normal entries (B symmetrised).
  static AmbientPolynomial random(std::shared_ptr<const ChartAtlas> atlas, std::mt19937_64& rng);

  double value(const ChartPoint& x) const override;
  Vector differential(const ChartPoint& x) const override;
  std::string describe() const override { return "ambient-polynomial"; }

  AmbientPolynomial shifted(double dc) const;

 private:
  std::shared_ptr<const ChartAtlas> atlas_;
  double c_;
  AmbientVector a_;
  Eigen::MatrixXd B_;
};

class NegatedField : public ScalarField {
 public:
  explicit NegatedField(std::shared_ptr<const ScalarField> u) : u_(std::move(u)) {}
  double value(const ChartPoint& x) const override { return -u_->value(x); }
  Vector differential(const ChartPoint& x) const override { return -u_->differential(x); }
  std::string describe() const override { return "-(" + u_->describe() + ")"; }

 private:
  std::shared_ptr<const ScalarField> u_;
};

struct RadialProfile {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  std::string name;

  static RadialProfile identity();
  /// -cos(sqrt(k) r).
  static RadialProfile cosine(double k);
};

/// phi(r) with r = d(p, .) the forward distance from p. Distances come from
/// local chord-Newton fields seeded along known geodesics (see point_at);
/// queries far from every seed fall back to multistart shooting. Not thread-safe.
class RadialField : public ScalarField {
 public:
  RadialField(std::shared_ptr<const FinslerMetricModel> metric, ChartPoint p, RadialProfile profile = RadialProfile::identity());

  /// exp_p(r xi / F(p, xi)); seeds a local distance field there.
  ChartPoint point_at(const Vector& xi, double r) const;

  LocalDistanceField::Sample distance(const ChartPoint& x) const;
  double value(const ChartPoint& x) const override;
  Vector differential(const ChartPoint& x) const override;
  std::optional<Vector> gradient_hook(const FinslerMetricModel& metric, const ChartPoint& x) const override;
  std::string describe() const override { return profile_.name + "(r)"; }

  const ChartPoint& source() const { return p_; }
  const FinslerMetricModel& metric() const { return *metric_; }

 private:
  struct Seed {
    AmbientVector end;
    std::unique_ptr<LocalDistanceField> field;
  };

  const LocalDistanceField& local_for(const ChartPoint& x) const;

  std::shared_ptr<const FinslerMetricModel> metric_;
  ChartPoint p_;
  RadialProfile profile_;
  mutable std::vector<Seed> seeds_;
};

// ---- differential operators --------------------------------------------------

/// L^{-1}(du); the zero vector where du = 0.
Vector gradient(const FinslerMetricModel& metric, const ScalarField& u, const ChartPoint& x);

struct LaplacianOptions {
  double step = 1e-3;
  double critical_tol = 1e-8;  ///< F*(du) below this counts as a critical point
};

/// sum_i d_i V^i + V^i d_i Phi, with 4th-order differences of the chart components.
double divergence(const std::function<Vector(const ChartPoint&)>& V, const VolumeDensity& sigma,
                  const ChartPoint& x, double step = 1e-3);
double divergence(const VectorFieldModel& V, const VolumeDensity& sigma, const ChartPoint& x, double step = 1e-3);

/// div(grad u). Throws CriticalPointError if du vanishes on the stencil.
double laplacian(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ScalarField& u,
                 const ChartPoint& x, const LaplacianOptions& options = {});

// ---- integration -------------------------------------------------------------

/// Weighted nodes (density included) over a compact model.
struct ManifoldQuadrature {
  std::vector<ChartPoint> nodes;
  std::vector<double> weights;

  double volume() const;
  double integrate(const std::function<double(const ChartPoint&)>& f) const;
  double integrate(const ScalarField& f) const;
};

struct ChartQuadratureOptions {
  int radial = 12;   ///< Gauss-Legendre nodes in |u|
  int azimuth = 24;  ///< trapezoid nodes in the azimuth
  int polar = 12;    ///< n = 3: Gauss-Legendre nodes in the polar cosine
};

/// Each stereographic chart covers its closed unit disk, a hemisphere; the two
/// disks tile the sphere along the equator. Polar Gauss-Legendre x trapezoid in each.
ManifoldQuadrature chart_quadrature(const ChartAtlas& atlas, const VolumeDensity& sigma,
                                    const ChartQuadratureOptions& options = {});

double integrate(const ChartAtlas& atlas, const VolumeDensity& sigma, const ScalarField& f,
                 const ChartQuadratureOptions& options = {});

double pairwise_sum(const std::vector<double>& values);

struct PolarOptions {
  int radial = 20;   ///< Gauss-Legendre nodes per radial interval
  int azimuth = 24;  ///< trapezoid nodes in the azimuth of the initial direction
  int polar = 8;     ///< n = 3: Gauss-Legendre nodes in its polar cosine
  GeodesicOptions geodesic = {1e-11, 1e-11};
};

/// Geodesic polar coordinates about p: x = exp_p(r u / F(p, u)) for u on the
/// Euclidean unit sphere of the chart at p. The density of dmu in (r, u) is
///   sigma_p(r, u) = sigma(x) |det[gamma', d x / d u]|,
/// valid up to the first conjugate point along each ray (beyond it the ray
/// contributes nothing).
class PolarQuadrature {
 public:
  struct Node {
    double r = 0.0;
    ChartPoint x;
    Vector velocity;  ///< unit; equals grad r inside the injectivity domain
    double density = 0.0;
  };
  struct Ray {
    Vector u;
    double weight = 0.0;  ///< Euclidean area weight on S^{n-1}
    std::vector<Node> nodes;
  };

  /// Radial nodes are composite Gauss-Legendre on the intervals between the
  /// sorted radii, about options.radial nodes over [0, max R].
  PolarQuadrature(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& p,
                  std::vector<double> radii, const PolarOptions& options = {});

  const std::vector<Ray>& rays() const { return rays_; }
  const std::vector<double>& radii() const { return radii_; }

  /// Integral over B+(p, radii()[i]) of f(r, node).
  double integrate(size_t radius_index, const std::function<double(const Node&)>& f) const;
  double ball_volume(size_t radius_index) const;

 private:
  std::vector<double> radii_;
  std::vector<int> ends_;  // node count inside each radius
  std::vector<double> rweights_;
  std::vector<Ray> rays_;
};

enum class BallSide { forward, backward };

/// vol B+(c, r) = {x : d(c, x) < r} or B-(c, r) = {x : d(x, c) < r}; the
/// backward ball is the forward ball of the reverse metric.
std::vector<double> ball_volumes(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& center,
                                 const std::vector<double>& radii, BallSide side, const PolarOptions& options = {});
double ball_volume(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& center, double r,
                   BallSide side, const PolarOptions& options = {});

/// integral_0^r (sin(sqrt(k) t) / sqrt(k))^{N-1} dt (k = 0: t^{N-1}).
double model_ball_profile(double r, double N, double k);

/// vol B(r) / model_ball_profile(r, N, k) for each radius (0 < r <= pi/sqrt(k)).
std::vector<double> bishop_gromov_ratio(const FinslerMetricModel& metric, const VolumeDensity& sigma,
                                        const ChartPoint& center, const std::vector<double>& radii, double N, double k,
                                        BallSide side = BallSide::forward, const PolarOptions& options = {});

/// vol B+(r) / (vol B^n r^n) extrapolated to r -> 0 from r and r/2 (linear Richardson).
double small_ball_ratio(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ChartPoint& center,
                        double r = 0.1, const PolarOptions& options = {});

// ---- spectral ------------------------------------------------------------------

struct RayleighResult {
  double quotient = 0.0;
  double mean = 0.0;           ///< integral of f / volume, subtracted before the quotient
  bool mean_subtracted = false;  ///< |integral f| exceeded 1e-4 ||f||_1
};

/// int F(grad f)^2 / int (f - mean)^2 over the chart quadrature.
RayleighResult rayleigh_quotient(const FinslerMetricModel& metric, const ManifoldQuadrature& q, const ScalarField& f);

/// The same for a radial profile phi(d(p, .)) over polar coordinates about p
/// covering the whole model (radius index of the full-model ball).
RayleighResult rayleigh_quotient_radial(const FinslerMetricModel& metric, const PolarQuadrature& q, size_t radius_index,
                                        const RadialProfile& profile);

/// max over samples of |Laplacian f + lambda f|.
double eigen_residual(const FinslerMetricModel& metric, const VolumeDensity& sigma, const ScalarField& f,
                      double lambda, const std::vector<ChartPoint>& samples, const LaplacianOptions& options = {});

// ---- radial frames, Hessian ----------------------------------------------------

/// Unit geodesic gamma from p with initial direction xi / F(p, xi), carrying a
/// g_{gamma'}-orthonormal transverse frame by parallel transport.
class RadialFrame {
 public:
  struct Sample {
    double r = 0.0;
    ChartPoint x;
    Vector velocity;
    std::vector<Vector> frame;
  };

  /// The frame is built at r = start by Gram-Schmidt on the chart coordinate axes.
  RadialFrame(const FinslerMetricModel& metric, const ChartPoint& p, const Vector& xi, double start = 0.05);

  Sample at(double r) const;
  const ChartPoint& source() const { return p_; }
  const Vector& direction() const { return xi_; }

 private:
  const FinslerMetricModel& metric_;
  ChartPoint p_;
  Vector xi_;
  FlowState start_;
};

/// g_V-orthonormal basis of the complement of V (Gram-Schmidt on the coordinate axes).
std::vector<Vector> orthonormal_complement(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& V);

/// H(r)(E_a, E_b) from 5-point second differences of r along geodesics
/// through x with velocities E_a, E_a +- E_b (step s).
Matrix hessian_second_difference(const RadialField& r, const ChartPoint& x, const std::vector<Vector>& frame,
                                 double s = 1e-2);

/// H(r)(X, Y) = g_{grad r}(X^j d_j grad r + N(x, grad r) X, Y) in the frame.
Matrix hessian_connection(const RadialField& r, const ChartPoint& x, const std::vector<Vector>& frame,
                          double step = 1e-3);

}  // namespace finsler

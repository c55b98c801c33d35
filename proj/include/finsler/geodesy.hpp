#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "finsler/metric.hpp"

namespace finsler {

struct GeodesicOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  double initial_step = 1e-2;
  double min_step = 1e-12;
  int max_steps = 200000;
  bool record = true;  ///< keep every accepted step in GeodesicPath
};

enum class Termination { completed, step_failure };

struct GeodesicPath {
  std::vector<double> times;
  std::vector<ChartPoint> points;
  std::vector<Vector> velocities;
  double f_length = 0.0;
  Termination termination = Termination::completed;
  int chart_switches = 0;
  std::string message;
};

/// Position, velocity, accumulated F-length, optional variations (dx_a, dv_a)
/// and optional parallel fields E_b (E' = -N(x, v) E) along a geodesic, all in
/// the chart of x.
struct FlowState {
  double t = 0.0;
  ChartPoint x;
  Vector v;
  double length = 0.0;
  std::vector<Vector> dx;
  std::vector<Vector> dv;
  std::vector<Vector> transported;
  int chart_switches = 0;
};

/// Adaptive Fehlberg 7(8) integration of x'' + 2G(x, x') = 0 together with
/// its linearisation; re-expresses the state in the other chart whenever the
/// coordinate norm passes the atlas threshold.
class GeodesicFlow {
 public:
  using StepCallback = std::function<void(const FlowState& before, const FlowState& after)>;

  GeodesicFlow(const FinslerMetricModel& metric, GeodesicOptions options = {});

  /// Integrates to t_end (>= s.t). `on_step` sees consecutive accepted states
  /// in a common chart. Throws IntegrationError on step-size underflow.
  FlowState advance(FlowState s, double t_end, const StepCallback& on_step = {}) const;

  /// Same state in another chart, variations included.
  FlowState to_chart(const FlowState& s, int chart) const;

  const FinslerMetricModel& metric() const { return metric_; }
  const GeodesicOptions& options() const { return options_; }

 private:
  const FinslerMetricModel& metric_;
  GeodesicOptions options_;
};

GeodesicPath integrate_geodesic(const FinslerMetricModel& metric, const ChartPoint& x0, const Vector& y0, double T,
                                const GeodesicOptions& options = {});

/// CSV with columns t, chart, x1..xn, y1..yn, F.
void write_path_csv(const FinslerMetricModel& metric, const GeodesicPath& path, std::ostream& out);

struct ExpResult {
  ChartPoint point;
  Vector velocity;  ///< gamma'(1)
  Matrix jacobian;  ///< d exp_p / dv, in the chart of `point`
  double length = 0.0;
};

/// exp_p(v) = gamma(1) with gamma(0) = p, gamma'(0) = v.
ExpResult exp_map(const FinslerMetricModel& metric, const ChartPoint& p, const Vector& v, bool with_jacobian = true,
                  const GeodesicOptions& options = {});

struct ShootingOptions {
  int multistart = 64;
  double shoot_tol = 1e-4;      ///< accepted arrival gap (chart coordinates)
  double horizon = 0.0;         ///< 0: 1.5 pi / sqrt(k)
  int refine_candidates = 8;
  double newton_tol = 1e-12;
  int newton_iterations = 30;
};

struct DistanceResult {
  ChartPoint from;
  ChartPoint to;
  double distance = 0.0;
  Vector initial_direction;  ///< v with exp_p(v) = q; F(p, v) = distance
  Vector arrival_velocity;   ///< gamma'(1) in the chart of `to`
  double arrival_gap = 0.0;
  int multistart_count = 0;
};

/// Forward distance d(p, q) by multistart shooting. Throws UnreachableError
/// when no start converges.
DistanceResult forward_distance(const FinslerMetricModel& metric, const ChartPoint& p, const ChartPoint& q,
                                const ShootingOptions& options = {});

/// Refines v so that exp_p(v) = q (q expressed in any chart). Returns the gap.
double shoot_to(const FinslerMetricModel& metric, const ChartPoint& p, const ChartPoint& q, Vector& v,
                const ShootingOptions& options = {});

/// Forward distance to points near a reference geodesic exp_p(v_ref), by
/// chord Newton from the reference; valid inside the injectivity domain.
class LocalDistanceField {
 public:
  struct Sample {
    double r = 0.0;
    Vector v;     ///< initial vector at p
    Vector grad;  ///< unit arrival velocity = gradient of r, in the chart of the query point
  };

  LocalDistanceField(const FinslerMetricModel& metric, const ChartPoint& p, const Vector& v_ref);

  Sample at(const ChartPoint& z) const;
  const ChartPoint& source() const { return p_; }
  const FinslerMetricModel& metric() const { return metric_; }
  /// exp_p(v_ref) with its Jacobian.
  const ExpResult& reference() const { return ref_; }

 private:
  const FinslerMetricModel& metric_;
  ChartPoint p_;
  Vector v_ref_;
  ExpResult ref_;
};

struct DiameterResult {
  double diameter = 0.0;
  ChartPoint p;
  ChartPoint q;
  int pairs = 0;
};

/// Maximum forward distance over random ordered pairs plus candidate pairs
/// (rotation poles and their antipodes, and p -> exp_p(pi/sqrt(k) xi)).
DiameterResult diameter_estimate(const FinslerMetricModel& metric, int sample_pairs, unsigned seed,
                                 const std::vector<std::pair<ChartPoint, ChartPoint>>& candidates = {},
                                 const ShootingOptions& options = {});

/// max over x of |d(p,x) + d(x,q) - expected|.
double segment_identity_check(const FinslerMetricModel& metric, const ChartPoint& p, const ChartPoint& q,
                              const std::vector<ChartPoint>& xs, double expected,
                              const ShootingOptions& options = {});

/// Low-discrepancy unit directions (Euclidean) in R^n.
std::vector<Vector> sphere_directions(int n, int count);

}  // namespace finsler

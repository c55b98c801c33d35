#pragma once

#include <array>
#include <chrono>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/analysis.hpp"
#include "finsler/models.hpp"

namespace finsler {

// ---- check records -------------------------------------------------------------

enum class Comparison {
  abs_diff,  ///< |measured - expected| <= tolerance
  rel_diff,  ///< |measured - expected| <= tolerance |expected|
  at_most,   ///< measured <= expected + tolerance
  at_least,  ///< measured >= expected - tolerance
};

std::string to_string(Comparison c);

struct CheckRecord {
  std::string check_id;
  std::string anchor;  ///< identity being checked, or "plumbing"
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  Comparison comparison = Comparison::abs_diff;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const;
};

CheckRecord make_check(std::string id, std::string anchor, double measured, double expected, double tolerance,
                       Comparison comparison, nlohmann::json detail = nlohmann::json::object());

// ---- model context ---------------------------------------------------------------

/// A model with its Busemann-Hausdorff density and reverse metric.
struct ModelContext {
  ModelBundle bundle;
  std::shared_ptr<const FinslerMetricModel> reverse;
  VolumeDensity sigma;
  int n = 0;
  double k = 0.0;  ///< flag curvature if constant, else the curvature scale

  explicit ModelContext(ModelBundle b);

  const FinslerMetricModel& metric() const { return *bundle.metric; }
  /// Constant flag curvature, vanishing S and compact: diameter pi/sqrt(k) expected.
  bool model_sphere() const;
};

/// Sample counts and tolerances, with defaults for every key used by a suite.
struct CheckSettings {
  std::map<std::string, int> samples;
  std::map<std::string, double> tolerances;

  static CheckSettings defaults();
  int count(const std::string& key) const;
  double tol(const std::string& key) const;
};

// Individual checks. Each returns one or more records; `seed` drives sampling.
std::vector<CheckRecord> check_flag_curvature(const ModelContext& m, const CheckSettings& s, unsigned seed);
std::vector<CheckRecord> check_s_curvature(const ModelContext& m, const CheckSettings& s, unsigned seed);
std::vector<CheckRecord> check_oracles(const ModelContext& m, const CheckSettings& s, unsigned seed);
std::vector<CheckRecord> check_diameter(const ModelContext& m, const CheckSettings& s, unsigned seed);
std::vector<CheckRecord> check_total_volume(const ModelContext& m, const CheckSettings& s);
std::vector<CheckRecord> check_laplacian(const ModelContext& m, const CheckSettings& s, unsigned seed);
std::vector<CheckRecord> check_eigen(const ModelContext& m, const CheckSettings& s, unsigned seed);
std::vector<CheckRecord> check_volume_comparison(const ModelContext& m, const CheckSettings& s, unsigned seed);
std::vector<CheckRecord> check_dualities(const ModelContext& m, const CheckSettings& s, unsigned seed);
std::vector<CheckRecord> check_structure(const ModelContext& m, const CheckSettings& s, unsigned seed);
std::vector<CheckRecord> check_hessian(const ModelContext& m, const CheckSettings& s, unsigned seed);

/// Rows (r, laplacian of r, (n-1) sqrt(k) cot(sqrt(k) r)) along one ray.
std::vector<std::array<double, 3>> laplacian_profile(const ModelContext& m, const std::vector<double>& radii,
                                                     unsigned seed);

/// Base point and direction used by the radial checks for a given seed.
std::pair<ChartPoint, Vector> radial_source(const ModelContext& m, unsigned seed);

// ---- suites and reports ------------------------------------------------------------

enum class Suite { curvature, s_curvature, diameter, laplacian_comparison, eigen, volume_comparison, full };

std::string to_string(Suite s);
Suite parse_suite(const std::string& name);

struct SuiteConfig {
  nlohmann::json model = {{"model", "round"}};
  Suite suite = Suite::full;
  unsigned seed = 1;
  CheckSettings settings = CheckSettings::defaults();
  std::string report_path;  ///< empty: <report dir>/<model>_<suite>_<seed>.jsonl

  /// Accepts {"model": {...}, "suite", "seed", "samples", "tolerances", "report"}
  /// or the flat form with model parameters beside "model": "<name>".
  static SuiteConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static nlohmann::json schema();
};

struct VerificationReport {
  SuiteConfig config;
  std::vector<CheckRecord> records;
  std::string utc;
  double elapsed = 0.0;

  int passed() const;
  int failed() const;
  bool all_pass() const { return failed() == 0; }
  /// One JSON object per check, then a summary line holding the timestamp.
  void write_jsonl(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

VerificationReport run_suite(const SuiteConfig& config);

enum class PlotKind { laplacian_profile, bg_ratio, indicatrix, geodesic };

PlotKind parse_plot(const std::string& name);
std::string to_string(PlotKind p);

/// CSV columns per kind:
///   laplacian_profile: r, laplacian, model
///   bg_ratio:          r, forward, backward, model_bound
///   indicatrix:        theta, y1, y2 (unit vectors at the base point, first two components)
///   geodesic:          t, chart, x1..xn, y1..yn, F
void emit_plot_data(const SuiteConfig& config, PlotKind kind, std::ostream& out);

}  // namespace finsler

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "finsler/verify.hpp"

using namespace finsler;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::vector<double>> csv_rows(const std::string& text, std::string& header) {
  std::vector<std::string> lines = lines_of(text);
  header = lines.at(0);
  std::vector<std::vector<double>> rows;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::vector<double> row;
    std::istringstream in(lines[i]);
    for (std::string cell; std::getline(in, cell, ',');) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      row.push_back(end == cell.c_str() ? std::nan("") : v);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("check comparisons") {
  CHECK(make_check("a", "x", 1.00005, 1.0, 1e-4, Comparison::abs_diff).pass);
  CHECK_FALSE(make_check("a", "x", 1.0002, 1.0, 1e-4, Comparison::abs_diff).pass);
  CHECK(make_check("a", "x", 3.16, 3.1416, 1e-2, Comparison::rel_diff).pass);
  CHECK_FALSE(make_check("a", "x", 3.2, 3.1416, 1e-2, Comparison::rel_diff).pass);
  CHECK(make_check("a", "x", 5e-4, 0.0, 1e-3, Comparison::at_most).pass);
  CHECK_FALSE(make_check("a", "x", 2e-3, 0.0, 1e-3, Comparison::at_most).pass);
  CHECK(make_check("a", "x", 1.9995, 2.0, 1e-3, Comparison::at_least).pass);
  CHECK(make_check("a", "x", 7.0, 2.0, 1e-3, Comparison::at_least).pass);
  CHECK_FALSE(make_check("a", "x", 1.99, 2.0, 1e-3, Comparison::at_least).pass);

  nlohmann::json j = make_check("id", "anchor-name", 1.0, 2.0, 0.5, Comparison::abs_diff).to_json();
  for (const char* key : {"check_id", "anchor", "measured", "expected", "tolerance", "pass"}) CHECK(j.contains(key));
  CHECK(j["pass"] == false);
}

TEST_CASE("suite config parsing") {
  SUBCASE("flat form keeps model parameters beside the name") {
    SuiteConfig c = SuiteConfig::from_json(
        {{"model", "randers-nav"}, {"n", 3}, {"a", 0.2}, {"suite", "eigen"}, {"seed", 9}, {"samples", {{"radii", 5}}}});
    CHECK(c.model["model"] == "randers-nav");
    CHECK(c.model["n"] == 3);
    CHECK(c.model["a"] == 0.2);
    CHECK(c.suite == Suite::eigen);
    CHECK(c.seed == 9);
    CHECK(c.settings.count("radii") == 5);
    CHECK(c.settings.count("flags") == 50);
    CHECK(c.settings.tol("laplacian") == 1e-3);
  }
  SUBCASE("nested form round-trips") {
    SuiteConfig c = SuiteConfig::from_json(
        {{"model", {{"model", "round"}, {"n", 2}}}, {"suite", "diameter"}, {"tolerances", {{"diameter", 0.05}}}});
    SuiteConfig d = SuiteConfig::from_json(c.to_json());
    CHECK(d.to_json() == c.to_json());
    CHECK(d.settings.tol("diameter") == 0.05);
  }
  SUBCASE("malformed configs") {
    CHECK_THROWS_AS(SuiteConfig::from_json({{"suite", "full"}}), ConfigError);
    CHECK_THROWS_AS(SuiteConfig::from_json({{"model", "round"}, {"suite", "everything"}}), ConfigError);
    CHECK_THROWS_AS(SuiteConfig::from_json({{"model", "round"}, {"seed", -1}}), ConfigError);
    CHECK_THROWS_AS(SuiteConfig::from_json({{"model", "round"}, {"samples", {{"flags", 0}}}}), ConfigError);
    CHECK_THROWS_AS(SuiteConfig::from_json({{"model", "round"}, {"samples", {{"bogus", 3}}}}), ConfigError);
    CHECK_THROWS_AS(SuiteConfig::from_json({{"model", "round"}, {"tolerances", {{"laplacian", 0.0}}}}), ConfigError);
    CHECK_THROWS_AS(SuiteConfig::from_json({{"model", {{"model", "round"}}}, {"extra", 1}}), ConfigError);
    CHECK_THROWS_AS(SuiteConfig::from_json(nlohmann::json::array()), ConfigError);
  }
  SUBCASE("schema lists suites, models and defaults") {
    nlohmann::json s = SuiteConfig::schema();
    CHECK(s["suite"]["enum"].size() == 7);
    CHECK(s["model"]["models"].contains("bao-shen"));
    CHECK(s["tolerances"]["defaults"]["duality"] == 1e-5);
  }
}

TEST_CASE("reports are deterministic apart from the timestamp") {
  SuiteConfig c = SuiteConfig::from_json({{"model", "randers-nav"}, {"n", 2}, {"suite", "curvature"}, {"seed", 4}});
  VerificationReport a = run_suite(c);
  VerificationReport b = run_suite(c);
  std::ostringstream sa, sb;
  a.write_jsonl(sa);
  b.write_jsonl(sb);
  std::vector<std::string> la = lines_of(sa.str());
  std::vector<std::string> lb = lines_of(sb.str());
  REQUIRE(la.size() == a.records.size() + 1);
  REQUIRE(la.size() == lb.size());
  for (size_t i = 0; i + 1 < la.size(); ++i) CHECK(la[i] == lb[i]);
  nlohmann::json ta = nlohmann::json::parse(la.back());
  nlohmann::json tb = nlohmann::json::parse(lb.back());
  CHECK(ta["summary"] == tb["summary"]);
  CHECK(ta["summary"]["total"] == a.records.size());
  CHECK(ta["summary"]["passed"] == a.passed());
  CHECK(ta.contains("timestamp"));
  CHECK(a.all_pass());

  SuiteConfig other = c;
  other.seed = 5;
  std::ostringstream so;
  run_suite(other).write_jsonl(so);
  CHECK(lines_of(so.str()).front() != la.front());
}

TEST_CASE("tight tolerances make a check fail") {
  SuiteConfig c = SuiteConfig::from_json(
      {{"model", "randers-nav"}, {"n", 2}, {"suite", "curvature"}, {"tolerances", {{"chern", 1e-14}}}});
  VerificationReport r = run_suite(c);
  CHECK(r.failed() == 1);
  CHECK_FALSE(r.all_pass());
}

TEST_CASE("non-model spheres skip constant-curvature checks") {
  SuiteConfig c = SuiteConfig::from_json({{"model", "randers-nav"}, {"n", 2}, {"wind", "gradient"}, {"suite", "diameter"}});
  CHECK(run_suite(c).records.empty());
  c.suite = Suite::s_curvature;
  VerificationReport r = run_suite(c);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].check_id == "s_homogeneity");
}

TEST_CASE("plot data") {
  std::string header;
  SUBCASE("flat toy indicatrix is the unit circle around the wind") {
    std::ostringstream out;
    emit_plot_data(SuiteConfig::from_json({{"model", "flat-randers"}}), PlotKind::indicatrix, out);
    auto rows = csv_rows(out.str(), header);
    CHECK(header == "theta,y1,y2");
    REQUIRE(rows.size() == 64);
    for (const auto& row : rows) CHECK(std::hypot(row[1] - 0.5, row[2]) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("laplacian profile follows the model cotangent") {
    std::ostringstream out;
    emit_plot_data(SuiteConfig::from_json({{"model", "round"}, {"samples", {{"radii", 6}}}}),
                   PlotKind::laplacian_profile, out);
    auto rows = csv_rows(out.str(), header);
    CHECK(header == "r,laplacian,model");
    REQUIRE(rows.size() == 6);
    CHECK(rows.front()[0] == doctest::Approx(0.3));
    CHECK(rows.back()[0] == doctest::Approx(std::numbers::pi - 0.3));
    for (const auto& row : rows) {
      CHECK(row[2] == doctest::Approx(1.0 / std::tan(row[0])).epsilon(1e-9));
      CHECK(std::abs(row[1] - row[2]) < 1e-3);
    }
  }
  SUBCASE("bishop-gromov ratio is flat on the round sphere") {
    std::ostringstream out;
    emit_plot_data(SuiteConfig::from_json({{"model", "round"}}), PlotKind::bg_ratio, out);
    auto rows = csv_rows(out.str(), header);
    CHECK(header == "r,forward,backward,model_bound");
    REQUIRE(rows.size() == 16);
    CHECK(rows.back()[0] == doctest::Approx(std::numbers::pi));
    for (const auto& row : rows) {
      CHECK(row[3] == doctest::Approx(2.0 * std::numbers::pi));
      CHECK(row[1] == doctest::Approx(row[3]).epsilon(1e-6));
      CHECK(row[2] == doctest::Approx(row[3]).epsilon(1e-6));
    }
  }
  SUBCASE("geodesic path") {
    std::ostringstream out;
    emit_plot_data(SuiteConfig::from_json({{"model", "round"}}), PlotKind::geodesic, out);
    auto rows = csv_rows(out.str(), header);
    CHECK(header == "t,chart,x1,x2,y1,y2,F");
    REQUIRE(rows.size() > 2);
    CHECK(out.str().find(",south,") != std::string::npos);
    CHECK(rows.back()[0] == doctest::Approx(std::numbers::pi));
    for (const auto& row : rows) CHECK(row[6] == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("compact-only plots reject the plane") {
    std::ostringstream out;
    CHECK_THROWS_AS(emit_plot_data(SuiteConfig::from_json({{"model", "flat-randers"}}), PlotKind::bg_ratio, out),
                    DomainError);
  }
  CHECK_THROWS_AS(parse_plot("histogram"), ConfigError);
}

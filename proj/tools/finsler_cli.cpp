#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "finsler/verify.hpp"

namespace fs = std::filesystem;
using namespace finsler;

namespace {

constexpr int kUsageError = 2;

struct CommonOptions {
  std::string config_file;
  std::string model;
  std::string suite;
  unsigned seed = 0;
  std::vector<std::string> params;
  std::vector<std::string> samples;
  std::vector<std::string> tolerances;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_file, "JSON config file (comments allowed)")->check(CLI::ExistingFile);
  cmd->add_option("-m,--model", o.model, "model name; replaces the file's model and its parameters");
  cmd->add_option("-s,--suite", o.suite, "curvature | s_curvature | diameter | laplacian_comparison | eigen | "
                                         "volume_comparison | full");
  o.seed_opt = cmd->add_option("--seed", o.seed, "sampling seed");
  cmd->add_option("-p,--param", o.params, "model parameter key=value (value parsed as JSON, else string)");
  cmd->add_option("--samples", o.samples, "sample count key=N");
  cmd->add_option("--tol", o.tolerances, "tolerance key=value");
}

std::pair<std::string, nlohmann::json> split_assignment(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + text + "'");
  std::string value = text.substr(eq + 1);
  nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  return {text.substr(0, eq), parsed};
}

// Flags > file > defaults.
SuiteConfig build_config(const CommonOptions& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    j = nlohmann::json::parse(in, nullptr, false, true);
    if (j.is_discarded()) throw ConfigError("config file '" + o.config_file + "' is not valid JSON");
    if (!j.is_object()) throw ConfigError("config must be an object");
  }
  if (!j.contains("model")) j["model"] = "round";
  SuiteConfig c = SuiteConfig::from_json(j);
  if (!o.model.empty() && o.model != c.model.value("model", "")) c.model = {{"model", o.model}};
  for (const std::string& p : o.params) {
    auto [k, v] = split_assignment(p);
    if (k == "model") throw ConfigError("use --model to change the model");
    c.model[k] = v;
  }
  nlohmann::json overrides = c.to_json();
  for (const std::string& p : o.samples) {
    auto [k, v] = split_assignment(p);
    overrides["samples"][k] = v;
  }
  for (const std::string& p : o.tolerances) {
    auto [k, v] = split_assignment(p);
    overrides["tolerances"][k] = v;
  }
  if (!o.suite.empty()) overrides["suite"] = o.suite;
  if (o.seed_opt && o.seed_opt->count()) overrides["seed"] = o.seed;
  c = SuiteConfig::from_json(overrides);
  make_model(c.model);  // surfaces bad model parameters as a config error
  return c;
}

int usage_error(const std::string& what) {
  std::cerr << "error: " << what << "\n\nconfig schema:\n" << SuiteConfig::schema().dump(2) << '\n';
  return kUsageError;
}

fs::path default_report_path(const SuiteConfig& c) {
  const char* dir = std::getenv("FINSLER_REPORT_DIR");
  fs::path base = dir && *dir ? fs::path(dir) : fs::path(".");
  return base / (c.model.value("model", "model") + "_" + to_string(c.suite) + "_" + std::to_string(c.seed) + ".jsonl");
}

int run_verify(const CommonOptions& o, const std::string& report_flag) {
  SuiteConfig c;
  try {
    c = build_config(o);
  } catch (const Error& e) {
    return usage_error(e.what());
  }
  if (!report_flag.empty()) c.report_path = report_flag;
  fs::path path = c.report_path.empty() ? default_report_path(c) : fs::path(c.report_path);

  VerificationReport r = run_suite(c);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write report to " << path << '\n';
    return kUsageError;
  }
  r.write_jsonl(out);
  r.write_summary(std::cout);
  std::cout << "report: " << path.string() << '\n';
  return r.all_pass() ? 0 : 1;
}

int run_plot(const CommonOptions& o, const std::string& what, const std::string& out_path) {
  SuiteConfig c;
  PlotKind kind;
  try {
    kind = parse_plot(what);
    c = build_config(o);
  } catch (const Error& e) {
    return usage_error(e.what());
  }
  try {
    if (out_path.empty() || out_path == "-") {
      emit_plot_data(c, kind, std::cout);
    } else {
      std::ofstream out(out_path);
      if (!out) {
        std::cerr << "error: cannot write " << out_path << '\n';
        return kUsageError;
      }
      emit_plot_data(c, kind, out);
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return 0;
}

void list_models() {
  for (const ModelInfo& info : model_registry()) {
    std::cout << info.name << "  " << info.summary << '\n';
    for (const auto& [key, spec] : info.schema.items()) {
      std::cout << "    " << key << " (" << spec.value("type", "") << ", default " << spec["default"].dump() << ")";
      if (spec.contains("description")) std::cout << "  " << spec["description"].get<std::string>();
      std::cout << '\n';
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler model construction and numerical verification"};
  app.require_subcommand(1);

  CommonOptions verify_opts;
  std::string report_flag;
  auto* verify = app.add_subcommand("verify", "run a verification suite; writes a JSONL report and prints a summary");
  add_common(verify, verify_opts);
  verify->add_option("-r,--report", report_flag, "report path (default $FINSLER_REPORT_DIR/<model>_<suite>_<seed>.jsonl)");
  verify->footer("Exit status: 0 all checks pass, 1 a check failed, 2 config or usage error.");

  CommonOptions plot_opts;
  std::string what;
  std::string out_path;
  auto* plot = app.add_subcommand("plot", "emit plot data as CSV");
  plot->add_option("what", what, "laplacian_profile | bg_ratio | indicatrix | geodesic")->required();
  add_common(plot, plot_opts);
  plot->add_option("-o,--out", out_path, "output CSV path (default stdout)");
  plot->footer(
      "Columns:\n"
      "  laplacian_profile  r, laplacian, model            (Laplacian of the distance from a point vs (n-1) cot)\n"
      "  bg_ratio           r, forward, backward, model_bound  (ball volume over the model profile)\n"
      "  indicatrix         theta, y1, y2                  (64 unit vectors at the chart origin)\n"
      "  geodesic           t, chart, x1..xn, y1..yn, F     (unit-speed geodesic to the model diameter)");

  app.add_subcommand("models", "list registered models and their parameters");
  app.add_subcommand("schema", "print the config schema as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (verify->parsed()) return run_verify(verify_opts, report_flag);
    if (plot->parsed()) return run_plot(plot_opts, what, out_path);
    if (app.got_subcommand("models")) {
      list_models();
      return 0;
    }
    std::cout << SuiteConfig::schema().dump(2) << '\n';
    return 0;
  } catch (const ConfigError& e) {
    return usage_error(e.what());
  }
}

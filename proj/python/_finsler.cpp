#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "finsler/curvature.hpp"
#include "finsler/verify.hpp"

namespace py = pybind11;
using namespace finsler;

namespace {

// Points and tangent vectors cross the boundary in ambient coordinates.
class PyModel {
 public:
  explicit PyModel(const std::string& spec) : ctx_(make_model(nlohmann::json::parse(spec))) {}

  ChartPoint point(const std::vector<double>& X) const {
    const ChartAtlas& atlas = ctx_.metric().atlas();
    if (static_cast<int>(X.size()) != atlas.ambient_dimension())
      throw ConfigError("point needs " + std::to_string(atlas.ambient_dimension()) + " ambient coordinates");
    AmbientVector a(X.size());
    for (size_t i = 0; i < X.size(); ++i) a[i] = X[i];
    if (atlas.kind() == ChartAtlas::Kind::sphere) {
      if (!(a.norm() > 0.0)) throw DomainError("point must be nonzero");
      a.normalize();
    }
    return atlas.from_ambient(a);
  }

  Vector tangent(const ChartPoint& p, const std::vector<double>& v) const {
    const ChartAtlas& atlas = ctx_.metric().atlas();
    if (static_cast<int>(v.size()) != atlas.ambient_dimension())
      throw ConfigError("vector needs " + std::to_string(atlas.ambient_dimension()) + " ambient components");
    AmbientVector a(v.size());
    for (size_t i = 0; i < v.size(); ++i) a[i] = v[i];
    if (atlas.kind() == ChartAtlas::Kind::sphere) a -= atlas.embed(p) * atlas.embed(p).dot(a);
    return atlas.pull_back(p, a);
  }

  std::string name() const { return ctx_.metric().name(); }
  int dimension() const { return ctx_.n; }
  std::string parameters() const { return ctx_.metric().parameters().dump(); }
  bool model_sphere() const { return ctx_.model_sphere(); }

  double F(const std::vector<double>& X, const std::vector<double>& v) const {
    ChartPoint p = point(X);
    return eval_F(ctx_.metric(), p, tangent(p, v));
  }

  double flag(const std::vector<double>& X, const std::vector<double>& V, const std::vector<double>& W) const {
    ChartPoint p = point(X);
    return flag_curvature(ctx_.metric(), p, tangent(p, V), tangent(p, W));
  }

  double ric(const std::vector<double>& X, const std::vector<double>& V) const {
    ChartPoint p = point(X);
    return ricci(ctx_.metric(), p, tangent(p, V));
  }

  double s(const std::vector<double>& X, const std::vector<double>& y) const {
    ChartPoint p = point(X);
    return s_curvature(ctx_.metric(), ctx_.sigma, p, tangent(p, y));
  }

  double distance(const std::vector<double>& X, const std::vector<double>& Y) const {
    return forward_distance(ctx_.metric(), point(X), point(Y)).distance;
  }

  double diameter(int pairs, unsigned seed) const { return diameter_estimate(ctx_.metric(), pairs, seed).diameter; }

  double volume() const { return chart_quadrature(ctx_.metric().atlas(), ctx_.sigma).volume(); }

 private:
  ModelContext ctx_;
};

std::string run_suite_json(const std::string& config) {
  VerificationReport r = run_suite(SuiteConfig::from_json(nlohmann::json::parse(config)));
  nlohmann::json out;
  out["records"] = nlohmann::json::array();
  for (const CheckRecord& rec : r.records) out["records"].push_back(rec.to_json());
  out["passed"] = r.passed();
  out["failed"] = r.failed();
  out["elapsed_s"] = r.elapsed;
  out["utc"] = r.utc;
  out["config"] = r.config.to_json();
  return out.dump();
}

std::string plot_csv(const std::string& config, const std::string& kind) {
  std::ostringstream out;
  emit_plot_data(SuiteConfig::from_json(nlohmann::json::parse(config)), parse_plot(kind), out);
  return out.str();
}

std::string models_json() {
  nlohmann::json out = nlohmann::json::array();
  for (const ModelInfo& info : model_registry())
    out.push_back({{"name", info.name}, {"summary", info.summary}, {"parameters", info.schema}});
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_finsler, m) {
  m.doc() = "Finsler model construction and numerical verification";

  py::register_exception<Error>(m, "FinslerError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<PyModel>(m, "Model")
      .def(py::init<const std::string&>(), py::arg("spec_json"))
      .def_property_readonly("name", &PyModel::name)
      .def_property_readonly("dimension", &PyModel::dimension)
      .def_property_readonly("parameters_json", &PyModel::parameters)
      .def_property_readonly("model_sphere", &PyModel::model_sphere)
      .def("F", &PyModel::F, py::arg("x"), py::arg("v"))
      .def("flag_curvature", &PyModel::flag, py::arg("x"), py::arg("V"), py::arg("W"))
      .def("ricci", &PyModel::ric, py::arg("x"), py::arg("V"))
      .def("s_curvature", &PyModel::s, py::arg("x"), py::arg("y"))
      .def("distance", &PyModel::distance, py::arg("x"), py::arg("y"))
      .def("diameter", &PyModel::diameter, py::arg("pairs") = 10, py::arg("seed") = 1)
      .def("volume", &PyModel::volume);

  m.def("run_suite_json", &run_suite_json, py::arg("config_json"));
  m.def("plot_csv", &plot_csv, py::arg("config_json"), py::arg("kind"));
  m.def("models_json", &models_json);
  m.def("schema_json", [] { return SuiteConfig::schema().dump(); });
}

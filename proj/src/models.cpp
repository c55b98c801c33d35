#include "finsler/models.hpp"

#include <cmath>

namespace finsler {

std::optional<Matrix> BaoShenFunction::riemannian_part(const ChartPoint& x) const {
  const int n = 3;
  Eigen::Matrix3d Z;  // Z(a, i) = zeta^a(e_i)
  for (int i = 0; i < n; ++i) {
    Vector e = Vector::Unit(n, i);
    Buf<double> z;
    coframe<double>(x.chart, std::span<const double>(x.coords.data(), n), std::span<const double>(e.data(), n),
                    z.data());
    for (int a = 0; a < 3; ++a) Z(a, i) = z[a];
  }
  Eigen::Vector3d c(k_ * k_, k_, k_);
  Matrix A = Z.transpose() * c.asDiagonal() * Z;
  return A;
}

ModelBundle round_sphere(int n, double k) {
  if (n < 2) throw ParameterError("round sphere needs n >= 2");
  if (!(k > 0.0)) throw ParameterError("round sphere needs k > 0");
  auto atlas = std::make_shared<const ChartAtlas>(ChartAtlas::sphere(n));
  auto h = std::make_shared<const StandardMetricField>(atlas, 1.0 / std::sqrt(k));
  ModelTraits traits;
  traits.flag_curvature = k;
  traits.zero_s_curvature = true;
  traits.reversible = true;
  traits.riemannian = true;
  auto metric = std::make_shared<const FinslerMetricModel>(atlas, std::make_shared<const RiemannianFunction>(h),
                                                           "round", nlohmann::json{{"n", n}, {"k", k}}, traits);
  ModelBundle b;
  b.metric = metric;
  b.h = h;
  b.reference = metric;
  return b;
}

ModelBundle euclidean_space(int n) {
  auto atlas = std::make_shared<const ChartAtlas>(ChartAtlas::plane(n));
  auto h = std::make_shared<const StandardMetricField>(atlas, 1.0);
  ModelTraits traits;
  traits.flag_curvature = 0.0;
  traits.zero_s_curvature = true;
  traits.reversible = true;
  traits.riemannian = true;
  traits.compact = false;
  auto metric = std::make_shared<const FinslerMetricModel>(atlas, std::make_shared<const RiemannianFunction>(h),
                                                           "euclidean", nlohmann::json{{"n", n}}, traits);
  ModelBundle b;
  b.metric = metric;
  b.h = h;
  b.reference = metric;
  return b;
}

ModelBundle randers_from_navigation(const NavigationData& nav, const std::string& name, nlohmann::json parameters) {
  if (!nav.h || !nav.W) throw ParameterError("navigation data is incomplete");
  if (nav.h->dimension() != nav.W->dimension()) throw ParameterError("metric and wind dimensions differ");
  const double sup = nav.sup_wind_norm();
  if (!(sup < 1.0)) throw NavigationDomainError("wind reaches unit h-length (sup |W|_h = " + std::to_string(sup) + ")");

  const auto& atlas = nav.h->atlas();
  const bool sphere = atlas.kind() == ChartAtlas::Kind::sphere;
  const auto* ambient = dynamic_cast<const AmbientVectorField*>(nav.W.get());
  const bool still = sup == 0.0;
  const bool killing = still || (ambient && (ambient->kind() == AmbientVectorField::Kind::rotation ||
                                             ambient->kind() == AmbientVectorField::Kind::constant));
  const auto* standard = dynamic_cast<const StandardMetricField*>(nav.h.get());

  ModelTraits traits;
  traits.reversible = still;
  traits.riemannian = still;
  traits.compact = sphere;
  if (standard && killing) {
    traits.flag_curvature = sphere ? 1.0 / (standard->radius() * standard->radius()) : 0.0;
    traits.zero_s_curvature = true;
  }
  if (parameters.is_null() || parameters.empty()) {
    parameters = nlohmann::json::object();
    parameters["n"] = atlas.dimension();
    if (ambient) parameters.update(ambient->describe());
  }

  ModelBundle b;
  b.metric = std::make_shared<const FinslerMetricModel>(
      nav.h->atlas_ptr(), std::make_shared<const RandersNavigationFunction>(nav), name, parameters, traits);
  b.h = nav.h;
  b.nav = nav;
  b.reference = std::make_shared<const FinslerMetricModel>(
      nav.h->atlas_ptr(), std::make_shared<const RiemannianFunction>(nav.h), name + "-reference",
      nlohmann::json::object(), ModelTraits{});
  return b;
}

std::shared_ptr<AmbientVectorField> rotation_killing_field(const RiemannianMetricField& sphere,
                                                           const AmbientVector& axis, double amplitude) {
  return std::make_shared<AmbientVectorField>(sphere.atlas_ptr(), AmbientVectorField::Kind::rotation, axis,
                                              amplitude);
}

NavigationData killing_family(const NavigationData& nav, double a) {
  const double sup = nav.sup_wind_norm();
  if (!(std::abs(a) * sup < 1.0)) throw NavigationDomainError("scaled wind reaches unit h-length");
  NavigationData out = nav;
  if (const auto* ambient = dynamic_cast<const AmbientVectorField*>(nav.W.get())) {
    out.W = ambient->scaled(a);
    return out;
  }
  throw ParameterError("killing_family needs an ambient-formula wind");
}

double structure_equation_residual(const BaoShenFunction& fn, const std::vector<ChartPoint>& points) {
  const double step = 1e-5;
  auto frame = [&](const ChartPoint& p) {
    Eigen::Matrix3d Z;
    for (int i = 0; i < 3; ++i) {
      Vector e = Vector::Unit(3, i);
      Buf<double> z;
      fn.coframe<double>(p.chart, std::span<const double>(p.coords.data(), 3), std::span<const double>(e.data(), 3),
                         z.data());
      for (int a = 0; a < 3; ++a) Z(a, i) = z[a];
    }
    return Z;
  };
  double worst = 0.0;
  for (const ChartPoint& p : points) {
    Eigen::Matrix3d Z = frame(p);
    std::array<Eigen::Matrix3d, 3> dZ;  // dZ[j](a, i) = d_j zeta^a_i
    for (int j = 0; j < 3; ++j) {
      ChartPoint a = p, b = p;
      a.coords[j] += step;
      b.coords[j] -= step;
      dZ[j] = (frame(a) - frame(b)) / (2.0 * step);
    }
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3;
      const int c = (a + 2) % 3;
      for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
          double d = dZ[i](a, j) - dZ[j](a, i);
          double w = 2.0 * (Z(b, i) * Z(c, j) - Z(b, j) * Z(c, i));
          worst = std::max(worst, std::abs(d - w));
        }
      }
    }
  }
  return worst;
}

ModelBundle bao_shen_metric(double k_param) {
  if (!(k_param >= 1.0)) throw ParameterError("Bao-Shen parameter must be at least 1");
  auto atlas = std::make_shared<const ChartAtlas>(ChartAtlas::sphere(3));

  // Orient zeta^1 so that d zeta^1 = 2 zeta^2 ^ zeta^3 holds.
  std::vector<ChartPoint> probe;
  probe.push_back({0, (Vector(3) << 0.3, -0.2, 0.5).finished()});
  probe.push_back({1, (Vector(3) << -0.4, 0.1, 0.2).finished()});
  double plus = structure_equation_residual(BaoShenFunction(atlas, k_param, 1.0), probe);
  double minus = structure_equation_residual(BaoShenFunction(atlas, k_param, -1.0), probe);
  double sign = plus <= minus ? 1.0 : -1.0;
  auto fn = std::make_shared<const BaoShenFunction>(atlas, k_param, sign);

  ModelTraits traits;
  traits.flag_curvature = 1.0;
  traits.zero_s_curvature = true;
  traits.reversible = k_param == 1.0;
  traits.riemannian = k_param == 1.0;
  ModelBundle b;
  b.metric = std::make_shared<const FinslerMetricModel>(atlas, fn, "bao-shen", nlohmann::json{{"k_param", k_param}},
                                                        traits);
  b.bao_shen = fn;
  b.reference = round_sphere(3, 1.0).metric;
  return b;
}

// ---- registry --------------------------------------------------------------

namespace {

nlohmann::json param(const char* type, nlohmann::json def, const char* description) {
  return {{"type", type}, {"default", std::move(def)}, {"description", description}};
}

}  // namespace

const std::vector<ModelInfo>& model_registry() {
  static const std::vector<ModelInfo> registry = {
      {"round", "Round sphere S^n(1/sqrt(k)).",
       {{"n", param("integer", 2, "dimension, >= 2")}, {"k", param("number", 1.0, "sectional curvature, > 0")}}},
      {"randers-nav", "Randers sphere from navigation data (round metric of curvature k, wind W).",
       {{"n", param("integer", 2, "dimension, 2 or 3 for rotation winds")},
        {"k", param("number", 1.0, "curvature of the underlying round metric")},
        {"wind", param("string", "rotation", "rotation | gradient | none")},
        {"a", param("number", 0.3, "wind amplitude (ambient speed)")},
        {"axis", param("array", nlohmann::json::array({0.0, 0.0, 1.0}), "rotation axis in the first 3 coordinates")},
        {"direction", param("array", nullptr, "gradient wind direction c (ambient); default e_1")}}},
      {"bao-shen", "Bao-Shen Randers metric F_k on S^3.", {{"k_param", param("number", 2.0, "k >= 1")}}},
      {"flat-randers", "Randers metric on R^n from the Euclidean metric and a constant wind.",
       {{"n", param("integer", 2, "dimension")},
        {"wind_vector", param("array", nlohmann::json::array({0.5, 0.0}), "constant wind, |W| < 1")}}},
  };
  return registry;
}

namespace {

const ModelInfo& find_info(const std::string& name) {
  for (const auto& info : model_registry())
    if (info.name == name) return info;
  throw ConfigError("unknown model '" + name + "'");
}

template <class T>
T get_param(const nlohmann::json& spec, const ModelInfo& info, const std::string& key) {
  const nlohmann::json& v = spec.contains(key) ? spec.at(key) : info.schema.at(key).at("default");
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("parameter '" + key + "' of model '" + info.name + "' has the wrong type");
  }
}

AmbientVector to_ambient(const std::vector<double>& v) {
  AmbientVector out(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

}  // namespace

ModelBundle make_model(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("model") || !spec.at("model").is_string())
    throw ConfigError("model spec needs a string field 'model'");
  const std::string name = spec.at("model").get<std::string>();
  const ModelInfo& info = find_info(name);
  for (const auto& [key, value] : spec.items()) {
    if (key != "model" && !info.schema.contains(key))
      throw ConfigError("unknown parameter '" + key + "' for model '" + name + "'");
  }
  try {
    if (name == "round") {
      return round_sphere(get_param<int>(spec, info, "n"), get_param<double>(spec, info, "k"));
    }
    if (name == "bao-shen") {
      return bao_shen_metric(get_param<double>(spec, info, "k_param"));
    }
    if (name == "randers-nav") {
      const int n = get_param<int>(spec, info, "n");
      const double k = get_param<double>(spec, info, "k");
      const double a = get_param<double>(spec, info, "a");
      const std::string wind = get_param<std::string>(spec, info, "wind");
      ModelBundle base = round_sphere(n, k);
      NavigationData nav{base.h, nullptr};
      nlohmann::json params{{"n", n}, {"k", k}, {"wind", wind}, {"a", a}};
      if (wind == "rotation") {
        auto axis = get_param<std::vector<double>>(spec, info, "axis");
        nav.W = rotation_killing_field(*base.h, to_ambient(axis), a);
        params["axis"] = axis;
      } else if (wind == "gradient") {
        std::vector<double> dir(n + 1, 0.0);
        dir[0] = 1.0;
        if (spec.contains("direction") && !spec.at("direction").is_null())
          dir = get_param<std::vector<double>>(spec, info, "direction");
        nav.W = std::make_shared<AmbientVectorField>(base.h->atlas_ptr(), AmbientVectorField::Kind::gradient,
                                                     to_ambient(dir), a);
        params["direction"] = dir;
      } else if (wind == "none") {
        nav.W = std::make_shared<AmbientVectorField>(base.h->atlas_ptr(), AmbientVectorField::Kind::zero,
                                                     AmbientVector(), 0.0);
      } else {
        throw ConfigError("wind must be rotation, gradient or none");
      }
      ModelBundle b = randers_from_navigation(nav, "randers-nav", params);
      b.reference = base.metric;
      return b;
    }
    if (name == "flat-randers") {
      const int n = get_param<int>(spec, info, "n");
      auto w = get_param<std::vector<double>>(spec, info, "wind_vector");
      if (static_cast<int>(w.size()) != n) throw ConfigError("wind_vector needs n components");
      ModelBundle base = euclidean_space(n);
      NavigationData nav{base.h, std::make_shared<AmbientVectorField>(
                                     base.h->atlas_ptr(), AmbientVectorField::Kind::constant, to_ambient(w), 1.0)};
      return randers_from_navigation(nav, "flat-randers", {{"n", n}, {"wind_vector", w}});
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("cannot build model '" + name + "': " + e.what());
  }
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace finsler

#include "finsler/fields.hpp"

#include <cmath>
#include <random>

namespace finsler {

Matrix RiemannianMetricField::at(const ChartPoint& x) const {
  const int n = dimension();
  std::array<double, kMaxDim * kMaxDim> buf{};
  matrix(x.chart, std::span<const double>(x.coords.data(), n), buf.data());
  Matrix h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = buf[i * n + j];
  return h;
}

double RiemannianMetricField::norm(const ChartPoint& x, const Vector& v) const {
  return std::sqrt(v.dot(at(x) * v));
}

StandardMetricField::StandardMetricField(std::shared_ptr<const ChartAtlas> atlas, double radius)
    : RiemannianMetricFieldBase(std::move(atlas)), radius_(radius) {
  if (!(radius > 0.0)) throw ParameterError("metric radius must be positive");
}

std::string StandardMetricField::describe() const {
  if (atlas().kind() == ChartAtlas::Kind::plane) return "euclidean";
  return "round(radius=" + std::to_string(radius_) + ")";
}

Vector VectorFieldModel::at(const ChartPoint& x) const {
  const int n = dimension();
  Vector w(n);
  field(x.chart, std::span<const double>(x.coords.data(), n), w.data());
  return w;
}

AmbientVectorField::AmbientVectorField(std::shared_ptr<const ChartAtlas> atlas, Kind kind, AmbientVector direction,
                                       double amplitude)
    : VectorFieldModelBase(std::move(atlas)), kind_(kind), direction_(std::move(direction)), amplitude_(amplitude) {
  const int m = this->atlas().ambient_dimension();
  if (!std::isfinite(amplitude)) throw ParameterError("field amplitude must be finite");
  if (kind_ == Kind::zero) {
    direction_ = AmbientVector::Zero(m);
    return;
  }
  if (kind_ == Kind::rotation) {
    if (this->atlas().kind() != ChartAtlas::Kind::sphere || m < 3)
      throw ParameterError("rotation fields need a sphere of dimension at least 2");
    if (direction_.size() != 3) throw ParameterError("rotation axis must have 3 components");
  } else if (direction_.size() != m) {
    throw ParameterError("field direction must have one component per ambient coordinate");
  }
  if (kind_ == Kind::gradient && this->atlas().kind() != ChartAtlas::Kind::sphere)
    throw ParameterError("gradient fields are defined on spheres");
  if (kind_ == Kind::constant && this->atlas().kind() != ChartAtlas::Kind::plane)
    throw ParameterError("constant fields are defined on the plane");
  double len = direction_.norm();
  if (kind_ != Kind::constant) {
    if (!(len > 0.0)) throw ParameterError("field direction must be nonzero");
    direction_ /= len;
  }
}

std::shared_ptr<AmbientVectorField> AmbientVectorField::scaled(double s) const {
  return std::make_shared<AmbientVectorField>(atlas_ptr(), kind_, direction_, amplitude_ * s);
}

std::optional<double> AmbientVectorField::ambient_sup() const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::rotation:
    case Kind::gradient:
      return std::abs(amplitude_);
    case Kind::constant:
      return std::abs(amplitude_) * direction_.norm();
  }
  return std::nullopt;
}

nlohmann::json AmbientVectorField::describe() const {
  static const char* names[] = {"none", "rotation", "gradient", "constant"};
  nlohmann::json j;
  j["wind"] = names[static_cast<int>(kind_)];
  j["a"] = amplitude_;
  j["direction"] = std::vector<double>(direction_.data(), direction_.data() + direction_.size());
  return j;
}

double NavigationData::lambda(const ChartPoint& x) const {
  Vector w = W->at(x);
  return 1.0 - w.dot(h->at(x) * w);
}

double NavigationData::sup_wind_norm() const {
  auto scale = h->ambient_scale();
  auto sup = W->ambient_sup();
  if (scale && sup) return *scale * *sup;
  std::mt19937_64 rng(20240917);
  double best = 0.0;
  for (int i = 0; i < 4096; ++i) {
    ChartPoint p = h->atlas().sample(rng);
    best = std::max(best, h->norm(p, W->at(p)));
  }
  return best;
}

double killing_residual(const RiemannianMetricField& h, const VectorFieldModel& W,
                        const std::vector<ChartPoint>& samples) {
  const int n = h.dimension();
  const double step = 1e-5;
  double worst = 0.0;
  for (const ChartPoint& p : samples) {
    Matrix h0 = h.at(p);
    Vector w0 = W.at(p);
    if (w0.isZero(0.0) && W.ambient_sup() == 0.0) continue;
    std::vector<Matrix> dh(n);
    Matrix dW(n, n);  // dW(k, i) = d_i W^k
    for (int i = 0; i < n; ++i) {
      ChartPoint a = p, b = p;
      a.coords[i] += step;
      b.coords[i] -= step;
      dh[i] = (h.at(a) - h.at(b)) / (2.0 * step);
      dW.col(i) = (W.at(a) - W.at(b)) / (2.0 * step);
    }
    Matrix L(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double v = 0.0;
        for (int k = 0; k < n; ++k) v += w0[k] * dh[k](i, j) + h0(k, j) * dW(k, i) + h0(i, k) * dW(k, j);
        L(i, j) = v;
      }
    }
    Matrix hinv = h0.inverse();
    double norm2 = (hinv * L * hinv * L.transpose()).trace();
    worst = std::max(worst, std::sqrt(std::max(norm2, 0.0)));
  }
  return worst;
}

}  // namespace finsler

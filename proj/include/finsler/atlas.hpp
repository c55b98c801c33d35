#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "finsler/autodiff.hpp"
#include "finsler/types.hpp"

namespace finsler {

/// Coordinate atlas. Two kinds are supported: a single Cartesian chart on R^n,
/// and the stereographic pair on S^n. On the sphere, chart 0 ("north") is the
/// projection from the north pole e_{n+1} (its origin is the south pole) and
/// chart 1 ("south") the projection from -e_{n+1}. Both realise the unit
/// sphere; metric scale lives in the metric, not the atlas.
class ChartAtlas {
 public:
  enum class Kind { plane, sphere };

  static ChartAtlas plane(int n);
  static ChartAtlas sphere(int n, double switch_threshold = 2.0);

  Kind kind() const { return kind_; }
  int dimension() const { return n_; }
  int ambient_dimension() const { return kind_ == Kind::sphere ? n_ + 1 : n_; }
  int chart_count() const { return kind_ == Kind::sphere ? 2 : 1; }
  double switch_threshold() const { return switch_threshold_; }
  const std::string& chart_name(int chart) const;
  int chart_id(const std::string& name) const;

  void validate(const ChartPoint& p) const;

  /// Unit-sphere (or identity) embedding.
  template <class T>
  void embed(int chart, std::span<const T> x, T* out) const;

  /// Ambient image of a chart vector y at x.
  template <class T>
  void push_forward(int chart, std::span<const T> x, std::span<const T> y, T* out) const;

  /// Chart components of an ambient tangent vector v at x.
  template <class T>
  void pull_back(int chart, std::span<const T> x, std::span<const T> v, T* out) const;

  /// Coordinates of the same point in another chart.
  template <class T>
  void transition(int from, int to, std::span<const T> x, T* out) const;

  AmbientVector embed(const ChartPoint& p) const;
  AmbientVector push_forward(const TangentVector& v) const;
  ChartPoint from_ambient(const AmbientVector& X) const;
  Vector pull_back(const ChartPoint& p, const AmbientVector& v) const;

  ChartPoint to_chart(const ChartPoint& p, int chart) const;
  /// Jacobian of the transition map at p into `chart`.
  Matrix transition_jacobian(const ChartPoint& p, int chart) const;
  TangentVector to_chart(const TangentVector& v, int chart) const;
  Covector to_chart(const Covector& w, int chart) const;

  /// Re-expresses a point in the other chart once its norm exceeds the threshold.
  ChartPoint normalize(const ChartPoint& p) const;
  TangentVector normalize(const TangentVector& v) const;

  /// Uniform sample on the sphere, or on [-1,1]^n for the plane.
  ChartPoint sample(std::mt19937_64& rng) const;

  /// Euclidean distance between embedded points.
  double ambient_distance(const ChartPoint& a, const ChartPoint& b) const;

 private:
  ChartAtlas(Kind kind, int n, double threshold) : kind_(kind), n_(n), switch_threshold_(threshold) {}

  Kind kind_;
  int n_;
  double switch_threshold_;
};

// ---- templated kernels -----------------------------------------------------

template <class T>
void ChartAtlas::embed(int chart, std::span<const T> x, T* out) const {
  if (kind_ == Kind::plane) {
    for (int i = 0; i < n_; ++i) out[i] = x[i];
    return;
  }
  T s(0.0);
  for (int i = 0; i < n_; ++i) s += x[i] * x[i];
  T inv = T(1.0) / (s + 1.0);
  for (int i = 0; i < n_; ++i) out[i] = 2.0 * x[i] * inv;
  double sign = chart == 0 ? 1.0 : -1.0;
  out[n_] = sign * (s - 1.0) * inv;
}

template <class T>
void ChartAtlas::push_forward(int chart, std::span<const T> x, std::span<const T> y, T* out) const {
  if (kind_ == Kind::plane) {
    for (int i = 0; i < n_; ++i) out[i] = y[i];
    return;
  }
  T s(0.0);
  T uy(0.0);
  for (int i = 0; i < n_; ++i) {
    s += x[i] * x[i];
    uy += x[i] * y[i];
  }
  T inv = T(1.0) / (s + 1.0);
  T inv2 = inv * inv;
  for (int i = 0; i < n_; ++i) out[i] = 2.0 * y[i] * inv - 4.0 * x[i] * uy * inv2;
  double sign = chart == 0 ? 1.0 : -1.0;
  out[n_] = sign * 4.0 * uy * inv2;
}

template <class T>
void ChartAtlas::pull_back(int chart, std::span<const T> x, std::span<const T> v, T* out) const {
  if (kind_ == Kind::plane) {
    for (int i = 0; i < n_; ++i) out[i] = v[i];
    return;
  }
  Buf<T> X;
  embed<T>(chart, x, X.data());
  double sign = chart == 0 ? 1.0 : -1.0;
  T denom = 1.0 - sign * X[n_];
  T inv = T(1.0) / denom;
  T inv2 = inv * inv;
  for (int i = 0; i < n_; ++i) out[i] = v[i] * inv + sign * X[i] * v[n_] * inv2;
}

template <class T>
void ChartAtlas::transition(int from, int to, std::span<const T> x, T* out) const {
  if (from == to || kind_ == Kind::plane) {
    for (int i = 0; i < n_; ++i) out[i] = x[i];
    return;
  }
  // Inversion in the unit sphere maps one stereographic chart onto the other.
  T s(0.0);
  for (int i = 0; i < n_; ++i) s += x[i] * x[i];
  T inv = T(1.0) / s;
  for (int i = 0; i < n_; ++i) out[i] = x[i] * inv;
}

}  // namespace finsler

#pragma once

#include "finsler/metric.hpp"

namespace finsler {

struct SprayCoefficients {
  ChartPoint base;
  TangentVector direction;
  Vector G;
  Matrix N;  ///< N(i, j) = dG^i / dy^j
};

/// G^i = (1/4) g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}) at scalar type T.
/// x- and y-derivatives of F^2 both come from HyperDual<T> seeds. Returns
/// false when g is singular.
template <class T>
bool spray_kernel(const FinslerMetricModel& metric, int chart, std::span<const T> x, std::span<const T> y, T* G) {
  using H = HyperDual<T>;
  const int n = metric.dimension();
  std::array<T, kMaxDim * kMaxDim> g;
  fundamental_tensor_kernel<T>(metric, chart, x, y, g.data());

  Buf<H> xs;
  Buf<H> ys;
  auto f2 = [&]() {
    H f = metric.eval<H>(chart, std::span<const H>(xs.data(), n), std::span<const H>(ys.data(), n));
    return f * f;
  };
  for (int l = 0; l < n; ++l) {
    // sum_k y^k d_{x^k} d_{y^l} F^2
    for (int m = 0; m < n; ++m) {
      xs[m] = H(x[m], y[m], T(0.0), T(0.0));
      ys[m] = H(y[m], T(0.0), T(m == l ? 1.0 : 0.0), T(0.0));
    }
    T mixed = f2().d;
    // d_{x^l} F^2
    for (int m = 0; m < n; ++m) {
      xs[m] = H(x[m], T(m == l ? 1.0 : 0.0), T(0.0), T(0.0));
      ys[m] = H(y[m]);
    }
    T dx = f2().b;
    G[l] = 0.25 * (mixed - dx);
  }
  return solve_small<T>(n, g.data(), G);
}

/// G and N = dG/dy at (x, y).
SprayCoefficients spray(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y);

/// G only, at double precision; no argument checks (integrator hot path).
void spray_G(const FinslerMetricModel& metric, int chart, const double* x, const double* y, double* G);

/// Directional derivative of G along (dx, dy).
void spray_dG(const FinslerMetricModel& metric, int chart, const double* x, const double* y, const double* dx,
              const double* dy, double* G, double* dG);

}  // namespace finsler

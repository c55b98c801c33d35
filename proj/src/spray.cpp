#include "finsler/spray.hpp"

namespace finsler {

SprayCoefficients spray(const FinslerMetricModel& metric, const ChartPoint& x, const Vector& y) {
  metric.atlas().validate(x);
  if (y.size() != metric.dimension() || !y.allFinite()) throw DomainError("bad direction");
  if (y.isZero(0.0)) throw SingularityError("spray requested at y = 0");
  const int n = metric.dimension();
  using D = Dual<double>;
  SprayCoefficients out{x, {x, y}, Vector(n), Matrix(n, n)};
  Buf<D> xs;
  Buf<D> ys;
  Buf<D> G;
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m < n; ++m) {
      xs[m] = D(x.coords[m]);
      ys[m] = D(y[m], m == j ? 1.0 : 0.0);
    }
    if (!spray_kernel<D>(metric, x.chart, std::span<const D>(xs.data(), n), std::span<const D>(ys.data(), n),
                         G.data()))
      throw ConvexityError("singular fundamental tensor in spray");
    for (int i = 0; i < n; ++i) {
      out.G[i] = G[i].a;
      out.N(i, j) = G[i].b;
    }
  }
  return out;
}

void spray_G(const FinslerMetricModel& metric, int chart, const double* x, const double* y, double* G) {
  const int n = metric.dimension();
  if (!spray_kernel<double>(metric, chart, std::span<const double>(x, n), std::span<const double>(y, n), G))
    throw ConvexityError("singular fundamental tensor in spray");
}

void spray_dG(const FinslerMetricModel& metric, int chart, const double* x, const double* y, const double* dx,
              const double* dy, double* G, double* dG) {
  const int n = metric.dimension();
  using D = Dual<double>;
  Buf<D> xs;
  Buf<D> ys;
  Buf<D> out;
  for (int m = 0; m < n; ++m) {
    xs[m] = D(x[m], dx[m]);
    ys[m] = D(y[m], dy[m]);
  }
  if (!spray_kernel<D>(metric, chart, std::span<const D>(xs.data(), n), std::span<const D>(ys.data(), n),
                       out.data()))
    throw ConvexityError("singular fundamental tensor in spray");
  for (int i = 0; i < n; ++i) {
    G[i] = out[i].a;
    dG[i] = out[i].b;
  }
}

}  // namespace finsler

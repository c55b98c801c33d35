#include <doctest.h>

#include <cmath>
#include <numbers>

#include "finsler/analysis.hpp"
#include "finsler/curvature.hpp"
#include "helpers.hpp"

using namespace finsler;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const ChartAtlas> atlas_of(const ModelBundle& m) { return m.metric->atlas_ptr(); }

// Zermelo oracle for the rotation-wind Randers sphere (unit round h, wind
// a e_z x X): unit geodesics are gamma(t) = R_z(a t) beta(t) with beta a great
// circle, so d(x, c) is the root of angle(x, R_z(-a t) c) = t.
double zermelo_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& c, double a) {
  auto g = [&](double t) {
    Eigen::Vector3d rc = Eigen::AngleAxisd(-a * t, Eigen::Vector3d::UnitZ()) * c;
    return std::acos(std::clamp(x.dot(rc), -1.0, 1.0)) - t;
  };
  double lo = 0.0;
  double hi = kPi / (1.0 - a);
  for (int i = 0; i < 60; ++i) {
    double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Round-area measure of {x : dist(x) < r} by midpoint quadrature in spherical angles.
template <class Dist>
double sphere_set_area(const Dist& dist, double r, int m) {
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    double th = kPi * (i + 0.5) / m;
    for (int j = 0; j < 2 * m; ++j) {
      double ph = kPi * (j + 0.5) / m;
      Eigen::Vector3d x(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
      if (dist(x) < r) acc += std::sin(th);
    }
  }
  return acc * (kPi / m) * (kPi / m);
}

}  // namespace

TEST_CASE("Busemann-Hausdorff density") {
  ModelBundle round = round_sphere(3, 2.0);
  VolumeDensity bh = VolumeDensity::busemann_hausdorff(*round.metric);
  for (const auto& x : testing::sample_points(round.metric->atlas(), 5, 1))
    CHECK(bh(x) == doctest::Approx(std::sqrt(round.h->at(x).determinant())).epsilon(1e-6));

  // Translated unit disk: area pi, density 1.
  ModelBundle toy = testing::flat_toy();
  CHECK(bh_density(*toy.metric, ChartPoint{0, Vector::Zero(2)}) == doctest::Approx(1.0).epsilon(1e-10));

  // Chart covariance: sigma_1(x') |det J| = sigma_0(x).
  ModelBundle m = testing::randers_gradient(2);
  VolumeDensity s = VolumeDensity::busemann_hausdorff(*m.metric);
  ChartPoint x{0, (Vector(2) << 0.9, 0.7).finished()};
  ChartPoint x1 = m.metric->atlas().to_chart(x, 1);
  double J = std::abs(m.metric->atlas().transition_jacobian(x, 1).determinant());
  CHECK(s(x1) * J == doctest::Approx(s(x)).epsilon(1e-6));
}

TEST_CASE("scalar fields agree across charts") {
  ModelBundle m = testing::randers_rotation(2);
  std::mt19937_64 rng(2);
  AmbientPolynomial u = AmbientPolynomial::random(atlas_of(m), rng);
  RadialField r(m.metric, ChartPoint{0, (Vector(2) << 0.3, 0.1).finished()});
  ChartPoint x = r.point_at((Vector(2) << 1.0, 0.5).finished(), 1.7);
  ChartPoint x1 = m.metric->atlas().to_chart(x, 1 - x.chart);
  CHECK(std::abs(u.value(x) - u.value(x1)) < 1e-12);
  CHECK(std::abs(r.value(x) - r.value(x1)) < 1e-8);
  CHECK(r.value(x) == doctest::Approx(1.7).epsilon(1e-10));
  // Exact differential against the finite-difference default.
  FunctionField fd([&u](const ChartPoint& z) { return u.value(z); }, "fd");
  CHECK((u.differential(x) - fd.differential(x)).norm() < 1e-9);
}

TEST_CASE("gradients") {
  SUBCASE("Riemannian gradient is the h-gradient") {
    ModelBundle round = round_sphere(2, 1.5);
    std::mt19937_64 rng(3);
    AmbientPolynomial u = AmbientPolynomial::random(atlas_of(round), rng);
    for (const auto& x : testing::sample_points(round.metric->atlas(), 10, 4)) {
      Vector expected = round.h->at(x).ldlt().solve(u.differential(x));
      CHECK((gradient(*round.metric, u, x) - expected).norm() < 1e-8 * std::max(1.0, expected.norm()));
    }
  }
  SUBCASE("critical points give the zero vector") {
    ModelBundle m = testing::randers_rotation(2);
    FunctionField c([](const ChartPoint&) { return 3.0; }, "const", [](const ChartPoint& x) {
      return Vector(Vector::Zero(x.coords.size()));
    });
    CHECK(gradient(*m.metric, c, ChartPoint{0, Vector::Zero(2)}).isZero(0.0));
  }
  SUBCASE("reverse gradient duality") {
    ModelBundle m = testing::randers_gradient(2, 0.3);
    FinslerMetricModel rev = reverse_metric(*m.metric);
    std::mt19937_64 rng(5);
    auto u = std::make_shared<AmbientPolynomial>(AmbientPolynomial::random(atlas_of(m), rng));
    NegatedField neg(u);
    double worst = 0.0;
    for (const auto& x : testing::sample_points(m.metric->atlas(), 30, 6))
      worst = std::max(worst, (gradient(rev, *u, x) + gradient(*m.metric, neg, x)).norm());
    CHECK(worst < 1e-6);
  }
  SUBCASE("Randers dual norm equals h*(df) + df(W)") {
    for (const ModelBundle& m : {testing::randers_rotation(2), testing::randers_rotation(3)}) {
      std::mt19937_64 rng(7);
      AmbientPolynomial inv = AmbientPolynomial::coordinate(atlas_of(m), m.metric->dimension());
      AmbientPolynomial any = AmbientPolynomial::random(atlas_of(m), rng);
      for (const auto& x : testing::sample_points(m.metric->atlas(), 10, 8)) {
        for (const ScalarField* f : {static_cast<const ScalarField*>(&inv), static_cast<const ScalarField*>(&any)}) {
          Vector df = f->differential(x);
          double hstar = std::sqrt(df.dot(m.h->at(x).ldlt().solve(df)));
          double expected = hstar + df.dot(m.nav->W->at(x));
          CHECK(m.metric->F(x, gradient(*m.metric, *f, x)) == doctest::Approx(expected).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("Laplacian on round and Randers spheres") {
  ModelBundle round = round_sphere(2, 1.0);
  VolumeDensity sr = VolumeDensity::busemann_hausdorff(*round.metric);
  AmbientPolynomial z = AmbientPolynomial::coordinate(atlas_of(round), 2);
  for (const auto& x : testing::sample_points(round.metric->atlas(), 8, 9))
    CHECK(std::abs(laplacian(*round.metric, sr, z, x) + 2.0 * z.value(x)) < 1e-4);

  // Chart invariance.
  ChartPoint x{0, (Vector(2) << 0.8, -0.9).finished()};
  ChartPoint x1 = round.metric->atlas().to_chart(x, 1);
  CHECK(std::abs(laplacian(*round.metric, sr, z, x) - laplacian(*round.metric, sr, z, x1)) < 1e-5);

  // u = X_3 is critical at the chart origin (the south pole).
  CHECK_THROWS_AS(laplacian(*round.metric, sr, z, ChartPoint{0, Vector::Zero(2)}), CriticalPointError);

  for (const ModelBundle& m : {round_sphere(2, 1.0), testing::randers_rotation(2)}) {
    CAPTURE(m.metric->name());
    VolumeDensity s = VolumeDensity::busemann_hausdorff(*m.metric);
    RadialField r(m.metric, ChartPoint{0, (Vector(2) << 0.4, -0.2).finished()});
    double worst = 0.0;
    for (double t : {0.3, 0.9, 1.5, 2.1, 2.8}) {
      ChartPoint q = r.point_at((Vector(2) << -0.3, 1.0).finished(), t);
      worst = std::max(worst, std::abs(laplacian(*m.metric, s, r, q) - 1.0 / std::tan(t)));
    }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("Laplacian nonlinearity and reverse duality") {
  std::mt19937_64 rng(10);
  ModelBundle m = testing::randers_gradient(2, 0.3);
  FinslerMetricModel rev = reverse_metric(*m.metric);
  VolumeDensity s = VolumeDensity::busemann_hausdorff(*m.metric);
  VolumeDensity srev = VolumeDensity::busemann_hausdorff(rev);
  auto u = std::make_shared<AmbientPolynomial>(AmbientPolynomial::random(atlas_of(m), rng));
  NegatedField neg(u);
  double witness = 0.0;
  double duality = 0.0;
  for (const auto& x : testing::sample_points(m.metric->atlas(), 10, 11)) {
    double lneg = laplacian(*m.metric, s, neg, x);
    witness = std::max(witness, std::abs(lneg + laplacian(*m.metric, s, *u, x)));
    duality = std::max(duality, std::abs(lneg + laplacian(rev, srev, *u, x)));
  }
  CHECK(witness > 1e-3);
  CHECK(duality < 1e-5);

  ModelBundle round = round_sphere(2, 1.0);
  VolumeDensity sr = VolumeDensity::busemann_hausdorff(*round.metric);
  auto v = std::make_shared<AmbientPolynomial>(AmbientPolynomial::random(atlas_of(round), rng));
  NegatedField nv(v);
  for (const auto& x : testing::sample_points(round.metric->atlas(), 5, 12))
    CHECK(std::abs(laplacian(*round.metric, sr, nv, x) + laplacian(*round.metric, sr, *v, x)) < 1e-6);
}

TEST_CASE("integration over the sphere") {
  ModelBundle round = round_sphere(2, 1.0);
  VolumeDensity sr = VolumeDensity::busemann_hausdorff(*round.metric);
  ManifoldQuadrature q = chart_quadrature(round.metric->atlas(), sr);
  CHECK(q.volume() == doctest::Approx(4 * kPi).epsilon(1e-4));
  // int X_3^2 = 4 pi / 3.
  AmbientPolynomial z = AmbientPolynomial::coordinate(atlas_of(round), 2);
  CHECK(q.integrate([&](const ChartPoint& x) { return std::pow(z.value(x), 2); }) ==
        doctest::Approx(4 * kPi / 3).epsilon(1e-8));

  ChartPoint p{0, (Vector(2) << 0.2, 0.5).finished()};
  PolarQuadrature polar(*round.metric, sr, p, {kPi});
  CHECK(std::abs(polar.integrate(0, [](const PolarQuadrature::Node& n) { return -std::cos(n.r); })) < 1e-6);
  CHECK(polar.ball_volume(0) == doctest::Approx(4 * kPi).epsilon(1e-6));

  ModelBundle m = testing::randers_rotation(2);
  VolumeDensity s = VolumeDensity::busemann_hausdorff(*m.metric);
  PolarQuadrature pm(*m.metric, s, p, {kPi});
  double vol = pm.ball_volume(0);
  CHECK(vol == doctest::Approx(chart_quadrature(m.metric->atlas(), s).volume()).epsilon(1e-6));
  CHECK(std::abs(pm.integrate(0, [](const PolarQuadrature::Node& n) { return -std::cos(n.r); })) < 1e-4 * vol);

  // Polar density factorisation sigma_p = C(u) sin(r).
  double worst = 0.0;
  for (const auto& ray : pm.rays()) {
    double c0 = ray.nodes.front().density / std::sin(ray.nodes.front().r);
    for (const auto& node : ray.nodes) worst = std::max(worst, std::abs(node.density / std::sin(node.r) - c0) / c0);
  }
  CHECK(worst < 1e-3);

  CHECK_THROWS_AS(chart_quadrature(testing::flat_toy().metric->atlas(), sr), DomainError);
}

TEST_CASE("ball volumes against the Zermelo oracle") {
  const double a = 0.3;
  ModelBundle m = testing::randers_rotation(2, a);
  VolumeDensity s = VolumeDensity::busemann_hausdorff(*m.metric);
  ChartPoint c{0, (Vector(2) << 0.5, -0.4).finished()};
  Eigen::Vector3d C = m.metric->atlas().embed(c);
  const double r = 1.2;
  double fwd = ball_volume(*m.metric, s, c, r, BallSide::forward);
  double bwd = ball_volume(*m.metric, s, c, r, BallSide::backward);
  double fwd_oracle = sphere_set_area([&](const Eigen::Vector3d& x) { return zermelo_distance(C, x, a); }, r, 300);
  double bwd_oracle = sphere_set_area([&](const Eigen::Vector3d& x) { return zermelo_distance(x, C, a); }, r, 300);
  CHECK(fwd == doctest::Approx(fwd_oracle).epsilon(1e-2));
  CHECK(bwd == doctest::Approx(bwd_oracle).epsilon(1e-2));
  // Backward ball of the reverse metric is the forward ball of the original.
  FinslerMetricModel rev = reverse_metric(*m.metric);
  CHECK(ball_volume(rev, s, c, r, BallSide::backward) == doctest::Approx(fwd).epsilon(1e-2));

  ModelBundle round = round_sphere(2, 1.0);
  VolumeDensity sr = VolumeDensity::busemann_hausdorff(*round.metric);
  CHECK(ball_volume(*round.metric, sr, c, kPi, BallSide::forward) == doctest::Approx(4 * kPi).epsilon(1e-2));
  CHECK(small_ball_ratio(*m.metric, s, c) == doctest::Approx(1.0).epsilon(2e-2));
  CHECK(small_ball_ratio(*testing::randers_gradient(2, 0.3).metric,
                         VolumeDensity::busemann_hausdorff(*testing::randers_gradient(2, 0.3).metric), c) ==
        doctest::Approx(1.0).epsilon(2e-2));
}

TEST_CASE("Bishop-Gromov ratios") {
  ModelBundle round = round_sphere(2, 1.0);
  VolumeDensity sr = VolumeDensity::busemann_hausdorff(*round.metric);
  ChartPoint c{1, (Vector(2) << 0.1, 0.3).finished()};
  auto ratios = bishop_gromov_ratio(*round.metric, sr, c, {0.5, 1.0, 2.0}, 2, 1);
  for (double v : ratios) CHECK(v == doctest::Approx(ratios.front()).epsilon(2e-2));

  ModelBundle m = testing::randers_rotation(2);
  VolumeDensity s = VolumeDensity::busemann_hausdorff(*m.metric);
  for (BallSide side : {BallSide::forward, BallSide::backward}) {
    auto rs = bishop_gromov_ratio(*m.metric, s, c, {0.3, 0.8, 1.6, 2.4, kPi}, 2, 1, side);
    for (size_t i = 1; i < rs.size(); ++i) CHECK(rs[i] <= rs[i - 1] * 1.02);
    for (double v : rs) CHECK(v == doctest::Approx(rs.front()).epsilon(2e-2));
  }
  CHECK(model_ball_profile(1.0, 3, 0) == doctest::Approx(1.0 / 3));
  CHECK(model_ball_profile(kPi, 2, 1) == doctest::Approx(2.0));
  CHECK_THROWS_AS(bishop_gromov_ratio(*round.metric, sr, c, {1.0, 0.5}, 2, 1), DomainError);
}

TEST_CASE("Rayleigh quotients and eigen residuals") {
  ModelBundle round = round_sphere(2, 1.0);
  VolumeDensity sr = VolumeDensity::busemann_hausdorff(*round.metric);
  ManifoldQuadrature qr = chart_quadrature(round.metric->atlas(), sr);
  AmbientPolynomial z = AmbientPolynomial::coordinate(atlas_of(round), 2);
  RayleighResult rz = rayleigh_quotient(*round.metric, qr, z);
  CHECK(rz.quotient == doctest::Approx(2.0).epsilon(1e-3));
  CHECK_FALSE(rz.mean_subtracted);
  RayleighResult shifted = rayleigh_quotient(*round.metric, qr, z.shifted(1.0));
  CHECK(shifted.mean_subtracted);
  CHECK(shifted.quotient == doctest::Approx(2.0).epsilon(1e-3));
  FunctionField zero([](const ChartPoint&) { return 0.0; }, "zero");
  CHECK_THROWS_AS(rayleigh_quotient(*round.metric, qr, zero), DegenerateFunctionError);

  ModelBundle m = testing::randers_rotation(2);
  VolumeDensity s = VolumeDensity::busemann_hausdorff(*m.metric);
  ManifoldQuadrature q = chart_quadrature(m.metric->atlas(), s);
  CHECK(rayleigh_quotient(*m.metric, q, AmbientPolynomial::coordinate(atlas_of(m), 2)).quotient ==
        doctest::Approx(2.0).epsilon(1e-3));
  std::mt19937_64 rng(13);
  for (int i = 0; i < 5; ++i)
    CHECK(rayleigh_quotient(*m.metric, q, AmbientPolynomial::random(atlas_of(m), rng)).quotient >= 2.0 - 1e-3);

  ChartPoint p{0, (Vector(2) << -0.3, 0.6).finished()};
  PolarQuadrature pq(*m.metric, s, p, {kPi});
  CHECK(rayleigh_quotient_radial(*m.metric, pq, 0, RadialProfile::cosine(1)).quotient ==
        doctest::Approx(2.0).epsilon(1e-2));

  RadialField ft(round.metric, p, RadialProfile::cosine(1));
  std::vector<ChartPoint> xs;
  for (double t : {0.3, 1.0, 1.7, 2.4, 2.8}) xs.push_back(ft.point_at((Vector(2) << 0.6, 0.8).finished(), t));
  CHECK(eigen_residual(*round.metric, sr, ft, 2.0, xs) <= 1e-3);
  CHECK(eigen_residual(*round.metric, sr, ft, 2.5, xs) > 0.1);
}

TEST_CASE("radial Hessian, Bochner and Riccati identities") {
  for (const ModelBundle& m : {testing::randers_rotation(2), testing::randers_gradient(2, 0.3)}) {
    CAPTURE(m.metric->name());
    const bool model = m.metric->traits().zero_s_curvature;
    VolumeDensity s = VolumeDensity::busemann_hausdorff(*m.metric);
    ChartPoint p{0, (Vector(2) << 0.2, 0.1).finished()};
    Vector xi = (Vector(2) << 1.0, -0.4).finished();
    RadialFrame frame(*m.metric, p, xi);
    RadialField r(m.metric, p);
    auto trace_at = [&](double t) {
      RadialFrame::Sample smp = frame.at(t);
      r.point_at(xi, t);
      return hessian_second_difference(r, smp.x, smp.frame).trace();
    };
    for (double t : {0.6, 1.3}) {
      RadialFrame::Sample smp = frame.at(t);
      ChartPoint x = r.point_at(xi, t);
      CHECK((smp.x.coords - x.coords).norm() < 1e-9);
      // Transport keeps the frame g-orthonormal and transverse.
      Matrix g = fundamental_tensor(*m.metric, smp.x, smp.velocity).matrix;
      CHECK(std::abs(smp.frame[0].dot(g * smp.frame[0]) - 1.0) < 1e-9);
      CHECK(std::abs(smp.frame[0].dot(g * smp.velocity)) < 1e-9);

      Matrix H = hessian_second_difference(r, x, smp.frame);
      Matrix Hc = hessian_connection(r, x, smp.frame);
      CHECK((H - Hc).norm() < 1e-6);
      if (model) CHECK(std::abs(H(0, 0) - 1.0 / std::tan(t)) < 1e-3);

      double lap = laplacian(*m.metric, s, r, x);
      double S = s_curvature(*m.metric, s, x, smp.velocity);
      CHECK(std::abs(lap - (H.trace() - S)) < 1e-3);

      const double d = 1e-2;
      double dtr = (trace_at(t - 2 * d) - 8 * trace_at(t - d) + 8 * trace_at(t + d) - trace_at(t + 2 * d)) / (12 * d);
      double ric = ricci(*m.metric, x, smp.velocity);
      CHECK(std::abs(dtr + ric + H.squaredNorm()) < 1e-3);
    }
  }
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "finsler/geodesy.hpp"
#include "finsler/spray.hpp"
#include "helpers.hpp"

using namespace finsler;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("great circles reach the antipode at time pi") {
  ModelBundle round = round_sphere(2, 1.0);
  const ChartAtlas& atlas = round.metric->atlas();
  std::mt19937_64 rng(1);
  for (const auto& p : testing::sample_points(atlas, 10, 2)) {
    Vector y = testing::random_vector(rng, 2);
    y /= round.h->norm(p, y);
    GeodesicPath path = integrate_geodesic(*round.metric, p, y, kPi);
    REQUIRE(path.termination == Termination::completed);
    CHECK((atlas.embed(path.points.back()) + atlas.embed(p)).norm() < 1e-6);
    CHECK(path.f_length == doctest::Approx(kPi).epsilon(1e-9));
  }
}

TEST_CASE("flat Minkowski geodesics are straight lines") {
  ModelBundle toy = testing::flat_toy();
  ChartPoint x0{0, (Vector(2) << 0.3, -1.0).finished()};
  Vector y0 = (Vector(2) << 0.7, 0.4).finished();
  GeodesicPath path = integrate_geodesic(*toy.metric, x0, y0, 3.0);
  for (size_t i = 0; i < path.times.size(); ++i) {
    CHECK((path.points[i].coords - (x0.coords + path.times[i] * y0)).norm() < 1e-12);
  }
  CHECK(path.f_length == doctest::Approx(3.0 * eval_F(*toy.metric, x0, y0)).epsilon(1e-12));
}

TEST_CASE("F-speed is conserved, across chart switches too") {
  for (const ModelBundle& m : {bao_shen_metric(2.0), testing::randers_rotation(2), testing::randers_gradient(3, 0.3)}) {
    const FinslerMetricModel& F = *m.metric;
    const int n = F.dimension();
    CAPTURE(F.name());
    std::mt19937_64 rng(3);
    int switches = 0;
    for (const auto& p : testing::sample_points(F.atlas(), 5, 4)) {
      Vector y = testing::random_vector(rng, n);
      const double f0 = F.F(p, y);
      GeodesicPath path = integrate_geodesic(F, p, y, kPi / f0 * 1.5);
      REQUIRE(path.termination == Termination::completed);
      double drift = 0.0;
      for (size_t i = 0; i < path.points.size(); ++i)
        drift = std::max(drift, std::abs(F.F(path.points[i], path.velocities[i]) - f0) / f0);
      CHECK(drift < 1e-6);
      // f_length against trapezoid-free check: speed is constant so length = F0 T.
      CHECK(path.f_length == doctest::Approx(f0 * path.times.back()).epsilon(1e-6));
      switches += path.chart_switches;
    }
    CHECK(switches > 0);
  }
}

TEST_CASE("path CSV export") {
  ModelBundle round = round_sphere(2, 1.0);
  GeodesicPath path = integrate_geodesic(*round.metric, ChartPoint{0, Vector::Zero(2)}, Vector::Unit(2, 0), 1.0);
  std::ostringstream out;
  write_path_csv(*round.metric, path, out);
  std::string text = out.str();
  CHECK(text.rfind("t,chart,x1,x2,y1,y2,F\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(path.times.size()) + 1);
}

TEST_CASE("reverse of a forward geodesic solves the reverse spray") {
  ModelBundle m = testing::randers_rotation(2);
  FinslerMetricModel rev = reverse_metric(*m.metric);
  GeodesicPath path = integrate_geodesic(*m.metric, ChartPoint{0, (Vector(2) << 0.4, 0.1).finished()},
                                         (Vector(2) << 0.2, 0.9).finished(), 2.0);
  double worst = 0.0;
  for (size_t i = 0; i < path.points.size(); ++i) {
    // beta(t) = gamma(T - t): beta'' = gamma'' = -2 G(gamma, gamma'), beta' = -gamma'.
    Vector G = spray(*m.metric, path.points[i], path.velocities[i]).G;
    Vector Grev = spray(rev, path.points[i], Vector(-path.velocities[i])).G;
    worst = std::max(worst, (Grev - G).norm());
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("exp map Jacobian matches finite differences") {
  ModelBundle m = bao_shen_metric(2.0);
  ChartPoint p{0, (Vector(3) << 0.2, -0.3, 0.1).finished()};
  Vector v = (Vector(3) << 1.2, 0.5, -0.8).finished();
  ExpResult e = exp_map(*m.metric, p, v);
  const double h = 1e-5;
  for (int a = 0; a < 3; ++a) {
    ExpResult ep = exp_map(*m.metric, p, Vector(v + h * Vector::Unit(3, a)), false);
    ExpResult em = exp_map(*m.metric, p, Vector(v - h * Vector::Unit(3, a)), false);
    REQUIRE(ep.point.chart == e.point.chart);
    REQUIRE(em.point.chart == e.point.chart);
    Vector fd = (ep.point.coords - em.point.coords) / (2 * h);
    CHECK((fd - e.jacobian.col(a)).norm() < 1e-6);
  }
}

TEST_CASE("distances on the round sphere") {
  ModelBundle round = round_sphere(2, 1.0);
  ChartPoint p{0, (Vector(2) << 0.3, -0.2).finished()};
  ChartPoint q = round.metric->atlas().from_ambient(-round.metric->atlas().embed(p));
  DistanceResult d = forward_distance(*round.metric, p, q);
  CHECK(d.distance == doctest::Approx(kPi).epsilon(5e-3));
  CHECK(d.arrival_gap <= 1e-4);
  CHECK(forward_distance(*round.metric, p, p).distance == 0.0);

  ModelBundle small = round_sphere(2, 4.0);
  DistanceResult ds = forward_distance(*small.metric, p, q);
  CHECK(ds.distance == doctest::Approx(kPi / 2).epsilon(1e-6));
  // Generic pair against the spherical law.
  ChartPoint a{1, (Vector(2) << 0.5, 0.4).finished()};
  double ang = std::acos(round.metric->atlas().embed(p).dot(round.metric->atlas().embed(a)));
  CHECK(forward_distance(*round.metric, p, a).distance == doctest::Approx(ang).epsilon(1e-9));
}

TEST_CASE("nonsymmetric distances and reverse duality") {
  ModelBundle m = testing::randers_rotation(2);
  FinslerMetricModel rev = reverse_metric(*m.metric);
  ChartPoint p{0, (Vector(2) << 0.6, 0.1).finished()};
  ChartPoint q{0, (Vector(2) << -0.3, 0.7).finished()};
  double pq = forward_distance(*m.metric, p, q).distance;
  double qp = forward_distance(*m.metric, q, p).distance;
  CHECK(std::abs(pq - qp) > 1e-3);
  CHECK(std::abs(forward_distance(rev, p, q).distance - qp) < 1e-5);
  CHECK(std::abs(forward_distance(rev, q, p).distance - pq) < 1e-5);
}

TEST_CASE("directed triangle inequality") {
  ModelBundle m = testing::randers_rotation(2);
  auto pts = testing::sample_points(m.metric->atlas(), 60, 5);
  ShootingOptions opt;
  for (int i = 0; i < 20; ++i) {
    const ChartPoint &p = pts[3 * i], &x = pts[3 * i + 1], &q = pts[3 * i + 2];
    double pq = forward_distance(*m.metric, p, q).distance;
    double px = forward_distance(*m.metric, p, x).distance;
    double xq = forward_distance(*m.metric, x, q).distance;
    CHECK(pq <= px + xq + 2 * opt.shoot_tol);
  }
}

TEST_CASE("diameters and the segment identity") {
  ModelBundle small = round_sphere(2, 4.0);
  DiameterResult d = diameter_estimate(*small.metric, 2, 7);
  CHECK(d.diameter == doctest::Approx(kPi / 2).epsilon(1e-2));

  ModelBundle round = round_sphere(2, 1.0);
  ChartPoint p{0, Vector::Zero(2)};
  ChartPoint q{1, Vector::Zero(2)};
  auto xs = testing::sample_points(round.metric->atlas(), 20, 8);
  CHECK(segment_identity_check(*round.metric, p, q, xs, kPi) <= 2e-2);
  CHECK(segment_identity_check(*round.metric, p, q, {p}, forward_distance(*round.metric, p, q).distance) == 0.0);

  ModelBundle m = testing::randers_rotation(2);
  DiameterResult dm = diameter_estimate(*m.metric, 2, 9);
  CHECK(dm.diameter == doctest::Approx(kPi).epsilon(1e-2));
  CHECK(segment_identity_check(*m.metric, p, q, testing::sample_points(m.metric->atlas(), 6, 10), kPi) <= 2e-2);
}

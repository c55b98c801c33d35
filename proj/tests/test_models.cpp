#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"

using namespace finsler;

TEST_CASE("zero wind reduces to the Riemannian norm") {
  ModelBundle still = make_model({{"model", "randers-nav"}, {"n", 3}, {"wind", "none"}});
  ModelBundle round = round_sphere(3, 1.0);
  std::mt19937_64 rng(3);
  for (const auto& p : testing::sample_points(round.metric->atlas(), 100, 4)) {
    Vector y = testing::random_vector(rng, 3);
    double hn = round.h->norm(p, y);
    CHECK(std::abs(eval_F(*still.metric, p, y) - hn) <= 1e-12 * hn);
  }
  CHECK(still.metric->traits().riemannian);
}

TEST_CASE("flat toy indicatrix is the translated unit circle") {
  ModelBundle toy = testing::flat_toy();
  ChartPoint x{0, Vector::Zero(2)};
  for (int i = 0; i < 16; ++i) {
    double t = 2.0 * std::numbers::pi * i / 16.0;
    Vector y = (Vector(2) << 0.5 + std::cos(t), std::sin(t)).finished();
    CHECK(std::abs(eval_F(*toy.metric, x, y) - 1.0) < 1e-8);
  }
}

TEST_CASE("Zermelo translation on navigation spheres") {
  for (const ModelBundle& m : {testing::randers_rotation(2), testing::randers_rotation(3), testing::randers_gradient(3)}) {
    const int n = m.metric->dimension();
    std::mt19937_64 rng(5);
    for (const auto& p : testing::sample_points(m.metric->atlas(), 100, 6)) {
      Vector u = testing::random_vector(rng, n);
      u /= m.h->norm(p, u);
      Vector y = u + m.nav->W->at(p);
      CHECK(std::abs(eval_F(*m.metric, p, y) - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("navigation metrics are positive") {
  ModelBundle m = testing::randers_rotation(3, 0.9);
  std::mt19937_64 rng(8);
  for (const auto& p : testing::sample_points(m.metric->atlas(), 500, 9)) {
    CHECK(eval_F(*m.metric, p, testing::random_vector(rng, 3)) > 0.0);
  }
}

TEST_CASE("wind of unit length is rejected") {
  CHECK_THROWS_AS(make_model({{"model", "randers-nav"}, {"a", 1.0}}), ConfigError);
  ModelBundle base = round_sphere(2, 1.0);
  NavigationData nav{base.h, rotation_killing_field(*base.h, (AmbientVector(3) << 0, 0, 1).finished(), 1.2)};
  CHECK_THROWS_AS(randers_from_navigation(nav), NavigationDomainError);
  // On S^2(1/2) the same ambient amplitude has half the h-length.
  ModelBundle small = round_sphere(2, 4.0);
  NavigationData ok{small.h, rotation_killing_field(*small.h, (AmbientVector(3) << 0, 0, 1).finished(), 1.2)};
  CHECK(ok.sup_wind_norm() == doctest::Approx(0.6));
  CHECK_NOTHROW(randers_from_navigation(ok));
}

TEST_CASE("rotation fields fix the poles") {
  ModelBundle base = round_sphere(2, 1.0);
  auto W = rotation_killing_field(*base.h, (AmbientVector(3) << 0, 0, 1).finished(), 0.3);
  const ChartAtlas& atlas = base.h->atlas();
  CHECK(W->at(atlas.from_ambient((AmbientVector(3) << 0, 0, 1).finished())).norm() < 1e-12);
  CHECK(W->at(atlas.from_ambient((AmbientVector(3) << 0, 0, -1).finished())).norm() < 1e-12);
  auto zero = rotation_killing_field(*base.h, (AmbientVector(3) << 0, 0, 1).finished(), 0.0);
  for (const auto& p : testing::sample_points(atlas, 20, 10)) CHECK(zero->at(p).norm() == 0.0);

  // Among random samples, only points close to the poles have vanishing wind.
  for (const auto& p : testing::sample_points(atlas, 1000, 11)) {
    double nw = W->at(p).norm();
    AmbientVector X = atlas.embed(p);
    double to_pole = std::min((X - (AmbientVector(3) << 0, 0, 1).finished()).norm(),
                              (X + (AmbientVector(3) << 0, 0, 1).finished()).norm());
    if (nw < 1e-10) CHECK(to_pole < 1e-5);
  }
}

TEST_CASE("Killing residuals") {
  ModelBundle base = round_sphere(2, 1.0);
  auto pts = testing::sample_points(base.h->atlas(), 50, 13);
  auto rot = rotation_killing_field(*base.h, (AmbientVector(3) << 0.3, -0.4, 0.866).finished(), 0.7);
  CHECK(killing_residual(*base.h, *rot, pts) <= 1e-7);
  AmbientVectorField grad(base.h->atlas_ptr(), AmbientVectorField::Kind::gradient,
                          (AmbientVector(3) << 0, 0, 1).finished(), 0.5);
  CHECK(killing_residual(*base.h, grad, pts) > 0.1);
  AmbientVectorField zero(base.h->atlas_ptr(), AmbientVectorField::Kind::zero, AmbientVector(), 0.0);
  CHECK(killing_residual(*base.h, zero, pts) == 0.0);

  ModelBundle s3 = round_sphere(3, 2.0);
  auto rot3 = rotation_killing_field(*s3.h, (AmbientVector(3) << 0, 0, 1).finished(), 0.5);
  CHECK(killing_residual(*s3.h, *rot3, testing::sample_points(s3.h->atlas(), 50, 14)) <= 1e-7);
}

TEST_CASE("Killing family scalings compose") {
  ModelBundle m = testing::randers_rotation(2, 0.5);
  const NavigationData& nav = *m.nav;
  NavigationData zero = killing_family(nav, 0.0);
  ModelBundle z = randers_from_navigation(zero);
  std::mt19937_64 rng(15);
  auto pts = testing::sample_points(m.metric->atlas(), 30, 16);
  for (const auto& p : pts) {
    Vector y = testing::random_vector(rng, 2);
    CHECK(std::abs(eval_F(*z.metric, p, y) - m.h->norm(p, y)) < 1e-12 * m.h->norm(p, y));
  }
  ModelBundle ab = randers_from_navigation(killing_family(killing_family(nav, 1.5), 0.8));
  ModelBundle direct = randers_from_navigation(killing_family(nav, 1.2));
  for (const auto& p : pts) {
    Vector y = testing::random_vector(rng, 2);
    CHECK(eval_F(*ab.metric, p, y) == doctest::Approx(eval_F(*direct.metric, p, y)).epsilon(1e-14));
  }
  for (double a : {0.25, 1.0, 1.9}) {
    NavigationData fam = killing_family(nav, a);
    CHECK(killing_residual(*fam.h, *fam.W, pts) <= 1e-7);
  }
  CHECK_THROWS_AS(killing_family(nav, 2.0), NavigationDomainError);
}

TEST_CASE("Bao-Shen family") {
  CHECK_THROWS_AS(bao_shen_metric(0.5), ParameterError);
  ModelBundle one = bao_shen_metric(1.0);
  ModelBundle round = round_sphere(3, 1.0);
  std::mt19937_64 rng(17);
  for (const auto& p : testing::sample_points(round.metric->atlas(), 100, 18)) {
    Vector y = testing::random_vector(rng, 3);
    CHECK(std::abs(eval_F(*one.metric, p, y) - eval_F(*round.metric, p, y)) < 1e-10);
  }
  ModelBundle two = bao_shen_metric(2.0);
  auto pts = testing::sample_points(two.metric->atlas(), 30, 19);
  CHECK(structure_equation_residual(*two.bao_shen, pts) <= 1e-6);
  // The opposite orientation fails the first structure equation.
  BaoShenFunction flipped(two.metric->atlas_ptr(), 2.0, -two.bao_shen->zeta1_sign());
  CHECK(structure_equation_residual(flipped, pts) > 0.1);
}

TEST_CASE("registry") {
  CHECK(model_registry().size() == 4);
  CHECK_THROWS_AS(make_model({{"model", "torus"}}), ConfigError);
  CHECK_THROWS_AS(make_model({{"model", "round"}, {"radius", 2}}), ConfigError);
  CHECK_THROWS_AS(make_model({{"model", "round"}, {"k", "big"}}), ConfigError);
  CHECK_THROWS_AS(make_model({{"model", "round"}, {"k", -1.0}}), ConfigError);
  ModelBundle r = make_model({{"model", "round"}, {"n", 3}, {"k", 4.0}});
  CHECK(r.metric->dimension() == 3);
  CHECK(*r.metric->traits().flag_curvature == 4.0);
  ModelBundle g = testing::randers_gradient(2);
  CHECK_FALSE(g.metric->traits().flag_curvature.has_value());
  CHECK_FALSE(g.metric->traits().zero_s_curvature);
}

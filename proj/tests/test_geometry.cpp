#include <catch2/catch_amalgamated.hpp>

#include "trudinger/geometry.hpp"

#include <cmath>

using namespace trudinger;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("unit sphere areas match the classical values")
{
   CHECK(unit_sphere_area(1) == Catch::Approx(2.0).epsilon(1e-14));
   CHECK(unit_sphere_area(2) == Catch::Approx(2.0 * kPi).epsilon(1e-14));
   CHECK(unit_sphere_area(3) == Catch::Approx(4.0 * kPi).epsilon(1e-14));
   CHECK(unit_sphere_area(4) == Catch::Approx(2.0 * kPi * kPi).epsilon(1e-14));
   CHECK_THROWS_AS(unit_sphere_area(0), std::invalid_argument);
}

TEST_CASE("area_factor evaluates each profile")
{
   const auto e3 = ModelManifold::euclidean(3);
   CHECK(area_factor(e3, 2.0) == Catch::Approx(4.0).epsilon(1e-15));

   const auto p3 = ModelManifold::polynomial(3, 1.0, 3.0);
   CHECK(area_factor(p3, 2.0) == Catch::Approx(4.0).epsilon(1e-15));

   const auto c = ModelManifold::custom(2, {0.5, 1.0, 2.0}, {0.25, 1.0, 4.0});
   CHECK(area_factor(c, 1.0) == 1.0);   // tabulated node, exact
   CHECK(area_factor(c, 0.5) == 0.25);
   CHECK(area_factor(c, 1.5) == Catch::Approx(2.5).epsilon(1e-15)); // linear between nodes

   const auto pin = ModelManifold::polynomial(3, 2.0, 2.0, 1.0);
   CHECK_THROWS_AS(area_factor(pin, 0.5), std::domain_error);
   CHECK_THROWS_AS(area_factor(c, 3.0), std::domain_error);
}

TEST_CASE("pole ball volumes")
{
   const auto e3 = ModelManifold::euclidean(3);
   CHECK(ball_volume_at_pole(e3, 1.0) == Catch::Approx(4.0 * kPi / 3.0).epsilon(1e-13));

   const auto e1 = ModelManifold::euclidean(1);
   CHECK(ball_volume_at_pole(e1, 1.0) == Catch::Approx(2.0).epsilon(1e-14));

   // S(r) = r in a 3-dimensional model: omega_2 * int_0^2 rho drho = 4 pi * 2
   const auto p = ModelManifold::polynomial(3, 1.0, 2.0);
   CHECK(ball_volume_at_pole(p, 2.0) == Catch::Approx(8.0 * kPi).epsilon(1e-13));
}

TEST_CASE("ball volume is increasing and additive over shells")
{
   const auto m = ModelManifold::polynomial(3, 2.5, 1.7);
   double prev = 0.0;
   for (double r = 0.5; r < 6.0; r += 0.5)
   {
      const double v = ball_volume_at_pole(m, r);
      CHECK(v > prev);
      prev = v;
   }
   const double v1 = ball_volume_at_pole(m, 1.25);
   const double v2 = ball_volume_at_pole(m, 4.75);
   CHECK(v2 - v1 == Catch::Approx(shell_volume(m, 1.25, 4.75)).epsilon(1e-12));
}

TEST_CASE("off-pole Euclidean volumes are translation invariant")
{
   const auto e2 = ModelManifold::euclidean(2);
   CHECK(off_pole_ball_volume_euclidean(e2, 0.0, 1.0) == Catch::Approx(kPi).epsilon(1e-14));
   CHECK(off_pole_ball_volume_euclidean(e2, 7.3, 1.0) == Catch::Approx(kPi).epsilon(1e-14));

   const auto e3 = ModelManifold::euclidean(3);
   CHECK(off_pole_ball_volume_euclidean(e3, 2.0, 2.0)
         == Catch::Approx(32.0 * kPi / 3.0).epsilon(1e-14));

   const auto e1 = ModelManifold::euclidean(1);
   CHECK(off_pole_ball_volume_euclidean(e1, 5.0, 0.5) == Catch::Approx(1.0).epsilon(1e-14));

   const auto p = ModelManifold::polynomial(3, 1.0, 2.0);
   CHECK_THROWS_AS(off_pole_ball_volume_euclidean(p, 0.0, 1.0), std::runtime_error);
}

TEST_CASE("doubling ratios")
{
   const auto e3 = ModelManifold::euclidean(3);
   CHECK(doubling_ratio(e3, 1.0, 2.0) == Catch::Approx(8.0).epsilon(1e-13));
   CHECK(doubling_ratio(e3, 1.7, 1.7) == Catch::Approx(1.0).epsilon(1e-15));

   const auto p = ModelManifold::polynomial(3, 1.0, 2.0);
   CHECK(doubling_ratio(p, 1.0, 2.0) == Catch::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("polynomial profiles double exactly like theta^alpha")
{
   const auto m = ModelManifold::polynomial(4, 3.0, 2.5);
   for (double r = 0.25; r < 4.0; r *= 2.0)
   {
      for (double th : {1.5, 2.0, 7.0})
      {
         CHECK(doubling_ratio(m, r, th * r)
               == Catch::Approx(std::pow(th, 2.5)).epsilon(1e-12));
      }
   }
}

TEST_CASE("Euclidean equals polynomial with alpha = n, C = 1")
{
   const auto e = ModelManifold::euclidean(3);
   const auto p = ModelManifold::polynomial(3, 1.0, 3.0, 0.0);
   for (double r : {0.3, 1.0, 2.7, 9.0})
   {
      CHECK(area_factor(e, r) == Catch::Approx(area_factor(p, r)).epsilon(1e-12));
      CHECK(ball_volume_at_pole(e, r)
            == Catch::Approx(ball_volume_at_pole(p, r)).epsilon(1e-12));
   }
   CHECK(doubling_ratio(e, 0.5, 3.0)
         == Catch::Approx(doubling_ratio(p, 0.5, 3.0)).epsilon(1e-12));
}

TEST_CASE("custom profile integration is exact on its interpolant")
{
   // S(r) = r tabulated densely: volume of the interpolant equals the
   // trapezoid value exactly, and stays within O(h^2) of the smooth answer.
   std::vector<double> r, S;
   for (int i = 0; i <= 200; i++)
   {
      r.push_back(i * 0.01);
      S.push_back(std::max(1e-12, i * 0.01));
   }
   const auto c = ModelManifold::custom(3, r, S);
   const auto exact = ModelManifold::polynomial(3, 1.0, 2.0);
   CHECK(ball_volume_at_pole(c, 2.0)
         == Catch::Approx(ball_volume_at_pole(exact, 2.0)).epsilon(1e-5));
   // partial segments: [0.015, 0.035] of the piecewise-linear S
   const double seg = shell_volume(c, 1.005, 1.015);
   const double want = unit_sphere_area(3) * 0.5 * (1.005 + 1.015) * 0.01;
   CHECK(seg == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("region bookkeeping for centered balls")
{
   const Region reg(1.0, 2.0);
   CHECK(reg.outer_radius() == 3.0);
   CHECK(reg.dist_to_complement(0.0) == 3.0);
   CHECK(reg.dist_to_complement(2.0) == 1.0);
   CHECK(reg.dist_to_complement(3.0) == 0.0);
   CHECK(reg.dist_to_complement(10.0) == 0.0);
   CHECK_THROWS_AS(Region(-1.0, 0.5), std::invalid_argument);
   CHECK_THROWS_AS(Region(1.0, -0.5), std::invalid_argument);
}

TEST_CASE("constructor preconditions")
{
   CHECK_THROWS_AS(ModelManifold::polynomial(3, 1.0, 3.5), std::invalid_argument);
   CHECK_THROWS_AS(ModelManifold::polynomial(3, -1.0, 2.0), std::invalid_argument);
   CHECK_THROWS_AS(ModelManifold::custom(2, {1.0}, {1.0}), std::invalid_argument);
   CHECK_THROWS_AS(ModelManifold::custom(2, {1.0, 0.5}, {1.0, 1.0}), std::invalid_argument);
   CHECK_THROWS_AS(ModelManifold::custom(2, {0.5, 1.0}, {1.0, -1.0}), std::invalid_argument);
}

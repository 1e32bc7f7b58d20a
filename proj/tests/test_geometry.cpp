#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "uwbloc/geometry.hpp"

using namespace uwbloc;

TEST_CASE("make_ula spacing and symmetry")
{
  const auto six = make_ula(6, 1.0);
  for (std::size_t k = 1; k < six.size(); ++k) CHECK(distance(six[k], six[k - 1]) == doctest::Approx(0.20).epsilon(1e-12));

  const auto two = make_ula(2, 1.0);
  CHECK(two[0].x == doctest::Approx(-0.5));
  CHECK(two[1].x == doctest::Approx(0.5));

  const auto four = make_ula(4, 1.0);
  CHECK(four[1].x - four[0].x == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(make_ula(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_ula(3, 0.0), std::invalid_argument);
}

TEST_CASE("ULA spacing is uniform to 1e-12 m")
{
  for (int n = 2; n <= 12; ++n) {
    const auto a = make_ula(n, 0.37 * n, { 1.3, -0.2 }, { 0.6, 0.8 });
    const double first = distance(a[1], a[0]);
    for (std::size_t k = 2; k < a.size(); ++k) CHECK(std::abs(distance(a[k], a[k - 1]) - first) < 1e-12);
  }
}

TEST_CASE("make_ula is translation and rotation equivariant")
{
  const double angle = 0.7;
  const Vec2 axis{ std::cos(angle), std::sin(angle) };
  const Position c{ 2.0, -1.0 };
  const auto base = make_ula(5, 1.2);
  const auto moved = make_ula(5, 1.2, c, axis);
  for (std::size_t k = 0; k < base.size(); ++k) {
    const Position expect{ c.x + base[k].x * axis.x - base[k].y * axis.y, c.y + base[k].x * axis.y + base[k].y * axis.x };
    CHECK(moved[k].x == doctest::Approx(expect.x).epsilon(1e-12));
    CHECK(moved[k].y == doctest::Approx(expect.y).epsilon(1e-12));
  }
}

TEST_CASE("make_coprime lattice")
{
  // (2, 3): {0, 2, 4} u {0, 3} = {0, 2, 3, 4}, span 4 units scaled to 1 m and centered.
  const auto a = make_coprime(6, 1.0, {}, { 1.0, 0.0 }, { 2, 3 });
  REQUIRE(a.size() == 4);
  const double expect[] = { -0.5, 0.0, 0.25, 0.5 };
  for (std::size_t k = 0; k < 4; ++k) CHECK(a[k].x == doctest::Approx(expect[k]).epsilon(1e-12));

  // (3, 4): {0, 3, 6, 9} u {0, 4, 8} = 6 anchors over 9 units.
  const auto b = make_coprime(6, 1.0, { 1.5, 0.0 }, { 1.0, 0.0 }, { 3, 4 });
  REQUIRE(b.size() == 6);
  const int idx[] = { 0, 3, 4, 6, 8, 9 };
  for (std::size_t k = 0; k < 6; ++k) CHECK(b[k].x == doctest::Approx(1.0 + idx[k] / 9.0).epsilon(1e-12));

  CHECK_THROWS_AS(make_coprime(6, 1.0, {}, { 1.0, 0.0 }, { 2, 4 }), std::invalid_argument);
  const auto ends = make_coprime(2, 1.0, {}, { 1.0, 0.0 }, { 1, 2 });
  REQUIRE(ends.size() == 2);
  CHECK(ends[0].x == doctest::Approx(-0.5));
  CHECK(ends[1].x == doctest::Approx(0.5));
  CHECK_THROWS_AS(make_coprime(5, 1.0, {}, { 1.0, 0.0 }, { 3, 4 }), std::invalid_argument);
}

TEST_CASE("eval_grid sizes and bounds")
{
  const Environment env;
  CHECK(grid_shape(env, 0.001).size() == 9'000'000);
  const auto one = eval_grid(env, 3.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Position{ 1.5, 1.5 });
  const auto g = eval_grid(env, 0.05);
  CHECK(g.size() == 3600);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(env.contains(g[k]));
    if (k % 60 != 0) {
      CHECK(g[k].x - g[k - 1].x == doctest::Approx(0.05).epsilon(1e-12));
      CHECK(g[k].y == g[k - 1].y);
    }
  }
  CHECK_THROWS_AS(eval_grid(env, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_grid(env, -1.0), std::invalid_argument);
}

TEST_CASE("environment and anchor array validation")
{
  CHECK_THROWS_AS(Environment(0.0, 3.0), std::invalid_argument);
  CHECK_THROWS_AS(AnchorArray({ { 0.0, 0.0 } }), std::invalid_argument);
  CHECK_THROWS_AS(AnchorArray({ { 0.0, 0.0 }, { 0.0, 0.0 } }), std::invalid_argument);
  CHECK_THROWS_AS(AnchorArray({ { 0.0, 0.0 }, { 1.0, 0.0 } }, -1.0), std::invalid_argument);
  const AnchorArray a({ { 0.0, 0.0 }, { 1.0, 0.0 } });
  CHECK(a.wavelength() == doctest::Approx(0.08565).epsilon(1e-3));
  CHECK_THROWS_AS(a.check_index(2), std::out_of_range);
  CHECK_FALSE(a.has_calibration());
  CHECK(a.with_calibration({ { 0.1, 0.0, 0.0 }, {} }).has_calibration());
  CHECK_THROWS_AS(a.with_calibration({ {} }), std::invalid_argument);
  const Environment env;
  CHECK(env.clamp({ -1.0, 4.0 }) == Position{ 0.0, 3.0 });
}

TEST_CASE("layout helpers")
{
  const Environment env;
  const auto d = diverse_layout(env);
  REQUIRE(d.size() == 6);
  for (const auto& p : d.positions()) CHECK(env.contains(p));
  const auto p = paired_layout(env, 1.0);
  REQUIRE(p.size() == 6);
  for (std::size_t k = 0; k < 6; k += 2) CHECK(distance(p[k], p[k + 1]) == doctest::Approx(0.5 * kDefaultWavelength));
  CHECK(p[5].x - p[0].x == doctest::Approx(1.0));
}

#include <doctest.h>

#include <random>

#include "supobs/errors.hpp"
#include "supobs/sampling.hpp"

using namespace supobs;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ParamBox jr_box() { return ParamBox::from_bounds(v2(4, 22), v2(8, 28)); }

}  // namespace

TEST_CASE("grid_sample on the Jansen-Rit box") {
  const SampledParamSet g = grid_sample(jr_box(), 5);
  REQUIRE(g.size() == 25);
  const double d1[] = {4.4, 5.2, 6.0, 6.8, 7.6};
  const double d2[] = {22.6, 23.8, 25.0, 26.2, 27.4};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const Vec& p = g.points[static_cast<std::size_t>(5 * i + j)];
      CHECK(p(0) == doctest::Approx(d1[i]).epsilon(1e-14));
      CHECK(p(1) == doctest::Approx(d2[j]).epsilon(1e-14));
    }
  }
  // (6.0, 25.0) and (6.8, 25.0) are both at sup distance 0.5; the lower index wins
  const Nearest n = distance_to_set(v2(6.5, 25.5), g);
  CHECK(n.distance == doctest::Approx(0.5));
  CHECK(n.index == 12);
  CHECK(sup_distance(v2(6.5, 25.5), g.points[17]) == doctest::Approx(0.5));
  CHECK(g.points[17](0) == doctest::Approx(6.8));
  CHECK(n.distance <= grid_resolution(jr_box(), 5));
  CHECK(grid_resolution(jr_box(), 5) == doctest::Approx(0.6));
}

TEST_CASE("grid_sample with m = 1 is the center") {
  const SampledParamSet g = grid_sample(jr_box(), 1);
  REQUIRE(g.size() == 1);
  CHECK(g.points[0] == jr_box().center);
}

TEST_CASE("grid distance bound holds exactly for random points") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u1(4.0, 8.0), u2(22.0, 28.0);
  for (std::size_t m = 2; m <= 9; ++m) {
    const SampledParamSet g = grid_sample(jr_box(), m);
    const double bound = grid_resolution(jr_box(), m);
    for (int s = 0; s < 1000; ++s) {
      const Vec p = v2(u1(gen), u2(gen));
      REQUIRE(distance_to_set(p, g).distance <= bound);
    }
  }
}

TEST_CASE("distance_to_set basics") {
  const std::vector<Vec> pts{v2(1, 1), v2(3, 1), v2(1, 1)};
  CHECK(distance_to_set(v2(1, 1), pts).distance == 0.0);
  CHECK(distance_to_set(v2(1, 1), pts).index == 0);
  CHECK(distance_to_set(v2(2, 5), std::vector<Vec>{v2(0, 0)}).distance == 5.0);
  // equidistant points: lowest index wins
  CHECK(distance_to_set(v2(2, 1), pts).index == 0);
  try {
    distance_to_set(v2(0, 0), std::vector<Vec>{});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptySet);
  }
}

TEST_CASE("zoom_update interval arithmetic") {
  ZoomState z = ZoomState::start(jr_box(), 0.8);
  const SampledParamSet g = zoom_update(z, v2(7.5, 25.0), 5);
  CHECK(z.k == 1);
  CHECK(z.half_lengths(0) == doctest::Approx(1.6));
  CHECK(z.half_lengths(1) == doctest::Approx(2.4));
  CHECK(z.current_box.lower()(0) == doctest::Approx(5.9));
  CHECK(z.current_box.upper()(0) == doctest::Approx(8.0));
  CHECK(z.current_box.lower()(1) == doctest::Approx(22.6));
  CHECK(z.current_box.upper()(1) == doctest::Approx(27.4));
  CHECK(g.size() == 25);
  for (const Vec& p : g.points) CHECK(z.current_box.contains(p));
}

TEST_CASE("zoom_update half-lengths follow alpha^k") {
  ZoomState z = ZoomState::start(jr_box(), 0.5);
  for (int k = 1; k <= 6; ++k) {
    zoom_update(z, z.current_box.center, 3);
    CHECK(z.half_lengths(0) == doctest::Approx(2.0 * std::pow(0.5, k)));
    CHECK(z.half_lengths(1) == doctest::Approx(3.0 * std::pow(0.5, k)));
  }
}

TEST_CASE("zoom_update at a corner stays nonempty") {
  ZoomState z = ZoomState::start(jr_box(), 0.8);
  zoom_update(z, v2(8, 28), 5);
  CHECK(z.current_box.contains(v2(8, 28)));
  CHECK(z.current_box.volume() > 0.0);
}

TEST_CASE("zoom_update outside the running box throws") {
  ZoomState z = ZoomState::start(jr_box(), 0.8);
  try {
    zoom_update(z, v2(100, 25), 5);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyIntersection);
  }
}

TEST_CASE("zoom property: nesting and cumulative shrink from grid points") {
  std::mt19937_64 gen(99);
  for (int run = 0; run < 50; ++run) {
    const double alpha = 0.3 + 0.69 * std::uniform_real_distribution<double>(0, 1)(gen);
    ZoomState z = ZoomState::start(jr_box(), alpha);
    SampledParamSet g = grid_sample(jr_box(), 4);
    const double vol0 = jr_box().volume();
    for (int k = 1; k <= 8; ++k) {
      const ParamBox before = z.current_box;
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, g.size() - 1)(gen);
      g = zoom_update(z, g.points[pick], 4);
      CHECK(before.contains(z.current_box));
      CHECK(z.current_box.volume() <= std::pow(alpha, 2 * k) * vol0 * (1 + 1e-12));
    }
  }
}

TEST_CASE("ParamBox helpers") {
  const ParamBox b = ParamBox::hypercube(v2(1, 2), 0.5);
  CHECK(b.volume() == doctest::Approx(1.0));
  CHECK(b.contains(v2(1.5, 1.5)));
  CHECK_FALSE(b.contains(v2(1.6, 2)));
  const auto inter = b.intersect(ParamBox::from_bounds(v2(1.2, 0), v2(9, 9)));
  REQUIRE(inter.has_value());
  CHECK(inter->lower()(0) == doctest::Approx(1.2));
  CHECK_FALSE(b.intersect(ParamBox::hypercube(v2(9, 9), 0.1)).has_value());
  CHECK_THROWS_AS(ParamBox::from_bounds(v2(1, 1), v2(0, 2)), Error);
}

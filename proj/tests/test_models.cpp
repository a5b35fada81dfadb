#include <doctest.h>

#include <cmath>

#include "supobs/errors.hpp"
#include "supobs/linalg.hpp"
#include "supobs/models.hpp"

using namespace supobs;

TEST_CASE("sigmoid values") {
  const JansenRitParams k;
  CHECK(sigmoid(k.v0, k) == doctest::Approx(k.e0).epsilon(1e-15));
  CHECK(std::abs(sigmoid(k.v0 - 100.0 / k.r, k)) < 1e-6);
  CHECK(std::abs(sigmoid(k.v0 + 100.0 / k.r, k) - 2.0 * k.e0) < 1e-6);
  // 5 / (1 + e^-2.24), mpmath at 30 digits
  CHECK(sigmoid(10.0, k) == doctest::Approx(4.51892229144653576919).epsilon(1e-15));
  CHECK(sigmoid_max_slope(k) == doctest::Approx(0.7));
}

TEST_CASE("jansen_rit_plant structure") {
  const auto plant = jansen_rit_plant(JansenRitParams{});
  CHECK(plant->nx() == 6);
  CHECK(plant->ny() == 1);
  CHECK(plant->np() == 2);
  CHECK(plant->ngamma() == 2);
  Vec p(2);
  p << 6.5, 25.5;
  const Mat a = plant->A(p);
  CHECK(is_hurwitz(a));
  // each rate block has a double root at -rate
  const CVec ev = eigenvalues(a);
  std::vector<Complex> expected{{-100, 0}, {-100, 0}, {-100, 0}, {-100, 0}, {-50, 0}, {-50, 0}};
  CHECK(spectra_match(ev, expected, 1e-6));
  CHECK(plant->sector_upper()(0) == doctest::Approx(0.7));
  CHECK(plant->sector_lower()(1) == 0.0);
  CHECK(sector_slope_violation(*plant, -50.0, 50.0, 20001) <= 1e-9);
}

TEST_CASE("jansen_rit_plant vector field matches the component equations") {
  const JansenRitParams k;
  const auto plant = jansen_rit_plant(k);
  Vec x(6), p(2), u(1);
  x << 0.3, -1.2, 4.0, 2.5, 1.1, -0.7;
  p << 5.0, 24.0;
  u << 200.0;
  const Vec dx = plant->f(x, p, u);
  const double y = x(2) - x(4);
  CHECK(dx(0) == doctest::Approx(x(1)));
  CHECK(dx(1) == doctest::Approx(p(0) * k.a * sigmoid(y, k) - 2 * k.a * x(1) - k.a * k.a * x(0)));
  CHECK(dx(2) == doctest::Approx(x(3)));
  CHECK(dx(3) == doctest::Approx(p(0) * k.a * (u(0) + k.c2 * sigmoid(k.c1 * x(0), k)) - 2 * k.a * x(3) -
                                 k.a * k.a * x(2)));
  CHECK(dx(4) == doctest::Approx(x(5)));
  CHECK(dx(5) == doctest::Approx(p(1) * k.b * k.c4 * sigmoid(k.c3 * x(0), k) - 2 * k.b * x(5) - k.b * k.b * x(4)));
  CHECK(plant->h(x, p)(0) == doctest::Approx(y));
}

TEST_CASE("scalar linear testbed") {
  const auto plant = scalar_linear_plant();
  Vec x(1), p(1), u(1);
  x << 2.0;
  p << 1.5;
  u << 0.5;
  CHECK(plant->f(x, p, u)(0) == doctest::Approx(-2.5));
  CHECK(plant->h(x, p)(0) == 2.0);
}

TEST_CASE("BoundednessMonitor") {
  BoundednessMonitor m;
  m.check(Vec::Zero(3));
  CHECK(m.max_abs_seen == 0.0);
  for (double v : {1.0, 5.0, 3.0}) m.check(Vec::Constant(1, -v));
  CHECK(m.max_abs_seen == 5.0);
  try {
    m.check(Vec::Constant(2, 2e6));
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TrajectoryBlowUp);
  }
  BoundednessMonitor nan_guard;
  CHECK_THROWS_AS(nan_guard.check(Vec::Constant(1, std::nan(""))), Error);
}

TEST_CASE("invalid Jansen-Rit constants are rejected") {
  JansenRitParams k;
  k.r = -1.0;
  CHECK_THROWS_AS(jansen_rit_plant(k), Error);
}

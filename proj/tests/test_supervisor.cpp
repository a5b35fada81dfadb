#include <doctest.h>

#include <cmath>
#include <limits>

#include "supobs/errors.hpp"
#include "supobs/supervisor.hpp"

using namespace supobs;

namespace {

Vec scalar(double v) { return Vec::Constant(1, v); }

RunSetup scalar_setup(double p_star, double t_final = 50.0) {
  RunSetup s;
  s.plant = scalar_linear_plant();
  s.plant_parameter = scalar(p_star);
  s.reference_parameter = scalar(p_star);
  s.x0 = scalar(1.0);
  s.xhat0 = scalar(0.0);
  s.input.kind = InputSpec::Kind::Sine;
  s.lambda = 0.1;
  s.sim = SimConfig::make(1e-3, t_final, std::nullopt, 10);
  return s;
}

LuenbergerDesigner scalar_designer() {
  return LuenbergerDesigner(scalar_linear_plant(), {Complex(-3.0, 0.0)});
}

ParamBox unit_theta() { return ParamBox::from_bounds(scalar(1.0), scalar(2.0)); }

struct MonitorField final : VectorField {
  double lambda, forcing;
  MonitorField(double l, double f) : lambda(l), forcing(f) {}
  std::size_t dimension() const override { return 1; }
  void evaluate(double, const Vec& z, Vec& dz) override {
    dz(0) = monitor_rhs(z(0), Vec::Constant(1, std::sqrt(forcing)), lambda);
  }
};

}  // namespace

TEST_CASE("monitor_rhs examples") {
  CHECK(monitor_rhs(0.0, Vec::Zero(2), 0.005) == 0.0);
  Vec e(2);
  e << 0.5, -2.0;
  CHECK(monitor_rhs(1.0, e, 0.5) == doctest::Approx(-0.5 + 4.0));
  // constant forcing c has fixed point c / lambda
  CHECK(monitor_rhs(3.0 / 0.1, Vec::Constant(1, std::sqrt(3.0)), 0.1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("monitor integrates to the closed form") {
  MonitorField f(0.005, 1.0);
  const RunResult r = run(SimConfig::make(1e-3, 100.0, std::nullopt, 1000), f, Vec::Zero(1), {}, {});
  // (1 - e^-0.5) / 0.005, mpmath
  CHECK(std::abs(r.state(0) - 78.6938680574733152792) < 1e-6);
}

TEST_CASE("monitor reset then constant forcing follows the shifted closed form") {
  MonitorField f(0.1, 1.0);
  const SimConfig sim = SimConfig::make(1e-3, 20.0, 5.0, 100);
  double t_reset = -1.0;
  double mu_at_15 = std::nan("");
  run(
      sim, f, Vec::Zero(1),
      [&](std::size_t k, double t, Vec& z) {
        if (k == 2) {
          MonitorBank b{z, 0.1};
          monitor_reset(b);
          z = b.mu;
          t_reset = t;
        }
      },
      [&](std::size_t, double t, const Vec& z) {
        if (std::abs(t - 15.0) < 1e-9) mu_at_15 = z(0);
      });
  CHECK(t_reset == doctest::Approx(10.0));
  CHECK(mu_at_15 == doctest::Approx((1 - std::exp(-0.1 * 5.0)) / 0.1).epsilon(1e-9));
}

TEST_CASE("select") {
  Vec mu(3);
  mu << 3, 1, 2;
  CHECK(select(mu) + 1 == 2);
  CHECK(select(Vec::Ones(2)) == 0);
  CHECK(select(Vec::Constant(1, 7.0)) == 0);
  MonitorBank b{Vec::Constant(4, 2.0), 0.1};
  monitor_reset(b);
  CHECK(b.mu.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(select(Vec()), Error);
}

TEST_CASE("static scalar run picks the grid point nearest p*") {
  for (double p_star : {1.5, 1.37, 1.04, 1.93}) {
    LuenbergerDesigner designer = scalar_designer();
    const SampledParamSet grid = grid_sample(unit_theta(), 5);
    const SupervisorTrace tr = run_static(scalar_setup(p_star), grid, designer);
    const Nearest oracle = distance_to_set(scalar(p_star), grid);
    CHECK(tr.summary.sigma == oracle.index + 1);
    CHECK(tr.summary.err_p_inf <= 0.1);
    CHECK(tr.zooms.empty());
  }
}

TEST_CASE("exact-parameter static run drives the state error to zero") {
  LuenbergerDesigner designer = scalar_designer();
  const SupervisorTrace tr = run_static(scalar_setup(1.5), grid_sample(unit_theta(), 5), designer);
  CHECK(tr.summary.err_p_inf == 0.0);
  CHECK(tr.summary.err_x_inf < 1e-6);
}

TEST_CASE("selection agrees with independently integrated monitors") {
  const double p_star = 1.37;
  LuenbergerDesigner designer = scalar_designer();
  const SampledParamSet grid = grid_sample(unit_theta(), 5);
  RunSetup s = scalar_setup(p_star, 10.0);
  const SupervisorTrace tr = run_static(s, grid, designer);

  // plant x' = -p* x + sin t, observer i x̂' = -p_i x̂ + u - 3 (x̂ - x) + p_i (x̂ - x)
  // (L_i = p_i - 3 places the pole at -3), monitor mu_i' = -0.1 mu_i + (x̂_i - x)^2
  const std::size_t n = grid.size();
  auto field = [&](double t, const Vec& z) {
    Vec dz(z.size());
    const double u = std::sin(t);
    dz(0) = -p_star * z(0) + u;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = grid.points[i](0);
      const double e = z(1 + i) - z(0);
      dz(1 + i) = -p * z(1 + i) + u + (p - 3.0) * e;
      dz(1 + n + i) = -0.1 * z(1 + n + i) + e * e;
    }
    return dz;
  };
  Vec z = Vec::Zero(1 + 2 * n);
  z(0) = 1.0;
  const double dt = 1e-3;
  for (int k = 0; k < 10000; ++k) z = rk4_step(field, z, k * dt, dt);
  const Vec mu = z.tail(n);
  const TraceRow& last = tr.rows.back();
  CHECK(last.t == doctest::Approx(10.0));
  CHECK((last.mu - mu).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, mu.maxCoeff()));
  CHECK(last.sigma == select(mu) + 1);
}

TEST_CASE("recorded monitors are nonnegative and sigma indexes their minimum") {
  LuenbergerDesigner designer = scalar_designer();
  const SupervisorTrace tr = run_static(scalar_setup(1.22, 20.0), grid_sample(unit_theta(), 7), designer);
  for (const TraceRow& r : tr.rows) {
    CHECK(r.mu.minCoeff() >= 0.0);
    CHECK(r.mu(static_cast<Eigen::Index>(r.sigma - 1)) == r.mu.minCoeff());
    CHECK(r.mu_min == r.mu.minCoeff());
  }
}

TEST_CASE("no excitation keeps every monitor at zero and sigma at 1") {
  RunSetup s = scalar_setup(1.5, 5.0);
  s.input.kind = InputSpec::Kind::Zero;
  s.x0 = scalar(0.0);
  LuenbergerDesigner designer = scalar_designer();
  const SupervisorTrace tr = run_static(s, grid_sample(unit_theta(), 5), designer);
  for (const TraceRow& r : tr.rows) {
    CHECK(r.sigma == 1);
    CHECK(r.mu.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("the reference parameter never reaches the estimator path") {
  RunSetup with = scalar_setup(1.37, 30.0);
  RunSetup sentinel = with;
  sentinel.reference_parameter = scalar(-1e9);
  RunSetup without = with;
  without.reference_parameter.reset();
  DynamicOptions opts{unit_theta(), 5, 0.5, 10.0};
  LuenbergerDesigner d1 = scalar_designer(), d2 = scalar_designer(), d3 = scalar_designer();
  const SupervisorTrace a = run_dynamic(with, opts, d1);
  const SupervisorTrace b = run_dynamic(sentinel, opts, d2);
  const SupervisorTrace c = run_dynamic(without, opts, d3);
  REQUIRE(a.rows.size() == b.rows.size());
  REQUIRE(a.rows.size() == c.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].sigma == b.rows[i].sigma);
    CHECK(a.rows[i].sigma == c.rows[i].sigma);
    CHECK(a.rows[i].p_hat == b.rows[i].p_hat);
    CHECK(a.rows[i].x_hat == c.rows[i].x_hat);
  }
  CHECK(std::isnan(c.rows.back().err_p_inf));
}

TEST_CASE("dynamic scalar run: nesting, continuity, resets, containment") {
  LuenbergerDesigner designer = scalar_designer();
  DynamicOptions opts{unit_theta(), 5, 0.5, 10.0};
  const SupervisorTrace tr = run_dynamic(scalar_setup(1.37), opts, designer);
  REQUIRE(tr.zooms.size() == 4);
  for (const ZoomEvent& z : tr.zooms) {
    CHECK(z.nested);
    CHECK(z.box_before.contains(z.box_after));
    CHECK(z.max_state_jump == 0.0);
    CHECK(z.max_mu_after_reset == 0.0);
    CHECK(z.t == doctest::Approx(10.0 * double(z.k)));
    REQUIRE(z.reference_contained.has_value());
    if (z.err_p_left_inf <= z.box_after.half_lengths.minCoeff()) CHECK(*z.reference_contained);
  }
  CHECK(tr.summary.err_p_inf < 0.1);
}

TEST_CASE("alpha close to one still nests") {
  LuenbergerDesigner designer = scalar_designer();
  DynamicOptions opts{unit_theta(), 3, 0.999, 2.0};
  const SupervisorTrace tr = run_dynamic(scalar_setup(1.6, 10.0), opts, designer);
  CHECK(tr.zooms.size() == 4);
  for (const ZoomEvent& z : tr.zooms) CHECK(z.nested);
}

TEST_CASE("a diverging plant trips the guard") {
  RunSetup s = scalar_setup(-2.0, 50.0);
  s.guard = 1e3;
  s.reference_parameter.reset();
  LuenbergerDesigner designer = scalar_designer();
  try {
    run_static(s, grid_sample(unit_theta(), 3), designer);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TrajectoryBlowUp);
  }
}

TEST_CASE("uncertified circle-criterion designer uses zero gains") {
  CircleCriterionDesigner::Options opts;
  opts.certify = false;
  CircleCriterionDesigner d(jansen_rit_plant(JansenRitParams{}), opts);
  Vec p(2);
  p << 6.0, 25.0;
  const ObserverPtr obs = d.design(0, p);
  CHECK(obs->certificate() == nullptr);
  const auto& cc = dynamic_cast<const CircleCriterionObserver&>(*obs);
  CHECK(cc.gains().L.cwiseAbs().maxCoeff() == 0.0);
}

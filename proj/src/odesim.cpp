#include "supobs/odesim.hpp"

#include <cmath>
#include <sstream>

#include "supobs/errors.hpp"

namespace supobs {

namespace {

void check_stage(const Vec& k, double t, int stage) {
  if (!k.allFinite()) {
    std::ostringstream os;
    os << "stage " << stage << " at t=" << t;
    throw Error(Errc::NonFiniteDerivative, os.str());
  }
}

}  // namespace

SimConfig SimConfig::make(double dt, double t_final, std::optional<double> event_period,
                          std::size_t record_stride, std::vector<std::string>* log) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(Errc::ConfigError, "sim.dt must be > 0");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw Error(Errc::ConfigError, "sim.t_final must be > 0");
  if (dt > t_final) throw Error(Errc::ConfigError, "sim.dt must not exceed sim.t_final");
  if (record_stride < 1) throw Error(Errc::ConfigError, "sim.record_stride must be >= 1");
  SimConfig cfg;
  cfg.dt = dt;
  cfg.t_final = t_final;
  cfg.record_stride = record_stride;
  if (event_period) {
    if (!(*event_period >= dt)) throw Error(Errc::ConfigError, "event period must be >= dt");
    const double multiple = std::round(*event_period / dt);
    const double snapped = multiple * dt;
    if (log && std::abs(snapped - *event_period) > 1e-12 * *event_period) {
      std::ostringstream os;
      os << "event period " << *event_period << " snapped to " << snapped << " (" << multiple << " steps)";
      log->push_back(os.str());
    }
    cfg.event_period = snapped;
  }
  return cfg;
}

std::size_t SimConfig::total_steps() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

std::size_t SimConfig::steps_per_event() const {
  if (!event_period) return 0;
  return static_cast<std::size_t>(std::llround(*event_period / dt));
}

Vec rk4_step(const Rhs& rhs, const Vec& x, double t, double dt) {
  if (!(dt > 0.0)) throw Error(Errc::InvalidArgument, "dt must be > 0");
  const Vec k1 = rhs(t, x);
  check_stage(k1, t, 1);
  const Vec k2 = rhs(t + 0.5 * dt, x + 0.5 * dt * k1);
  check_stage(k2, t, 2);
  const Vec k3 = rhs(t + 0.5 * dt, x + 0.5 * dt * k2);
  check_stage(k3, t, 3);
  const Vec k4 = rhs(t + dt, x + dt * k3);
  check_stage(k4, t, 4);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void Rk4Workspace::resize(Eigen::Index n) {
  k1.resize(n);
  k2.resize(n);
  k3.resize(n);
  k4.resize(n);
  tmp.resize(n);
}

void rk4_step(VectorField& field, Vec& z, double t, double dt, Rk4Workspace& ws) {
  const double half = 0.5 * dt;
  field.evaluate(t, z, ws.k1);
  check_stage(ws.k1, t, 1);
  ws.tmp = z + half * ws.k1;
  field.evaluate(t + half, ws.tmp, ws.k2);
  check_stage(ws.k2, t, 2);
  ws.tmp = z + half * ws.k2;
  field.evaluate(t + half, ws.tmp, ws.k3);
  check_stage(ws.k3, t, 3);
  ws.tmp = z + dt * ws.k3;
  field.evaluate(t + dt, ws.tmp, ws.k4);
  check_stage(ws.k4, t, 4);
  z += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

RunResult run(const SimConfig& sim, VectorField& field, Vec z0, const EventFn& on_event,
              const RecordFn& on_record, const StepFn& on_step) {
  if (static_cast<std::size_t>(z0.size()) != field.dimension()) {
    throw Error(Errc::DimensionMismatch, "initial state does not match the vector field dimension");
  }
  const std::size_t steps = sim.total_steps();
  const std::size_t per_event = sim.steps_per_event();
  Rk4Workspace ws;
  ws.resize(z0.size());

  RunResult result;
  result.state = std::move(z0);
  if (on_record) on_record(0, 0.0, result.state);
  for (std::size_t n = 0; n < steps; ++n) {
    // times are n*dt, never accumulated, so event instants are exact
    const double t = static_cast<double>(n) * sim.dt;
    if (per_event > 0 && n > 0 && n % per_event == 0) {
      ++result.events;
      if (on_event) on_event(n / per_event, t, result.state);
    }
    field.begin_step(t, result.state);
    rk4_step(field, result.state, t, sim.dt, ws);
    const double t_next = static_cast<double>(n + 1) * sim.dt;
    if (on_step) on_step(t_next, result.state);
    if (on_record && ((n + 1) % sim.record_stride == 0 || n + 1 == steps)) on_record(n + 1, t_next, result.state);
  }
  result.steps = steps;
  result.t = static_cast<double>(steps) * sim.dt;
  return result;
}

}  // namespace supobs

#pragma once

// Fixed-step classical RK4 over a flat composite state with events on a
// fixed grid t_k = k * event_period.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "supobs/linalg.hpp"

namespace supobs {

struct SimConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  std::optional<double> event_period;  // T_d, a multiple of dt after make()
  std::size_t record_stride = 1;

  /// Validates and snaps event_period to the nearest integer multiple of dt.
  /// A note is appended to `log` when snapping changed the value.
  static SimConfig make(double dt, double t_final, std::optional<double> event_period,
                        std::size_t record_stride, std::vector<std::string>* log = nullptr);

  std::size_t total_steps() const;
  std::size_t steps_per_event() const;  // 0 when there are no events
};

/// Plant + N observers + N monitors packed as [x | x_hat_1 .. x_hat_N | mu].
struct CompositeLayout {
  std::size_t nx = 0;
  std::size_t observers = 0;

  std::size_t size() const { return nx * (observers + 1) + observers; }
  std::size_t observer_offset(std::size_t i) const { return nx * (i + 1); }
  std::size_t monitor_offset() const { return nx * (observers + 1); }

  auto plant(Vec& z) const { return z.segment(0, static_cast<Eigen::Index>(nx)); }
  auto plant(const Vec& z) const { return z.segment(0, static_cast<Eigen::Index>(nx)); }
  auto observer(Vec& z, std::size_t i) const {
    return z.segment(static_cast<Eigen::Index>(observer_offset(i)), static_cast<Eigen::Index>(nx));
  }
  auto observer(const Vec& z, std::size_t i) const {
    return z.segment(static_cast<Eigen::Index>(observer_offset(i)), static_cast<Eigen::Index>(nx));
  }
  auto monitors(Vec& z) const {
    return z.segment(static_cast<Eigen::Index>(monitor_offset()), static_cast<Eigen::Index>(observers));
  }
  auto monitors(const Vec& z) const {
    return z.segment(static_cast<Eigen::Index>(monitor_offset()), static_cast<Eigen::Index>(observers));
  }
};

class VectorField {
 public:
  virtual ~VectorField() = default;
  virtual std::size_t dimension() const = 0;
  /// Called once before each step with the step's start time and state.
  /// Sample-and-hold inputs latch their value here.
  virtual void begin_step(double /*t*/, const Vec& /*z*/) {}
  virtual void evaluate(double t, const Vec& z, Vec& dz) = 0;
};

using Rhs = std::function<Vec(double, const Vec&)>;

/// One classical RK4 step. Throws NonFiniteDerivative when a stage is NaN/Inf.
Vec rk4_step(const Rhs& rhs, const Vec& x, double t, double dt);

struct Rk4Workspace {
  Vec k1, k2, k3, k4, tmp;
  void resize(Eigen::Index n);
};

void rk4_step(VectorField& field, Vec& z, double t, double dt, Rk4Workspace& ws);

/// Event hook: called at t_k (k >= 1, t_k < t_final) before the step that
/// starts at t_k, with the left-limit state; it may modify the state.
using EventFn = std::function<void(std::size_t k, double t, Vec& z)>;
/// Record hook: called at step 0, every record_stride steps and at the final step.
using RecordFn = std::function<void(std::size_t step, double t, const Vec& z)>;
/// Step hook: called after every completed step (blow-up guards etc.).
using StepFn = std::function<void(double t, const Vec& z)>;

struct RunResult {
  Vec state;
  double t = 0.0;
  std::size_t steps = 0;
  std::size_t events = 0;
};

RunResult run(const SimConfig& sim, VectorField& field, Vec z0, const EventFn& on_event,
              const RecordFn& on_record, const StepFn& on_step = {});

}  // namespace supobs

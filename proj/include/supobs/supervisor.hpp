#pragma once

// Monitoring signals, the selection criterion and the static / dynamic
// estimation runs.
//
//   mu_i' = -lambda mu_i + |ỹ_i|_inf^2,   sigma = argmin_i mu_i (lowest index on ties)
//
// The plant is simulated at `plant_parameter`. The optional
// `reference_parameter` only feeds the logged error columns; nothing on the
// estimator path reads it.

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "supobs/gain_design.hpp"
#include "supobs/input_signal.hpp"
#include "supobs/models.hpp"
#include "supobs/observers.hpp"
#include "supobs/odesim.hpp"
#include "supobs/sampling.hpp"

namespace supobs {

struct MonitorBank {
  Vec mu;
  double lambda = 0.005;
};

double monitor_rhs(double mu, const Vec& y_err, double lambda);
void monitor_reset(MonitorBank& bank);
/// 0-based index of the smallest mu; ties go to the lowest index.
std::size_t select(const Vec& mu);
inline std::size_t select(const MonitorBank& bank) { return select(bank.mu); }

/// Builds the observer for slot i at parameter p.
class ObserverDesigner {
 public:
  virtual ~ObserverDesigner() = default;
  virtual ObserverPtr design(std::size_t slot, const Vec& p) = 0;
  virtual std::vector<std::string> take_log() { return {}; }
};

class LuenbergerDesigner final : public ObserverDesigner {
 public:
  /// `targets` are the closed-loop observer poles used at every p.
  LuenbergerDesigner(std::shared_ptr<const LinearPlant> plant, std::vector<Complex> targets, double nu = 2.0);
  ObserverPtr design(std::size_t slot, const Vec& p) override;

 private:
  std::shared_ptr<const LinearPlant> plant_;
  std::vector<Complex> targets_;
  double nu_;
};

class CircleCriterionDesigner final : public ObserverDesigner {
 public:
  struct Options {
    CCSearchConfig search;
    GainTable table;        // fallback / externally supplied gains
    bool certify = true;    // false: L = 0, K = 0 marked unverified
    std::size_t recent = 8; // certificates kept for warm starts
  };

  CircleCriterionDesigner(std::shared_ptr<const LurePlant> plant, Options opts);
  ObserverPtr design(std::size_t slot, const Vec& p) override;
  std::vector<std::string> take_log() override;
  std::size_t syntheses() const { return syntheses_; }

 private:
  std::shared_ptr<const LurePlant> plant_;
  Options opts_;
  std::vector<std::optional<CCLmiData>> by_slot_;
  std::vector<CCLmiData> recent_;
  std::vector<std::string> log_;
  std::size_t syntheses_ = 0;
};

struct RunSetup {
  std::shared_ptr<const PlantModel> plant;
  Vec plant_parameter;
  std::optional<Vec> reference_parameter;
  Vec x0;
  Vec xhat0;  // shared initial state of every observer
  InputSpec input;
  double lambda = 0.005;
  SimConfig sim;
  double guard = 1e6;
  bool record_output_errors = false;
};

struct TraceRow {
  double t = 0.0;
  std::size_t sigma = 1;  // 1-based
  Vec p_hat;
  Vec x_hat;
  Vec x;
  double mu_min = 0.0;
  double err_p_inf = 0.0;  // NaN without a reference parameter
  double err_x_inf = 0.0;
  std::size_t zoom_k = 0;
  Vec mu;                       // all monitors
  std::vector<Vec> y_err;       // per observer, when recorded
  std::vector<double> err_p_i;  // |p_i - p*|_inf per observer, when recorded
};

struct ZoomEvent {
  std::size_t k = 0;
  double t = 0.0;
  std::size_t sigma_left = 1;  // 1-based
  Vec p_hat_left;
  double err_p_left_inf = 0.0;  // |p̂(t_k^-) - p*|_inf, NaN without reference
  ParamBox box_before;
  ParamBox box_after;
  bool nested = false;
  double volume_before = 0.0;
  double volume_after = 0.0;
  double max_state_jump = 0.0;
  double max_mu_after_reset = 0.0;
  std::optional<bool> reference_contained;
  std::vector<Vec> parameters_after;
};

struct RunSummary {
  std::size_t sigma = 1;  // 1-based
  Vec p_hat;
  double err_p_inf = 0.0;
  double err_p_2 = 0.0;
  double err_x_inf = 0.0;
  double err_x_2 = 0.0;
  /// |x̃_σ(t_f)| / (max_t |x(t)| - min_t |x(t)|) over [0, t_f], Euclidean.
  double normalized_state_error = 0.0;
  std::size_t zoom_count = 0;
  double max_abs_state = 0.0;
  double wall_seconds = 0.0;
};

struct SupervisorTrace {
  std::size_t np = 0, nx = 0, ny = 0, observers = 0;
  std::vector<TraceRow> rows;
  std::vector<ZoomEvent> zooms;
  std::vector<Vec> initial_parameters;
  RunSummary summary;
  std::vector<std::string> log;
};

SupervisorTrace run_static(const RunSetup& setup, const SampledParamSet& grid, ObserverDesigner& designer);

struct DynamicOptions {
  ParamBox theta;
  std::size_t m = 5;
  double alpha = 0.8;
  double Td = 10.0;
};

/// `setup.sim.event_period` is overwritten with opts.Td.
SupervisorTrace run_dynamic(const RunSetup& setup, const DynamicOptions& opts, ObserverDesigner& designer);

/// Runs a fixed bank without zooming; the building block of both modes.
SupervisorTrace run_bank(const RunSetup& setup, ObserverBank bank);

}  // namespace supobs

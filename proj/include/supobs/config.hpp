#pragma once

// Experiment configuration in INI form.
//
//   [plant]    model = jansen_rit | scalar_linear, Jansen-Rit constants a b c1 c2 c3 c4 e0 v0 r
//   [theta]    lower, upper                      (vectors, space separated)
//   [sampling] mode = static | dynamic, m, alpha, Td
//   [monitor]  lambda
//   [sim]      dt, t_final, record_stride, guard
//   [input]    kind, low, high, hold, seed, value, amplitude, frequency, phase, offset
//   [init]     x0, xhat0                         (a single value is broadcast)
//   [truth]    p_star
//   [observer] class, poles, nu, budget, seed, allow_k, certify, gain_file
//   [output]   dir, trace, output_errors, certificates
//   [table]    m_values, modes, workers
//
// Unknown sections or keys are rejected so typos do not pass silently.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "supobs/input_signal.hpp"
#include "supobs/linalg.hpp"
#include "supobs/models.hpp"

namespace supobs {

enum class SamplingMode { Static, Dynamic };
std::string mode_name(SamplingMode m);

struct ExperimentConfig {
  std::string model = "jansen_rit";
  JansenRitParams jansen_rit;

  Vec theta_lower;
  Vec theta_upper;

  SamplingMode mode = SamplingMode::Static;
  std::size_t m = 5;
  std::optional<double> alpha;
  std::optional<double> Td;

  double lambda = 0.005;

  double dt = 5e-4;
  double t_final = 100.0;
  std::size_t record_stride = 20;
  double guard = 1e6;

  InputSpec input;

  Vec x0;
  Vec xhat0;
  Vec p_star;

  std::string observer_class = "circle_criterion";
  std::vector<double> poles;  // Luenberger targets (real)
  double nu = 2.0;
  std::size_t budget = 20000;
  std::uint64_t synthesis_seed = 1;
  bool allow_k = false;
  bool certify = true;
  std::string gain_file;

  std::string out_dir = ".";
  std::string trace_file = "trace.csv";
  std::string output_errors_file;  // empty: not written
  std::string certificates_file;   // empty: not written

  std::vector<std::size_t> table_m_values{2, 4, 5};
  std::vector<SamplingMode> table_modes{SamplingMode::Static, SamplingMode::Dynamic};
  std::size_t table_workers = 0;  // 0: hardware concurrency

  /// Throws ConfigError naming the violated constraint.
  void validate() const;
  bool operator==(const ExperimentConfig&) const;
};

/// Parses INI text; errors name the line or the section.key at fault.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::string& path);
void write_config(std::ostream& os, const ExperimentConfig& cfg);
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace supobs

#pragma once

// Experiment orchestration: builds plants, designers and runs from an
// ExperimentConfig and writes the CSV outputs.

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "supobs/config.hpp"
#include "supobs/pe_analysis.hpp"
#include "supobs/supervisor.hpp"

namespace supobs {

struct Experiment {
  ExperimentConfig config;
  std::shared_ptr<const PlantModel> plant;
  std::shared_ptr<const LurePlant> lure;      // set for jansen_rit
  std::shared_ptr<const LinearPlant> linear;  // set for scalar_linear
  RunSetup setup;
  ParamBox theta;

  static Experiment from_config(const ExperimentConfig& cfg);
  std::unique_ptr<ObserverDesigner> make_designer() const;
};

struct ExperimentRun {
  SamplingMode mode = SamplingMode::Static;
  std::size_t m = 0;
  SupervisorTrace trace;
};

/// Runs with the config's mode and m unless overridden.
ExperimentRun run_experiment(const Experiment& exp, std::optional<SamplingMode> mode = {},
                             std::optional<std::size_t> m = {}, bool record_output_errors = false);

/// t, sigma, p_hat_1..n_p, x_hat_1..n_x, x_1..n_x, mu_min, err_p_inf, err_x_inf, zoom_k
std::vector<std::string> trace_columns(std::size_t np, std::size_t nx);
void write_trace_csv(std::ostream& os, const SupervisorTrace& trace);

/// t, then per observer i: err_p_inf_i, ytilde_i_1..n_y.
void write_output_errors_csv(std::ostream& os, const SupervisorTrace& trace);

struct OutputErrorTable {
  std::vector<double> t;
  std::vector<std::vector<Vec>> y_err;  // [observer][sample]
  std::vector<double> err_p_inf;        // per observer, from the last row
};
/// Reads the output-error CSV back. Throws InvalidTrace on schema errors.
OutputErrorTable read_output_errors_csv(std::istream& is);

void write_zoom_csv(std::ostream& os, const SupervisorTrace& trace);
void write_grid_csv(std::ostream& os, const SampledParamSet& grid);
void write_pe_report_csv(std::ostream& os, const PEReport& rep);

/// One-line human summary with both norm kinds labeled.
std::string summary_line(const ExperimentRun& run);

struct TableCell {
  SamplingMode mode;
  std::size_t m;
  RunSummary summary;
  std::string error;  // non-empty if the run failed
};

/// Runs every (mode, m) cell of the sweep in parallel; cells come back in
/// (m, mode) order of the config lists.
std::vector<TableCell> run_table(const Experiment& exp, std::size_t workers);
void write_table_report(std::ostream& os, const std::vector<TableCell>& cells, bool jansen_rit_reference);

}  // namespace supobs

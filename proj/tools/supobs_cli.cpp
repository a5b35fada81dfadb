// supobs: command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime or certification failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "supobs/certificate_io.hpp"
#include "supobs/config.hpp"
#include "supobs/errors.hpp"
#include "supobs/experiment.hpp"

namespace fs = std::filesystem;
using namespace supobs;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

ExperimentConfig load(const Common& c) {
  if (c.config.empty()) throw Error(Errc::ConfigError, "--config is required");
  ExperimentConfig cfg = load_config(c.config);
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (c.seed) cfg.input.seed = *c.seed;
  return cfg;
}

fs::path out_path(const ExperimentConfig& cfg, const std::string& name) {
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  return dir / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw Error(Errc::IoError, "cannot write " + p.string());
  return os;
}

int cmd_simulate(const Common& c, const std::string& mode, std::optional<std::size_t> m, bool output_errors) {
  ExperimentConfig cfg = load(c);
  std::optional<SamplingMode> mo;
  if (mode == "static") mo = SamplingMode::Static;
  if (mode == "dynamic") mo = SamplingMode::Dynamic;
  if (mo) cfg.mode = *mo;
  if (m) cfg.m = *m;
  cfg.validate();
  const Experiment exp = Experiment::from_config(cfg);
  const bool want_errors = output_errors || !cfg.output_errors_file.empty();
  const ExperimentRun run = run_experiment(exp, std::nullopt, std::nullopt, want_errors);

  const fs::path trace_path = out_path(cfg, cfg.trace_file);
  {
    auto os = open_out(trace_path);
    write_trace_csv(os, run.trace);
  }
  if (want_errors) {
    const std::string name = cfg.output_errors_file.empty() ? "output_errors.csv" : cfg.output_errors_file;
    auto os = open_out(out_path(cfg, name));
    write_output_errors_csv(os, run.trace);
  }
  if (run.mode == SamplingMode::Dynamic) {
    auto os = open_out(out_path(cfg, "zooms.csv"));
    write_zoom_csv(os, run.trace);
  }
  if (!c.quiet) {
    for (const auto& line : run.trace.log) std::cerr << "note: " << line << '\n';
    std::cout << "trace: " << trace_path.string() << '\n';
  }
  std::cout << summary_line(run) << '\n';
  return kOk;
}

int cmd_table(const Common& c, std::size_t workers) {
  const ExperimentConfig cfg = load(c);
  const Experiment exp = Experiment::from_config(cfg);
  const auto cells = run_table(exp, workers ? workers : cfg.table_workers);
  std::ostringstream report;
  write_table_report(report, cells, cfg.model == "jansen_rit");
  {
    auto os = open_out(out_path(cfg, "table.txt"));
    os << report.str();
  }
  std::cout << report.str();
  for (const auto& cell : cells) {
    if (!cell.error.empty()) return kRuntimeError;
  }
  return kOk;
}

int cmd_sample(const Common& c, std::optional<std::size_t> m) {
  const ExperimentConfig cfg = load(c);
  const ParamBox theta = ParamBox::from_bounds(cfg.theta_lower, cfg.theta_upper);
  const SampledParamSet grid = grid_sample(theta, m.value_or(cfg.m));
  if (c.out.empty()) {
    write_grid_csv(std::cout, grid);
  } else {
    auto os = open_out(out_path(cfg, "grid.csv"));
    write_grid_csv(os, grid);
    if (!c.quiet) std::cout << "grid: " << out_path(cfg, "grid.csv").string() << '\n';
  }
  return kOk;
}

LureMatrices matrices_for(const GainCertificateFile& f, const std::optional<Experiment>& exp) {
  if (f.plant) return *f.plant;
  if (!exp || !exp->lure) {
    throw Error(Errc::ConfigError, "certificate has no plant matrices; pass --config for a Jansen-Rit plant");
  }
  return LureMatrices::of(*exp->lure, f.parameter);
}

int cmd_verify_lmi(const Common& c, const std::string& cert_path) {
  std::optional<Experiment> exp;
  if (!c.config.empty()) exp = Experiment::from_config(load(c));
  const auto certs = read_certificates(cert_path);
  if (certs.empty()) throw Error(Errc::ConfigError, "no certificates in " + cert_path);
  int rc = kOk;
  std::cout.precision(17);
  for (std::size_t i = 0; i < certs.size(); ++i) {
    const auto& f = certs[i];
    if (f.class_tag != "circle_criterion") {
      std::cout << "certificate " << i << ": skipped (class " << f.class_tag << ")\n";
      continue;
    }
    try {
      const CCCertificate cert = verify_cc_gains(f.lmi, matrices_for(f, exp));
      std::cout << "certificate " << i << ": CERTIFIED, max eig = " << cert.max_eig
                << " (tol " << cert.tol << ", equilibrated " << cert.equilibrated_max_eig << ")\n";
    } catch (const Error& e) {
      if (e.code() == Errc::ConfigError) throw;
      std::cout << "certificate " << i << ": REJECTED, " << e.what() << '\n';
      rc = kRuntimeError;
    }
  }
  return rc;
}

int cmd_synthesize(const Common& c, std::optional<std::size_t> m) {
  const ExperimentConfig cfg = load(c);
  const Experiment exp = Experiment::from_config(cfg);
  if (!exp.lure) throw Error(Errc::ConfigError, "synthesize-gains needs a circle-criterion plant (jansen_rit)");
  const SampledParamSet grid = grid_sample(exp.theta, m.value_or(cfg.m));
  CircleCriterionDesigner::Options opts;
  opts.search.budget = cfg.budget;
  opts.search.seed = cfg.synthesis_seed;
  opts.search.allow_k = cfg.allow_k;
  std::vector<CCLmiData> recent;
  std::vector<GainCertificateFile> files;
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    CCSearchConfig search = opts.search;
    search.warm_starts = recent;
    const CCCertificate cert =
        synthesize_cc_gains(LureMatrices::of(*exp.lure, grid.points[i]), exp.lure->sector_upper(), search);
    if (recent.empty() || cert.source != "warm-start") recent.insert(recent.begin(), cert.data);
    files.push_back(to_file(cert, grid.points[i],
                            "synthesize-gains seed=" + std::to_string(cfg.synthesis_seed) + " source=" + cert.source));
    if (!c.quiet) {
      std::cout << "point " << i + 1 << ": " << cert.source << ", max eig " << cert.max_eig << ", equilibrated "
                << cert.equilibrated_max_eig << '\n';
    }
  }
  const std::string name = cfg.certificates_file.empty() ? "gains.cert" : cfg.certificates_file;
  const fs::path p = out_path(cfg, name);
  write_certificates(p.string(), files);
  std::cout << "certificates: " << p.string() << '\n';
  return kOk;
}

int cmd_pe_check(const Common& c, const std::string& trace_path, std::optional<double> window) {
  std::optional<ExperimentConfig> cfg;
  if (!c.config.empty()) cfg = load(c);
  if (!window) {
    if (!cfg) throw Error(Errc::ConfigError, "pe-check needs --window or --config (window = 5 / monitor.lambda)");
    window = 5.0 / cfg->lambda;
  }
  std::ifstream is(trace_path);
  if (!is) throw Error(Errc::IoError, "cannot open " + trace_path);
  const OutputErrorTable tab = read_output_errors_csv(is);
  const PEReport rep = pe_scatter(tab.t, tab.y_err, tab.err_p_inf, *window);
  const std::string out_dir = !c.out.empty() ? c.out : (cfg ? cfg->out_dir : std::string("."));
  fs::create_directories(out_dir);
  const fs::path p = fs::path(out_dir) / "pe_report.csv";
  {
    auto os = open_out(p);
    write_pe_report_csv(os, rep);
  }
  if (!c.quiet) write_pe_report_csv(std::cout, rep);
  std::cout << "window=" << *window << " spearman=" << rep.spearman << " report: " << p.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Supervisory multi-observer for joint parameter and state estimation"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config, "experiment config (INI)");
    sub->add_option("--out", common.out, "output directory (overrides output.dir)");
    sub->add_option("--seed", common.seed, "input seed (overrides input.seed)");
    sub->add_flag("--quiet", common.quiet, "less output");
  };

  std::string mode;
  std::optional<std::size_t> m;
  bool output_errors = false;
  auto* simulate = app.add_subcommand("simulate", "run one estimation experiment and write the trace CSV");
  add_common(simulate);
  simulate->add_option("--mode", mode, "static or dynamic (overrides sampling.mode)")
      ->check(CLI::IsMember({"static", "dynamic"}));
  simulate->add_option("--m", m, "points per dimension (overrides sampling.m)");
  simulate->add_flag("--output-errors", output_errors, "also write per-observer output errors");

  std::size_t workers = 0;
  auto* table = app.add_subcommand("table", "sweep m and sampling modes, report final errors");
  add_common(table);
  table->add_option("--workers", workers, "parallel runs (default table.workers or all cores)");

  auto* sample = app.add_subcommand("sample", "write the parameter grid as CSV");
  add_common(sample);
  sample->add_option("--m", m, "points per dimension (overrides sampling.m)");

  std::string cert_path;
  auto* verify = app.add_subcommand("verify-lmi", "verify circle-criterion certificates");
  add_common(verify);
  verify->add_option("certificates", cert_path, "certificate file")->required();

  auto* synth = app.add_subcommand("synthesize-gains", "synthesize certified gains over the grid");
  add_common(synth);
  synth->add_option("--m", m, "points per dimension (overrides sampling.m)");

  std::string trace_path;
  std::optional<double> window;
  auto* pe = app.add_subcommand("pe-check", "windowed output-error energy report");
  add_common(pe);
  pe->add_option("trace", trace_path, "output-error CSV from simulate --output-errors")->required();
  pe->add_option("--window", window, "window length T_f in seconds (default 5 / monitor.lambda)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*simulate) return cmd_simulate(common, mode, m, output_errors);
    if (*table) return cmd_table(common, workers);
    if (*sample) return cmd_sample(common, m);
    if (*verify) return cmd_verify_lmi(common, cert_path);
    if (*synth) return cmd_synthesize(common, m);
    if (*pe) return cmd_pe_check(common, trace_path, window);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::ConfigError ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}

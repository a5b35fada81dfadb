#include "supobs/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <thread>

#include "supobs/certificate_io.hpp"
#include "supobs/errors.hpp"

namespace supobs {

namespace {

Vec broadcast(const Vec& v, std::size_t n) {
  if (v.size() == 1) return Vec::Constant(static_cast<Eigen::Index>(n), v(0));
  return v;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  return format_double(v);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(Errc::InvalidTrace, "bad CSV number '" + s + "'");
  return v;
}

}  // namespace

Experiment Experiment::from_config(const ExperimentConfig& cfg) {
  cfg.validate();
  Experiment e;
  e.config = cfg;
  if (cfg.model == "jansen_rit") {
    e.lure = jansen_rit_plant(cfg.jansen_rit);
    e.plant = e.lure;
  } else {
    e.linear = scalar_linear_plant();
    e.plant = e.linear;
  }
  e.theta = ParamBox::from_bounds(cfg.theta_lower, cfg.theta_upper);
  RunSetup& s = e.setup;
  s.plant = e.plant;
  s.plant_parameter = cfg.p_star;
  s.reference_parameter = cfg.p_star;
  s.x0 = broadcast(cfg.x0, e.plant->nx());
  s.xhat0 = broadcast(cfg.xhat0, e.plant->nx());
  s.input = cfg.input;
  s.input.nu = e.plant->nu();
  s.lambda = cfg.lambda;
  s.sim = SimConfig::make(cfg.dt, cfg.t_final, std::nullopt, cfg.record_stride);
  s.guard = cfg.guard;
  return e;
}

std::unique_ptr<ObserverDesigner> Experiment::make_designer() const {
  if (config.observer_class == "luenberger") {
    std::vector<Complex> targets;
    for (double p : config.poles) targets.emplace_back(p, 0.0);
    return std::make_unique<LuenbergerDesigner>(linear, std::move(targets), config.nu);
  }
  CircleCriterionDesigner::Options opts;
  opts.search.budget = config.budget;
  opts.search.seed = config.synthesis_seed;
  opts.search.allow_k = config.allow_k;
  opts.certify = config.certify;
  if (!config.gain_file.empty()) {
    for (const auto& c : read_certificates(config.gain_file)) {
      if (c.class_tag == "circle_criterion") opts.table.add(c.parameter, c.lmi);
    }
  }
  return std::make_unique<CircleCriterionDesigner>(lure, std::move(opts));
}

ExperimentRun run_experiment(const Experiment& exp, std::optional<SamplingMode> mode, std::optional<std::size_t> m,
                             bool record_output_errors) {
  ExperimentRun r;
  r.mode = mode.value_or(exp.config.mode);
  r.m = m.value_or(exp.config.m);
  RunSetup setup = exp.setup;
  setup.record_output_errors = record_output_errors;
  auto designer = exp.make_designer();
  if (r.mode == SamplingMode::Static) {
    r.trace = run_static(setup, grid_sample(exp.theta, r.m), *designer);
  } else {
    if (!exp.config.alpha || !exp.config.Td) throw Error(Errc::ConfigError, "sampling: dynamic mode requires alpha and Td");
    DynamicOptions opts{exp.theta, r.m, *exp.config.alpha, *exp.config.Td};
    r.trace = run_dynamic(setup, opts, *designer);
  }
  return r;
}

std::vector<std::string> trace_columns(std::size_t np, std::size_t nx) {
  std::vector<std::string> c{"t", "sigma"};
  for (std::size_t j = 1; j <= np; ++j) c.push_back("p_hat_" + std::to_string(j));
  for (std::size_t j = 1; j <= nx; ++j) c.push_back("x_hat_" + std::to_string(j));
  for (std::size_t j = 1; j <= nx; ++j) c.push_back("x_" + std::to_string(j));
  for (const char* s : {"mu_min", "err_p_inf", "err_x_inf", "zoom_k"}) c.emplace_back(s);
  return c;
}

void write_trace_csv(std::ostream& os, const SupervisorTrace& trace) {
  const auto cols = trace_columns(trace.np, trace.nx);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const TraceRow& r : trace.rows) {
    os << num(r.t) << ',' << r.sigma;
    for (Eigen::Index j = 0; j < r.p_hat.size(); ++j) os << ',' << num(r.p_hat(j));
    for (Eigen::Index j = 0; j < r.x_hat.size(); ++j) os << ',' << num(r.x_hat(j));
    for (Eigen::Index j = 0; j < r.x.size(); ++j) os << ',' << num(r.x(j));
    os << ',' << num(r.mu_min) << ',' << num(r.err_p_inf) << ',' << num(r.err_x_inf) << ',' << r.zoom_k << '\n';
  }
}

void write_output_errors_csv(std::ostream& os, const SupervisorTrace& trace) {
  os << 't';
  for (std::size_t i = 1; i <= trace.observers; ++i) {
    os << ",err_p_inf_" << i;
    for (std::size_t j = 1; j <= trace.ny; ++j) os << ",ytilde_" << i << '_' << j;
  }
  os << '\n';
  for (const TraceRow& r : trace.rows) {
    if (r.y_err.size() != trace.observers) throw Error(Errc::InvalidTrace, "output errors were not recorded");
    os << num(r.t);
    for (std::size_t i = 0; i < trace.observers; ++i) {
      os << ',' << num(r.err_p_i[i]);
      for (Eigen::Index j = 0; j < r.y_err[i].size(); ++j) os << ',' << num(r.y_err[i](j));
    }
    os << '\n';
  }
}

OutputErrorTable read_output_errors_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::InvalidTrace, "empty CSV");
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "t") throw Error(Errc::InvalidTrace, "first column must be t");
  // column layout: per observer an err_p_inf_i column followed by its ytilde_i_j columns
  std::vector<std::size_t> err_col;
  std::vector<std::vector<std::size_t>> y_cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    if (header[c].rfind("err_p_inf_", 0) == 0) {
      err_col.push_back(c);
      y_cols.emplace_back();
    } else if (header[c].rfind("ytilde_", 0) == 0 && !y_cols.empty()) {
      y_cols.back().push_back(c);
    } else {
      throw Error(Errc::InvalidTrace, "unexpected column '" + header[c] + "'");
    }
  }
  if (err_col.empty()) throw Error(Errc::InvalidTrace, "no observer columns");
  OutputErrorTable out;
  out.y_err.resize(err_col.size());
  out.err_p_inf.assign(err_col.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw Error(Errc::InvalidTrace, "line " + std::to_string(lineno) + ": wrong number of cells");
    }
    out.t.push_back(parse_cell(cells[0]));
    for (std::size_t i = 0; i < err_col.size(); ++i) {
      out.err_p_inf[i] = parse_cell(cells[err_col[i]]);
      Vec y(static_cast<Eigen::Index>(y_cols[i].size()));
      for (std::size_t j = 0; j < y_cols[i].size(); ++j) y(static_cast<Eigen::Index>(j)) = parse_cell(cells[y_cols[i][j]]);
      out.y_err[i].push_back(std::move(y));
    }
  }
  return out;
}

void write_zoom_csv(std::ostream& os, const SupervisorTrace& trace) {
  os << "k,t,sigma_left";
  for (std::size_t j = 1; j <= trace.np; ++j) os << ",p_hat_left_" << j;
  for (std::size_t j = 1; j <= trace.np; ++j) os << ",lower_" << j << ",upper_" << j;
  os << ",volume,nested,err_p_left_inf,reference_contained,max_state_jump,max_mu_after_reset\n";
  for (const ZoomEvent& z : trace.zooms) {
    os << z.k << ',' << num(z.t) << ',' << z.sigma_left;
    for (Eigen::Index j = 0; j < z.p_hat_left.size(); ++j) os << ',' << num(z.p_hat_left(j));
    const Vec lo = z.box_after.lower(), hi = z.box_after.upper();
    for (Eigen::Index j = 0; j < lo.size(); ++j) os << ',' << num(lo(j)) << ',' << num(hi(j));
    os << ',' << num(z.volume_after) << ',' << (z.nested ? 1 : 0) << ',' << num(z.err_p_left_inf) << ','
       << (z.reference_contained ? (*z.reference_contained ? "1" : "0") : "") << ',' << num(z.max_state_jump) << ','
       << num(z.max_mu_after_reset) << '\n';
  }
}

void write_grid_csv(std::ostream& os, const SampledParamSet& grid) {
  os << "index";
  for (std::size_t j = 1; j <= grid.parent.dim(); ++j) os << ",p_" << j;
  os << '\n';
  for (std::size_t i = 0; i < grid.points.size(); ++i) {
    os << i + 1;
    for (Eigen::Index j = 0; j < grid.points[i].size(); ++j) os << ',' << num(grid.points[i](j));
    os << '\n';
  }
}

void write_pe_report_csv(std::ostream& os, const PEReport& rep) {
  os << "observer,err_p_inf,min_energy,alpha_bar,window\n";
  for (std::size_t i = 0; i < rep.observers.size(); ++i) {
    const auto& o = rep.observers[i];
    os << i + 1 << ',' << num(o.err_p_inf) << ',' << num(o.min_energy) << ',' << num(o.alpha_bar) << ','
       << num(rep.window) << '\n';
  }
}

std::string summary_line(const ExperimentRun& run) {
  const RunSummary& s = run.trace.summary;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "mode=%s m=%zu sigma=%zu |p_err|_inf=%.6g |p_err|_2=%.6g |x_err|_inf=%.6g |x_err|_2=%.6g "
                "normalized_x_err=%.6g zooms=%zu wall=%.2fs",
                mode_name(run.mode).c_str(), run.m, s.sigma, s.err_p_inf, s.err_p_2, s.err_x_inf, s.err_x_2,
                s.normalized_state_error, s.zoom_count, s.wall_seconds);
  return buf;
}

std::vector<TableCell> run_table(const Experiment& exp, std::size_t workers) {
  std::vector<TableCell> cells;
  for (std::size_t m : exp.config.table_m_values) {
    for (SamplingMode mode : exp.config.table_modes) cells.push_back(TableCell{mode, m, {}, {}});
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        cells[i].summary = run_experiment(exp, cells[i].mode, cells[i].m).trace.summary;
      } catch (const std::exception& e) {
        cells[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return cells;
}

void write_table_report(std::ostream& os, const std::vector<TableCell>& cells, bool jansen_rit_reference) {
  std::vector<std::size_t> ms;
  std::vector<SamplingMode> modes;
  for (const auto& c : cells) {
    if (std::find(ms.begin(), ms.end(), c.m) == ms.end()) ms.push_back(c.m);
    if (std::find(modes.begin(), modes.end(), c.mode) == modes.end()) modes.push_back(c.mode);
  }
  auto find = [&](SamplingMode mode, std::size_t m) -> const TableCell* {
    for (const auto& c : cells) {
      if (c.mode == mode && c.m == m) return &c;
    }
    return nullptr;
  };
  auto cell = [](double v) {
    std::ostringstream s;
    s << std::setw(10) << std::fixed << std::setprecision(4) << v;
    return s.str();
  };

  os << std::left << std::setw(34) << "N = m^n_p" << std::right;
  for (std::size_t m : ms) os << std::setw(10) << ("m=" + std::to_string(m));
  os << '\n';
  const struct {
    const char* label;
    double RunSummary::*field;
  } rows[] = {{"|p_err(t_f)|_2", &RunSummary::err_p_2},
              {"|p_err(t_f)|_inf", &RunSummary::err_p_inf},
              {"|x_err(t_f)|_2 / (max|x| - min|x|)", &RunSummary::normalized_state_error}};
  for (const auto& row : rows) {
    for (SamplingMode mode : modes) {
      os << std::left << std::setw(34) << (mode_name(mode) + " " + row.label) << std::right;
      for (std::size_t m : ms) {
        const TableCell* c = find(mode, m);
        os << (c && c->error.empty() ? cell(c->summary.*(row.field)) : std::string("       n/a"));
      }
      os << '\n';
    }
  }
  if (jansen_rit_reference) {
    // reference values for m = 2, 4, 5 at t_f = 100 s
    os << "reference |p_err(t_f)|_2 for m=2,4,5: static 4.30 3.80 2.55; dynamic 2.66 1.04 0.72\n";
    os << "reference normalized state error for m=2,4,5: static 4.01 1.73 4.64; dynamic 4.26 3.47 3.22\n";
  }
  for (const auto& c : cells) {
    if (!c.error.empty()) os << mode_name(c.mode) << " m=" << c.m << " failed: " << c.error << '\n';
  }
}

}  // namespace supobs

#include "supobs/supervisor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "supobs/errors.hpp"

namespace supobs {

double monitor_rhs(double mu, const Vec& y_err, double lambda) {
  const double e = y_err.size() ? y_err.cwiseAbs().maxCoeff() : 0.0;
  return -lambda * mu + e * e;
}

void monitor_reset(MonitorBank& bank) { bank.mu.setZero(); }

std::size_t select(const Vec& mu) {
  if (mu.size() == 0) throw Error(Errc::InvalidArgument, "selection needs N >= 1");
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < mu.size(); ++i) {
    if (mu(i) < mu(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

LuenbergerDesigner::LuenbergerDesigner(std::shared_ptr<const LinearPlant> plant, std::vector<Complex> targets,
                                       double nu)
    : plant_(std::move(plant)), targets_(std::move(targets)), nu_(nu) {
  if (!plant_) throw Error(Errc::InvalidArgument, "designer needs a plant");
}

ObserverPtr LuenbergerDesigner::design(std::size_t, const Vec& p) {
  const LuenbergerDesign d = design_luenberger(plant_->A(p), plant_->C(p), targets_, nu_);
  return LuenbergerObserver::at(*plant_, p, d.L, d.certificate);
}

CircleCriterionDesigner::CircleCriterionDesigner(std::shared_ptr<const LurePlant> plant, Options opts)
    : plant_(std::move(plant)), opts_(std::move(opts)) {
  if (!plant_) throw Error(Errc::InvalidArgument, "designer needs a plant");
}

ObserverPtr CircleCriterionDesigner::design(std::size_t slot, const Vec& p) {
  const auto nx = static_cast<Eigen::Index>(plant_->nx());
  const auto ny = static_cast<Eigen::Index>(plant_->ny());
  const auto ng = static_cast<Eigen::Index>(plant_->ngamma());
  if (!opts_.certify) {
    CircleCriterionObserver::Gains g{Mat::Zero(ng, ny), Mat::Zero(nx, ny)};
    return std::make_shared<const CircleCriterionObserver>(plant_, p, std::move(g));
  }

  if (by_slot_.size() <= slot) by_slot_.resize(slot + 1);
  CCSearchConfig search = opts_.search;
  search.warm_starts.clear();
  if (by_slot_[slot]) search.warm_starts.push_back(*by_slot_[slot]);
  for (const auto& r : recent_) search.warm_starts.push_back(r);
  const auto order = opts_.table.nearest_order(p);
  for (std::size_t j = 0; j < order.size() && j < 4; ++j) search.warm_starts.push_back(opts_.table.entries[order[j]]);
  search.seed = opts_.search.seed + syntheses_;

  const LureMatrices mats = LureMatrices::of(*plant_, p);
  const CCCertificate cert = synthesize_cc_gains(mats, plant_->sector_upper(), search);
  if (cert.source != "warm-start") {
    ++syntheses_;
    std::ostringstream os;
    os.precision(6);
    os << "slot " << slot << ": synthesized gains (" << cert.source << ", candidate " << cert.candidate
       << ", equilibrated max eig " << cert.equilibrated_max_eig << ")";
    log_.push_back(os.str());
  }
  by_slot_[slot] = cert.data;
  recent_.insert(recent_.begin(), cert.data);
  if (recent_.size() > opts_.recent) recent_.pop_back();

  CircleCriterionObserver::Gains g{cert.data.K, cert.data.L};
  return std::make_shared<const CircleCriterionObserver>(plant_, p, std::move(g), cert.assumption2());
}

std::vector<std::string> CircleCriterionDesigner::take_log() {
  std::vector<std::string> out;
  out.swap(log_);
  return out;
}

namespace {

class CompositeField final : public VectorField {
 public:
  CompositeField(const PlantModel& plant, const Vec& p, const ObserverBank& bank, const InputSpec& input,
                 double lambda)
      : plant_(plant), p_(p), bank_(bank), input_(input), lambda_(lambda), layout_{plant.nx(), bank.size()} {
    y_.resize(static_cast<Eigen::Index>(plant.ny()));
    yhat_.resize(y_.size());
    dxi_.resize(static_cast<Eigen::Index>(plant.nx()));
    xi_.resize(dxi_.size());
    dx_.resize(dxi_.size());
  }

  std::size_t dimension() const override { return layout_.size(); }

  void begin_step(double t, const Vec&) override {
    if (input_.piecewise_constant()) u_ = input_.value(t);
  }

  void evaluate(double t, const Vec& z, Vec& dz) override {
    if (!input_.piecewise_constant() || u_.size() == 0) u_ = input_.value(t);
    const Vec x = layout_.plant(z);
    plant_.h(x, p_, y_);
    plant_.f(x, p_, u_, dx_);
    layout_.plant(dz) = dx_;
    const auto mon = layout_.monitor_offset();
    for (std::size_t i = 0; i < bank_.size(); ++i) {
      const StateObserver& obs = bank_.observer(i);
      xi_ = layout_.observer(z, i);
      obs.rhs(xi_, u_, y_, dxi_);
      layout_.observer(dz, i) = dxi_;
      obs.output(xi_, yhat_);
      yhat_ -= y_;
      const auto mi = static_cast<Eigen::Index>(mon + i);
      dz(mi) = monitor_rhs(z(mi), yhat_, lambda_);
    }
  }

  const CompositeLayout& layout() const { return layout_; }

 private:
  const PlantModel& plant_;
  const Vec& p_;
  const ObserverBank& bank_;
  InputSignal input_;
  double lambda_;
  CompositeLayout layout_;
  Vec u_, y_, yhat_, xi_, dxi_, dx_;
};

double inf_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct ZoomContext {
  ZoomState zoom;
  std::size_t m = 1;
  ObserverDesigner* designer = nullptr;
};

SupervisorTrace run_impl(const RunSetup& s, ObserverBank& bank, ZoomContext* zc) {
  if (!s.plant) throw Error(Errc::InvalidArgument, "run needs a plant");
  const PlantModel& plant = *s.plant;
  const std::size_t nx = plant.nx();
  if (static_cast<std::size_t>(s.x0.size()) != nx || static_cast<std::size_t>(s.xhat0.size()) != nx) {
    throw Error(Errc::DimensionMismatch, "initial conditions must have n_x entries");
  }
  if (static_cast<std::size_t>(s.plant_parameter.size()) != plant.np()) {
    throw Error(Errc::DimensionMismatch, "plant parameter must have n_p entries");
  }
  if (s.reference_parameter && static_cast<std::size_t>(s.reference_parameter->size()) != plant.np()) {
    throw Error(Errc::DimensionMismatch, "reference parameter must have n_p entries");
  }
  if (!(s.lambda > 0.0)) throw Error(Errc::InvalidArgument, "monitor lambda must be > 0");
  if (s.input.nu != plant.nu()) throw Error(Errc::DimensionMismatch, "input dimension differs from the plant");
  if (bank.size() == 0) throw Error(Errc::InvalidArgument, "observer bank is empty");

  const auto clock_start = std::chrono::steady_clock::now();
  const std::size_t n_obs = bank.size();
  CompositeField field(plant, s.plant_parameter, bank, s.input, s.lambda);
  const CompositeLayout layout = field.layout();

  SupervisorTrace trace;
  trace.np = plant.np();
  trace.nx = nx;
  trace.ny = plant.ny();
  trace.observers = n_obs;
  for (const auto& o : bank.observers()) trace.initial_parameters.push_back(o->parameter());

  Vec z(static_cast<Eigen::Index>(layout.size()));
  z.setZero();
  layout.plant(z) = s.x0;
  for (std::size_t i = 0; i < n_obs; ++i) layout.observer(z, i) = s.xhat0;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto err_p = [&](const Vec& p) { return s.reference_parameter ? inf_norm(p - *s.reference_parameter) : nan; };

  BoundednessMonitor guard;
  guard.threshold = s.guard;
  double xnorm_min = s.x0.norm();
  double xnorm_max = xnorm_min;

  auto record = [&](std::size_t, double t, const Vec& zz) {
    TraceRow row;
    row.t = t;
    row.mu = layout.monitors(zz);
    const std::size_t sig = select(row.mu);
    row.sigma = sig + 1;
    row.p_hat = bank.observer(sig).parameter();
    row.x_hat = layout.observer(zz, sig);
    row.x = layout.plant(zz);
    row.mu_min = row.mu(static_cast<Eigen::Index>(sig));
    row.err_p_inf = err_p(row.p_hat);
    row.err_x_inf = inf_norm(row.x_hat - row.x);
    row.zoom_k = zc ? zc->zoom.k : 0;
    if (s.record_output_errors) {
      const Vec y = plant.h(row.x, s.plant_parameter);
      for (std::size_t i = 0; i < n_obs; ++i) {
        row.y_err.push_back(bank.observer(i).output(Vec(layout.observer(zz, i))) - y);
        row.err_p_i.push_back(err_p(bank.observer(i).parameter()));
      }
    }
    trace.rows.push_back(std::move(row));
  };

  auto step = [&](double, const Vec& zz) {
    guard.check(zz.head(static_cast<Eigen::Index>(layout.monitor_offset())));
    const double xn = layout.plant(zz).norm();
    xnorm_min = std::min(xnorm_min, xn);
    xnorm_max = std::max(xnorm_max, xn);
  };

  EventFn event;
  if (zc) {
    event = [&](std::size_t, double t, Vec& zz) {
      ZoomEvent ev;
      ev.t = t;
      const std::size_t sig = select(Vec(layout.monitors(zz)));
      ev.sigma_left = sig + 1;
      ev.p_hat_left = bank.observer(sig).parameter();
      ev.err_p_left_inf = err_p(ev.p_hat_left);
      ev.box_before = zc->zoom.current_box;
      const Vec before = zz.head(static_cast<Eigen::Index>(layout.monitor_offset()));

      const SampledParamSet grid = zoom_update(zc->zoom, ev.p_hat_left, zc->m, t);
      for (std::size_t i = 0; i < n_obs; ++i) bank.replace(i, zc->designer->design(i, grid.points[i]));
      layout.monitors(zz).setZero();

      ev.k = zc->zoom.k;
      ev.box_after = zc->zoom.current_box;
      ev.nested = ev.box_before.contains(ev.box_after);
      ev.volume_before = ev.box_before.volume();
      ev.volume_after = ev.box_after.volume();
      ev.max_state_jump = inf_norm(zz.head(before.size()) - before);
      ev.max_mu_after_reset = inf_norm(Vec(layout.monitors(zz)));
      if (s.reference_parameter) ev.reference_contained = ev.box_after.contains(*s.reference_parameter);
      ev.parameters_after = grid.points;
      for (auto& line : zc->designer->take_log()) trace.log.push_back("t=" + std::to_string(t) + " " + line);
      trace.zooms.push_back(std::move(ev));
    };
  }

  guard.check(z.head(static_cast<Eigen::Index>(layout.monitor_offset())));
  const RunResult res = run(s.sim, field, z, event, record, step);

  RunSummary& sum = trace.summary;
  const TraceRow& last = trace.rows.back();
  sum.sigma = last.sigma;
  sum.p_hat = last.p_hat;
  sum.err_p_inf = last.err_p_inf;
  sum.err_p_2 = s.reference_parameter ? (last.p_hat - *s.reference_parameter).norm() : nan;
  sum.err_x_inf = last.err_x_inf;
  sum.err_x_2 = (last.x_hat - last.x).norm();
  const double spread = xnorm_max - xnorm_min;
  sum.normalized_state_error = spread > 0.0 ? sum.err_x_2 / spread : nan;
  sum.zoom_count = res.events;
  sum.max_abs_state = guard.max_abs_seen;
  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return trace;
}

ObserverBank build_bank(const RunSetup& s, const std::vector<Vec>& points, ObserverDesigner& designer) {
  std::vector<ObserverPtr> obs;
  obs.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) obs.push_back(designer.design(i, points[i]));
  return ObserverBank(std::move(obs), std::vector<Vec>(points.size(), s.xhat0));
}

}  // namespace

SupervisorTrace run_bank(const RunSetup& setup, ObserverBank bank) {
  RunSetup s = setup;
  s.sim.event_period.reset();
  return run_impl(s, bank, nullptr);
}

SupervisorTrace run_static(const RunSetup& setup, const SampledParamSet& grid, ObserverDesigner& designer) {
  RunSetup s = setup;
  s.sim.event_period.reset();
  ObserverBank bank = build_bank(s, grid.points, designer);
  SupervisorTrace trace = run_impl(s, bank, nullptr);
  auto log = designer.take_log();
  trace.log.insert(trace.log.begin(), log.begin(), log.end());
  return trace;
}

SupervisorTrace run_dynamic(const RunSetup& setup, const DynamicOptions& opts, ObserverDesigner& designer) {
  if (!(opts.Td > 0.0)) throw Error(Errc::InvalidArgument, "Td must be > 0");
  RunSetup s = setup;
  std::vector<std::string> notes;
  s.sim = SimConfig::make(setup.sim.dt, setup.sim.t_final, opts.Td, setup.sim.record_stride, &notes);
  ZoomContext zc;
  zc.zoom = ZoomState::start(opts.theta, opts.alpha);
  zc.m = opts.m;
  zc.designer = &designer;
  const SampledParamSet grid = grid_sample(opts.theta, opts.m);
  ObserverBank bank = build_bank(s, grid.points, designer);
  auto log = designer.take_log();
  SupervisorTrace trace = run_impl(s, bank, &zc);
  trace.log.insert(trace.log.begin(), log.begin(), log.end());
  trace.log.insert(trace.log.begin(), notes.begin(), notes.end());
  return trace;
}

}  // namespace supobs

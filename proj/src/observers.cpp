#include "supobs/observers.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "supobs/errors.hpp"

namespace supobs {

Assumption2Certificate Assumption2Certificate::from_quadratic(const Mat& p, double nu) {
  if (!(nu > 0.0)) throw Error(Errc::InvalidArgument, "nu must be positive");
  const SymEig e = sym_eig(p);
  const double lmin = e.eigenvalues(0);
  const double lmax = e.eigenvalues(e.eigenvalues.size() - 1);
  if (!(lmin > 0.0)) throw Error(Errc::BadP, "P is not positive definite");
  Assumption2Certificate c;
  c.P = p;
  c.a1 = lmin;
  c.a2 = static_cast<double>(p.rows()) * lmax;
  c.lambda0 = nu / (2.0 * lmax);
  return c;
}

LuenbergerObserver::LuenbergerObserver(Vec p, Mat a, Mat b, Mat c, Mat l, std::optional<Assumption2Certificate> cert)
    : p_(std::move(p)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), l_(std::move(l)), cert_(std::move(cert)) {
  if (a_.rows() != a_.cols() || b_.rows() != a_.rows() || c_.cols() != a_.rows() || l_.rows() != a_.rows() ||
      l_.cols() != c_.rows()) {
    throw Error(Errc::DimensionMismatch, "Luenberger observer matrices have inconsistent shapes");
  }
  if (!is_hurwitz(a_ + l_ * c_)) throw Error(Errc::NotHurwitz, "A + L C is not Hurwitz");
}

std::shared_ptr<const LuenbergerObserver> LuenbergerObserver::at(const LinearPlant& plant, const Vec& p, const Mat& l,
                                                                 std::optional<Assumption2Certificate> cert) {
  return std::make_shared<const LuenbergerObserver>(p, plant.A(p), plant.B(p), plant.C(p), l, std::move(cert));
}

void LuenbergerObserver::rhs(const Vec& xhat, const Vec& u, const Vec& y, Vec& dxhat) const {
  dxhat.noalias() = a_ * xhat;
  dxhat.noalias() += b_ * u;
  const Vec innov = c_ * xhat - y;
  dxhat.noalias() += l_ * innov;
}

void LuenbergerObserver::output(const Vec& xhat, Vec& yhat) const { yhat.noalias() = c_ * xhat; }

CircleCriterionObserver::CircleCriterionObserver(std::shared_ptr<const LurePlant> plant, Vec p, Gains gains,
                                                 std::optional<Assumption2Certificate> cert)
    : plant_(std::move(plant)), p_(std::move(p)), gains_(std::move(gains)), cert_(std::move(cert)) {
  if (!plant_) throw Error(Errc::InvalidArgument, "circle-criterion observer needs a plant");
  a_ = plant_->A(p_);
  g_ = plant_->G(p_);
  b_ = plant_->B(p_);
  c_ = plant_->C(p_);
  const auto nx = static_cast<Eigen::Index>(plant_->nx());
  const auto ny = static_cast<Eigen::Index>(plant_->ny());
  const auto ng = static_cast<Eigen::Index>(plant_->ngamma());
  if (gains_.K.rows() != ng || gains_.K.cols() != ny || gains_.L.rows() != nx || gains_.L.cols() != ny) {
    throw Error(Errc::DimensionMismatch, "gain shapes do not match the plant");
  }
}

void CircleCriterionObserver::rhs(const Vec& xhat, const Vec& u, const Vec& y, Vec& dxhat) const {
  const Vec innov = c_ * xhat - y;
  const Vec w = plant_->H() * xhat + gains_.K * innov;
  dxhat.noalias() = a_ * xhat;
  dxhat.noalias() += g_ * plant_->gamma(w);
  dxhat.noalias() += b_ * plant_->phi(u, y);
  dxhat.noalias() += gains_.L * innov;
}

void CircleCriterionObserver::output(const Vec& xhat, Vec& yhat) const { yhat.noalias() = c_ * xhat; }

Vec luenberger_rhs(const LuenbergerObserver& obs, const Vec& xhat, const Vec& u, const Vec& y) {
  return obs.rhs(xhat, u, y);
}

Vec circle_criterion_rhs(const CircleCriterionObserver& obs, const Vec& xhat, const Vec& u, const Vec& y) {
  return obs.rhs(xhat, u, y);
}

ObserverBank::ObserverBank(std::vector<ObserverPtr> observers, std::vector<Vec> states)
    : observers_(std::move(observers)), states_(std::move(states)) {
  if (observers_.empty()) throw Error(Errc::InvalidArgument, "observer bank needs N >= 1");
  if (states_.size() != observers_.size()) throw Error(Errc::DimensionMismatch, "one state per observer required");
  const std::size_t nx = observers_.front()->nx();
  const std::size_t ny = observers_.front()->ny();
  const auto tag = observers_.front()->class_tag();
  for (std::size_t i = 0; i < observers_.size(); ++i) {
    if (!observers_[i]) throw Error(Errc::InvalidArgument, "null observer");
    if (observers_[i]->nx() != nx || observers_[i]->ny() != ny) {
      throw Error(Errc::DimensionMismatch, "observers disagree on plant dimensions");
    }
    if (observers_[i]->class_tag() != tag) throw Error(Errc::InvalidArgument, "observer bank must be homogeneous");
    if (static_cast<std::size_t>(states_[i].size()) != nx) throw Error(Errc::DimensionMismatch, "observer state size");
  }
}

void ObserverBank::replace(std::size_t i, ObserverPtr obs) {
  if (!obs) throw Error(Errc::InvalidArgument, "null observer");
  const auto& old = observers_.at(i);
  if (obs->nx() != old->nx() || obs->ny() != old->ny() || obs->class_tag() != old->class_tag()) {
    throw Error(Errc::DimensionMismatch, "replacement observer does not match the bank");
  }
  observers_[i] = std::move(obs);
}

std::vector<Vec> bank_output_errors(const ObserverBank& bank, const Vec& y) {
  std::vector<Vec> out;
  out.reserve(bank.size());
  for (std::size_t i = 0; i < bank.size(); ++i) {
    Vec e = bank.observer(i).output(bank.states()[i]);
    if (e.size() != y.size()) throw Error(Errc::DimensionMismatch, "output size differs from observer");
    e -= y;
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

Vec uniform_in_box(std::mt19937_64& gen, Eigen::Index n, double radius) {
  std::uniform_real_distribution<double> d(-radius, radius);
  Vec v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = d(gen);
  return v;
}

Vec uniform_in_box(std::mt19937_64& gen, const ParamBox& box) {
  Vec v(box.center.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    std::uniform_real_distribution<double> d(box.center(k) - box.half_lengths(k), box.center(k) + box.half_lengths(k));
    v(k) = d(gen);
  }
  return v;
}

// V' + λ0 V along the error dynamics with the true parameter p_star.
double excess(const PlantModel& plant, const StateObserver& obs, const Assumption2Certificate& cert, const Vec& xt,
              const Vec& x, const Vec& u, const Vec& p_star) {
  const Vec y = plant.h(x, p_star);
  const Vec xhat = x + xt;
  const Vec dxt = obs.rhs(xhat, u, y) - plant.f(x, p_star, u);
  const double v = xt.dot(cert.P * xt);
  const double vdot = 2.0 * xt.dot(cert.P * dxt);
  return vdot + cert.lambda0 * v;
}

}  // namespace

Assumption2Report check_assumption2(const PlantModel& plant, const StateObserver& obs,
                                    const Assumption2Certificate& cert, const Assumption2SampleConfig& cfg) {
  const auto nx = static_cast<Eigen::Index>(plant.nx());
  const auto nu = static_cast<Eigen::Index>(plant.nu());
  if (cert.P.rows() != nx || cert.P.cols() != nx || obs.nx() != plant.nx()) {
    throw Error(Errc::DimensionMismatch, "certificate does not match the plant");
  }
  std::mt19937_64 gen(cfg.seed);
  Assumption2Report rep;
  const Vec& p_i = obs.parameter();

  auto keep_worst = [&rep](Assumption2Violation v) {
    rep.worst.push_back(std::move(v));
    std::sort(rep.worst.begin(), rep.worst.end(),
              [](const Assumption2Violation& a, const Assumption2Violation& b) { return a.excess > b.excess; });
    if (rep.worst.size() > 5) rep.worst.pop_back();
  };

  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const Vec xt = uniform_in_box(gen, nx, cfg.xtilde_radius);
    const Vec x = uniform_in_box(gen, nx, cfg.x_radius);
    const Vec u = uniform_in_box(gen, nu, cfg.u_radius);
    const double ex = excess(plant, obs, cert, xt, x, u, p_i);
    ++rep.exact_samples;
    rep.worst_excess = std::max(rep.worst_excess, ex);
    // hybrid tolerance scaled by the size of V at the sample
    const double scale = std::max(1.0, xt.dot(cert.P * xt));
    if (ex > cfg.tolerance * scale) {
      ++rep.violations;
      keep_worst({xt, x, u, ex});
    }
  }

  if (cfg.mismatch_box) {
    for (std::size_t s = 0; s < cfg.mismatch_samples; ++s) {
      const Vec xt = uniform_in_box(gen, nx, cfg.xtilde_radius);
      const Vec x = uniform_in_box(gen, nx, cfg.x_radius);
      const Vec u = uniform_in_box(gen, nu, cfg.u_radius);
      const Vec p_star = uniform_in_box(gen, *cfg.mismatch_box);
      const double ex = excess(plant, obs, cert, xt, x, u, p_star);
      ++rep.mismatch_samples;
      rep.max_mismatch_residual = std::max(rep.max_mismatch_residual, std::max(0.0, ex));
    }
  }

  std::ostringstream os;
  os.precision(6);
  os << "samples=" << rep.exact_samples << " violations=" << rep.violations << " worst_excess=" << rep.worst_excess;
  if (rep.mismatch_samples) {
    os << " mismatch_samples=" << rep.mismatch_samples << " max_residual=" << rep.max_mismatch_residual;
  }
  rep.log = os.str();
  return rep;
}

Assumption2Report verify_assumption2(const PlantModel& plant, const StateObserver& obs,
                                     const Assumption2Certificate& cert, const Assumption2SampleConfig& cfg) {
  Assumption2Report rep = check_assumption2(plant, obs, cert, cfg);
  if (rep.violations) throw Error(Errc::CertificateViolated, rep.log);
  return rep;
}

}  // namespace supobs

#pragma once

// Observer classes for the multi-observer bank:
//   Luenberger:        x̂' = A_i x̂ + B_i u + L_i (C_i x̂ - y)
//   circle criterion:  x̂' = A_i x̂ + G_i γ(H x̂ + K_i (C_i x̂ - y)) + B_i φ(u, y) + L_i (C_i x̂ - y)
// plus a sampled check of the quadratic robustness certificate
//   V(x̃) = x̃ᵀ P x̃,  a1 |x̃|² <= V <= a2 |x̃|²,  V' <= -λ0 V + γ̃(p̃, x, u).

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "supobs/linalg.hpp"
#include "supobs/models.hpp"
#include "supobs/sampling.hpp"

namespace supobs {

struct Assumption2Certificate {
  Mat P;
  double lambda0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  std::string check_log;

  /// a1 = λmin(P), a2 = n_x λmax(P), λ0 = nu / (2 λmax(P)).
  static Assumption2Certificate from_quadratic(const Mat& p, double nu);
};

class StateObserver {
 public:
  virtual ~StateObserver() = default;

  virtual std::string_view class_tag() const = 0;
  virtual const Vec& parameter() const = 0;
  virtual std::size_t nx() const = 0;
  virtual std::size_t ny() const = 0;

  virtual void rhs(const Vec& xhat, const Vec& u, const Vec& y, Vec& dxhat) const = 0;
  virtual void output(const Vec& xhat, Vec& yhat) const = 0;

  /// nullptr when the gains were not certified.
  virtual const Assumption2Certificate* certificate() const = 0;

  Vec rhs(const Vec& xhat, const Vec& u, const Vec& y) const {
    Vec d(static_cast<Eigen::Index>(nx()));
    rhs(xhat, u, y, d);
    return d;
  }
  Vec output(const Vec& xhat) const {
    Vec yh(static_cast<Eigen::Index>(ny()));
    output(xhat, yh);
    return yh;
  }
};

using ObserverPtr = std::shared_ptr<const StateObserver>;

class LuenbergerObserver final : public StateObserver {
 public:
  /// Throws NotHurwitz unless A_i + L_i C_i is Hurwitz.
  LuenbergerObserver(Vec p, Mat a, Mat b, Mat c, Mat l, std::optional<Assumption2Certificate> cert = std::nullopt);
  static std::shared_ptr<const LuenbergerObserver> at(const LinearPlant& plant, const Vec& p, const Mat& l,
                                                      std::optional<Assumption2Certificate> cert = std::nullopt);

  std::string_view class_tag() const override { return "luenberger"; }
  const Vec& parameter() const override { return p_; }
  std::size_t nx() const override { return static_cast<std::size_t>(a_.rows()); }
  std::size_t ny() const override { return static_cast<std::size_t>(c_.rows()); }
  void rhs(const Vec& xhat, const Vec& u, const Vec& y, Vec& dxhat) const override;
  void output(const Vec& xhat, Vec& yhat) const override;
  const Assumption2Certificate* certificate() const override { return cert_ ? &*cert_ : nullptr; }
  using StateObserver::output;
  using StateObserver::rhs;

  const Mat& A() const { return a_; }
  const Mat& B() const { return b_; }
  const Mat& C() const { return c_; }
  const Mat& L() const { return l_; }

 private:
  Vec p_;
  Mat a_, b_, c_, l_;
  std::optional<Assumption2Certificate> cert_;
};

class CircleCriterionObserver final : public StateObserver {
 public:
  struct Gains {
    Mat K;  // n_gamma x n_y
    Mat L;  // n_x x n_y
  };

  /// Evaluates the plant matrices at p; the observer shares the plant's γ, φ.
  CircleCriterionObserver(std::shared_ptr<const LurePlant> plant, Vec p, Gains gains,
                          std::optional<Assumption2Certificate> cert = std::nullopt);

  std::string_view class_tag() const override { return "circle_criterion"; }
  const Vec& parameter() const override { return p_; }
  std::size_t nx() const override { return static_cast<std::size_t>(a_.rows()); }
  std::size_t ny() const override { return static_cast<std::size_t>(c_.rows()); }
  void rhs(const Vec& xhat, const Vec& u, const Vec& y, Vec& dxhat) const override;
  void output(const Vec& xhat, Vec& yhat) const override;
  const Assumption2Certificate* certificate() const override { return cert_ ? &*cert_ : nullptr; }
  using StateObserver::output;
  using StateObserver::rhs;

  const Gains& gains() const { return gains_; }
  const Mat& A() const { return a_; }
  const Mat& G() const { return g_; }
  const Mat& B() const { return b_; }
  const Mat& C() const { return c_; }
  const Mat& H() const { return plant_->H(); }

 private:
  std::shared_ptr<const LurePlant> plant_;
  Vec p_;
  Mat a_, g_, b_, c_;
  Gains gains_;
  std::optional<Assumption2Certificate> cert_;
};

// Free-function forms of the observer vector fields.
Vec luenberger_rhs(const LuenbergerObserver& obs, const Vec& xhat, const Vec& u, const Vec& y);
Vec circle_criterion_rhs(const CircleCriterionObserver& obs, const Vec& xhat, const Vec& u, const Vec& y);

/// N observers of one class with their current states.
class ObserverBank {
 public:
  ObserverBank() = default;
  ObserverBank(std::vector<ObserverPtr> observers, std::vector<Vec> states);

  std::size_t size() const { return observers_.size(); }
  const StateObserver& observer(std::size_t i) const { return *observers_.at(i); }
  const ObserverPtr& shared(std::size_t i) const { return observers_.at(i); }
  const std::vector<ObserverPtr>& observers() const { return observers_; }
  const std::vector<Vec>& states() const { return states_; }
  std::vector<Vec>& states() { return states_; }
  void replace(std::size_t i, ObserverPtr obs);

 private:
  std::vector<ObserverPtr> observers_;
  std::vector<Vec> states_;
};

/// ỹ_i = h(x̂_i, p_i) - y for every observer in the bank.
std::vector<Vec> bank_output_errors(const ObserverBank& bank, const Vec& y);

struct Assumption2SampleConfig {
  double xtilde_radius = 20.0;
  double x_radius = 20.0;
  double u_radius = 320.0;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  /// When set, additional samples draw p* from this box and record the
  /// empirical residual max(0, V' + λ0 V) as a γ̃ estimate.
  std::optional<ParamBox> mismatch_box;
  std::size_t mismatch_samples = 0;
  double tolerance = 1e-8;
};

struct Assumption2Violation {
  Vec xtilde, x, u;
  double excess = 0.0;  // V' + λ0 V
};

struct Assumption2Report {
  std::size_t exact_samples = 0;
  std::size_t violations = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  std::vector<Assumption2Violation> worst;  // up to 5 largest
  std::size_t mismatch_samples = 0;
  double max_mismatch_residual = 0.0;
  std::string log;
};

/// Samples (x̃, x, u) and checks V' <= -λ0 V + tol at p̃ = 0 (p* = p_i).
/// Reports instead of throwing.
Assumption2Report check_assumption2(const PlantModel& plant, const StateObserver& obs,
                                    const Assumption2Certificate& cert, const Assumption2SampleConfig& cfg);

/// As check_assumption2 but throws CertificateViolated on any p̃ = 0 failure.
Assumption2Report verify_assumption2(const PlantModel& plant, const StateObserver& obs,
                                     const Assumption2Certificate& cert, const Assumption2SampleConfig& cfg);

}  // namespace supobs

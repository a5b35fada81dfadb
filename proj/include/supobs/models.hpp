#pragma once

// Plant models: the general interface x' = f(x, p, u), y = h(x, p), the
// linear and Lure-type families, and the Jansen-Rit cortical column.

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "supobs/linalg.hpp"

namespace supobs {

class PlantModel {
 public:
  virtual ~PlantModel() = default;

  virtual std::size_t nx() const = 0;
  virtual std::size_t nu() const = 0;
  virtual std::size_t ny() const = 0;
  virtual std::size_t np() const = 0;

  virtual void f(const Vec& x, const Vec& p, const Vec& u, Vec& dx) const = 0;
  virtual void h(const Vec& x, const Vec& p, Vec& y) const = 0;

  Vec f(const Vec& x, const Vec& p, const Vec& u) const {
    Vec dx(static_cast<Eigen::Index>(nx()));
    f(x, p, u, dx);
    return dx;
  }
  Vec h(const Vec& x, const Vec& p) const {
    Vec y(static_cast<Eigen::Index>(ny()));
    h(x, p, y);
    return y;
  }
};

using MatOfParam = std::function<Mat(const Vec&)>;

/// x' = A(p) x + B(p) u, y = C(p) x.
class LinearPlant final : public PlantModel {
 public:
  LinearPlant(std::size_t nx, std::size_t nu, std::size_t ny, std::size_t np, MatOfParam a_of_p,
              MatOfParam b_of_p, MatOfParam c_of_p);

  std::size_t nx() const override { return nx_; }
  std::size_t nu() const override { return nu_; }
  std::size_t ny() const override { return ny_; }
  std::size_t np() const override { return np_; }

  Mat A(const Vec& p) const;
  Mat B(const Vec& p) const;
  Mat C(const Vec& p) const;

  void f(const Vec& x, const Vec& p, const Vec& u, Vec& dx) const override;
  void h(const Vec& x, const Vec& p, Vec& y) const override;
  using PlantModel::f;
  using PlantModel::h;

 private:
  std::size_t nx_, nu_, ny_, np_;
  MatOfParam a_, b_, c_;
};

/// One scalar slope-restricted nonlinearity gamma_k with
/// lower <= gamma_k'(v) <= upper.
struct SectorComponent {
  std::function<double(double)> fn;
  double lower = 0.0;
  double upper = 1.0;
};

using InputOutputMap = std::function<Vec(const Vec& u, const Vec& y)>;

/// x' = A(p) x + G(p) gamma(H x) + B(p) phi(u, y), y = C(p) x.
class LurePlant final : public PlantModel {
 public:
  struct Parts {
    std::size_t nx = 0, nu = 0, ny = 0, np = 0;
    MatOfParam a_of_p, g_of_p, b_of_p, c_of_p;
    Mat h;
    std::vector<SectorComponent> gamma;
    InputOutputMap phi;
  };

  explicit LurePlant(Parts parts);

  std::size_t nx() const override { return parts_.nx; }
  std::size_t nu() const override { return parts_.nu; }
  std::size_t ny() const override { return parts_.ny; }
  std::size_t np() const override { return parts_.np; }
  std::size_t ngamma() const { return parts_.gamma.size(); }

  Mat A(const Vec& p) const { return parts_.a_of_p(p); }
  Mat G(const Vec& p) const { return parts_.g_of_p(p); }
  Mat B(const Vec& p) const { return parts_.b_of_p(p); }
  Mat C(const Vec& p) const { return parts_.c_of_p(p); }
  const Mat& H() const { return parts_.h; }

  Vec gamma(const Vec& v) const;
  Vec phi(const Vec& u, const Vec& y) const { return parts_.phi(u, y); }
  const std::vector<SectorComponent>& gamma_components() const { return parts_.gamma; }
  Vec sector_upper() const;
  Vec sector_lower() const;

  void f(const Vec& x, const Vec& p, const Vec& u, Vec& dx) const override;
  void h(const Vec& x, const Vec& p, Vec& y) const override;
  using PlantModel::f;
  using PlantModel::h;

 private:
  Parts parts_;
};

/// Largest violation (>= 0) of the declared slope bounds, measured by forward
/// differences of each gamma_k on `points` samples over [lo, hi].
double sector_slope_violation(const LurePlant& plant, double lo, double hi, std::size_t points);

struct JansenRitParams {
  double a = 100.0;         // excitatory rate constant, 1/s
  double b = 50.0;          // inhibitory rate constant, 1/s
  double c1 = 135.0;
  double c2 = 0.8 * 135.0;
  double c3 = 0.25 * 135.0;
  double c4 = 0.25 * 135.0;
  double e0 = 2.5;          // half of the maximum firing rate, 1/s
  double v0 = 6.0;          // mV
  double r = 0.56;          // 1/mV

  void validate() const;
  bool operator==(const JansenRitParams&) const = default;
};

/// S(v) = 2 e0 / (1 + exp(r (v0 - v))).
double sigmoid(double v, const JansenRitParams& params);

/// sup_v S'(v) = e0 r / 2, attained at v = v0.
double sigmoid_max_slope(const JansenRitParams& params);

/// The 6-state Jansen-Rit column with p = (excitatory gain, inhibitory gain).
std::shared_ptr<const LurePlant> jansen_rit_plant(const JansenRitParams& params);

/// Scalar testbed x' = -p x + u, y = x.
std::shared_ptr<const LinearPlant> scalar_linear_plant();

/// Running max of |x|_inf with a blow-up guard.
struct BoundednessMonitor {
  double max_abs_seen = 0.0;
  double threshold = 1e6;

  /// Throws TrajectoryBlowUp when |x|_inf exceeds the threshold (or is NaN).
  void check(const Vec& x);
};

}  // namespace supobs

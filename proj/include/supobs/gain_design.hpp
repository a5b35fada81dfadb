#pragma once

// Observer gain design and certification.
//
// Luenberger: L by eigenvalue assignment, P from P(A+LC) + (A+LC)^T P = -nu I.
//
// Circle criterion: the LMI
//
//   [ 𝒜    ℬ   P   ]
//   [ ℬ^T  ℰ   0   ]  <= 0,   𝒜 = P(A+LC) + (A+LC)^T P + nu I
//   [ P    0  -mu I ]          ℬ = P G + (H + K C)^T M
//                              ℰ = -2 M diag(1/b_1, ..., 1/b_ngamma)
//
// is assembled and checked; synthesis is a seeded randomized search.
// M and ℰ are indexed by the number of nonlinearity components n_gamma.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "supobs/linalg.hpp"
#include "supobs/observers.hpp"

namespace supobs {

struct LureMatrices {
  Mat A, G, C, H;

  static LureMatrices of(const LurePlant& plant, const Vec& p);
  std::size_t nx() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t ny() const { return static_cast<std::size_t>(C.rows()); }
  std::size_t ngamma() const { return static_cast<std::size_t>(H.rows()); }
};

struct CCLmiData {
  Mat P;  // n_x x n_x
  Mat M;  // n_gamma x n_gamma, diagonal
  Mat K;  // n_gamma x n_y
  Mat L;  // n_x x n_y
  double lmi_nu = 1.0;
  double lmi_mu = 1.0;
  Vec sector_upper;  // b_gamma_k
};

/// Symmetric matrix of size n_x + n_gamma + n_x.
/// Throws DimensionMismatch or ZeroSectorBound.
Mat assemble_cc_lmi(const CCLmiData& data, const Mat& a, const Mat& g, const Mat& c, const Mat& h);
Mat assemble_cc_lmi(const CCLmiData& data, const LureMatrices& mats);

/// 1e-7 * max(1, |lmi|_max).
double default_lmi_tolerance(const Mat& lmi);

struct CCCertificate {
  CCLmiData data;
  double max_eig = 0.0;
  double equilibrated_max_eig = 0.0;
  double tol = 0.0;
  std::string source;  // "verified", "warm-start", "grid", "random"
  std::size_t candidate = 0;

  /// Robustness certificate with V = x̃^T P x̃ and λ0 = lmi_nu / (2 λmax(P)).
  Assumption2Certificate assumption2() const;
};

/// Checks P > 0 (BadP) and M diagonal positive (BadM), then returns a
/// certificate iff λmax(LMI) <= tol (NotNSD otherwise). `tol` defaults to
/// default_lmi_tolerance.
CCCertificate verify_cc_gains(const CCLmiData& data, const LureMatrices& mats, std::optional<double> tol = {});

struct CCSearchConfig {
  std::size_t budget = 20000;
  std::uint64_t seed = 1;
  bool allow_output_injection = true;
  bool allow_k = false;
  /// Candidates must also have equilibrated λmax < -min_margin. Guards
  /// against acceptance through a huge mu inflating the tolerance.
  double min_margin = 1e-6;
  std::vector<CCLmiData> warm_starts;
};

/// Warm starts first, then a small fixed grid, then seeded random candidates.
/// Returns the lowest-index certified candidate; throws
/// SynthesisBudgetExhausted otherwise.
CCCertificate synthesize_cc_gains(const LureMatrices& mats, const Vec& sector_upper, const CCSearchConfig& cfg);

struct LuenbergerDesign {
  Mat L;
  Mat P;
  double nu = 2.0;
  Assumption2Certificate certificate;
};

/// L from stabilizing_output_injection, P from solve_lyapunov(A + L C, nu).
/// Throws NotObservable, BadTargets.
LuenbergerDesign design_luenberger(const Mat& a, const Mat& c, std::span<const Complex> targets, double nu = 2.0);

/// Nearest-parameter lookup over precomputed circle-criterion certificates.
struct GainTable {
  std::vector<Vec> parameters;
  std::vector<CCLmiData> entries;

  bool empty() const { return entries.empty(); }
  void add(Vec p, CCLmiData d);
  /// Entries ordered by sup-distance to p (ties by insertion order).
  std::vector<std::size_t> nearest_order(const Vec& p) const;
};

}  // namespace supobs

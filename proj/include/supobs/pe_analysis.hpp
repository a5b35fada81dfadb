#pragma once

// Persistency-of-excitation diagnostics over recorded output errors:
//
//   E_i(t) = ∫_{t-T_f}^{t} |ỹ_i(τ)|_inf^2 dτ           (windowed energy)
//   Γ_i(t) = ∫_{t-T_f}^{t} ỹ_i(τ) ỹ_i(τ)^T dτ,  ᾱ_i = min_t λmin(Γ_i(t))
//
// Both use the trapezoid rule on the recorded grid; the window's lower edge
// falls between samples in general and is handled by integrating the linear
// interpolant of the integrand over the partial interval.

#include <vector>

#include "supobs/linalg.hpp"

namespace supobs {

struct WindowedSeries {
  std::vector<double> t;      // window end times (t - t_0 >= T_f)
  std::vector<double> value;
};

/// Throws InvalidTrace (fewer than 2 samples, non-uniform or decreasing
/// times, size mismatch), InvalidArgument (T_f shorter than 2 samples) and
/// WindowTooLong (T_f exceeds the trace duration).
WindowedSeries windowed_energy(const std::vector<double>& t, const std::vector<Vec>& y_err, double window);

struct GramianFloor {
  double min_eigenvalue = 0.0;
  double t_at_min = 0.0;
};

GramianFloor classical_pe_gramian(const std::vector<double>& t, const std::vector<Vec>& y_err, double window);

struct ObserverPE {
  double err_p_inf = 0.0;
  double min_energy = 0.0;
  double alpha_bar = 0.0;
};

struct PEReport {
  double window = 0.0;
  std::vector<ObserverPE> observers;
  double spearman = 0.0;  // between err_p_inf and min_energy; NaN if undefined
};

/// Per-observer floors and the rank correlation of the (|p̃_i|_inf, E_i) scatter.
PEReport pe_scatter(const std::vector<double>& t, const std::vector<std::vector<Vec>>& y_err_per_observer,
                    const std::vector<double>& err_p_inf, double window);

/// Spearman rank correlation with average ranks for ties; NaN when either
/// sample is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct ExponentialEnvelope {
  double k_bar = 0.0;
  double lambda_bar = 0.0;
};

/// Log-linear least squares on the samples of the tail `t >= t_start` with
/// e > floor gives λ̄; k̄ is then the smallest constant with
/// e(t) <= k̄ e^{-λ̄ t} |e(0)| over those samples.
ExponentialEnvelope fit_exponential_envelope(const std::vector<double>& t, const std::vector<double>& e,
                                             double t_start = 0.0, double floor = 1e-12);

}  // namespace supobs

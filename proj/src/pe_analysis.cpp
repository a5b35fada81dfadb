#include "supobs/pe_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "supobs/errors.hpp"

namespace supobs {

namespace {

double check_uniform(const std::vector<double>& t, std::size_t n_values) {
  if (t.size() != n_values) throw Error(Errc::InvalidTrace, "time and value counts differ");
  if (t.size() < 2) throw Error(Errc::InvalidTrace, "need at least 2 samples");
  const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(dt > 0.0)) throw Error(Errc::InvalidTrace, "times must increase");
  for (std::size_t j = 1; j < t.size(); ++j) {
    if (std::abs((t[j] - t[j - 1]) - dt) > 1e-6 * dt) throw Error(Errc::InvalidTrace, "trace is not uniformly sampled");
  }
  return dt;
}

void check_window(const std::vector<double>& t, double dt, double window) {
  if (!(window >= dt * (1.0 - 1e-9))) throw Error(Errc::InvalidArgument, "window must span at least 2 samples");
  if (window > (t.back() - t.front()) * (1.0 + 1e-12)) {
    throw Error(Errc::WindowTooLong, "window exceeds the trace duration");
  }
}

// Trailing-window trapezoid integrals of a sampled integrand, one per sample
// whose window fits in the trace.
template <class T>
void window_integrals(const std::vector<double>& t, const std::vector<T>& f, double dt, double window,
                      std::vector<double>& t_out, std::vector<T>& out) {
  const std::size_t n = f.size();
  std::vector<T> cum(n);
  cum[0] = f[0] * 0.0;
  for (std::size_t j = 1; j < n; ++j) cum[j] = cum[j - 1] + (f[j - 1] + f[j]) * (0.5 * dt);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (t[i] - window - t.front()) / dt;
    if (s < -1e-9) continue;
    const double sc = std::max(0.0, s);
    auto j = static_cast<std::size_t>(std::floor(sc));
    double theta = sc - static_cast<double>(j);
    if (j >= n - 1) {
      j = n - 1;
      theta = 0.0;
    }
    T lower = cum[j];
    if (theta > 0.0) {
      const T f_edge = f[j] + (f[j + 1] - f[j]) * theta;
      lower = lower + (f[j] + f_edge) * (0.5 * theta * dt);
    }
    t_out.push_back(t[i]);
    out.push_back(cum[i] - lower);
  }
}

}  // namespace

WindowedSeries windowed_energy(const std::vector<double>& t, const std::vector<Vec>& y_err, double window) {
  const double dt = check_uniform(t, y_err.size());
  check_window(t, dt, window);
  std::vector<double> f(y_err.size());
  for (std::size_t j = 0; j < y_err.size(); ++j) {
    const double e = y_err[j].size() ? y_err[j].cwiseAbs().maxCoeff() : 0.0;
    f[j] = e * e;
  }
  WindowedSeries out;
  window_integrals(t, f, dt, window, out.t, out.value);
  // cancellation in the cumulative difference must not report negative energy
  for (double& v : out.value) v = std::max(0.0, v);
  return out;
}

GramianFloor classical_pe_gramian(const std::vector<double>& t, const std::vector<Vec>& y_err, double window) {
  const double dt = check_uniform(t, y_err.size());
  check_window(t, dt, window);
  std::vector<Mat> f(y_err.size());
  for (std::size_t j = 0; j < y_err.size(); ++j) f[j] = y_err[j] * y_err[j].transpose();
  std::vector<double> tw;
  std::vector<Mat> g;
  window_integrals(t, f, dt, window, tw, g);
  GramianFloor floor{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double l = std::max(0.0, min_eigenvalue(0.5 * (g[i] + g[i].transpose())));
    if (l < floor.min_eigenvalue) floor = {l, tw[i]};
  }
  return floor;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(Errc::DimensionMismatch, "samples differ in length");
  const std::size_t n = x.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (n < 2) return nan;
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return nan;
  return sxy / std::sqrt(sxx * syy);
}

PEReport pe_scatter(const std::vector<double>& t, const std::vector<std::vector<Vec>>& y_err_per_observer,
                    const std::vector<double>& err_p_inf, double window) {
  if (y_err_per_observer.size() != err_p_inf.size()) {
    throw Error(Errc::DimensionMismatch, "one parameter error per observer required");
  }
  PEReport rep;
  rep.window = window;
  std::vector<double> errs, energies;
  for (std::size_t i = 0; i < y_err_per_observer.size(); ++i) {
    const WindowedSeries e = windowed_energy(t, y_err_per_observer[i], window);
    ObserverPE o;
    o.err_p_inf = err_p_inf[i];
    o.min_energy = *std::min_element(e.value.begin(), e.value.end());
    o.alpha_bar = classical_pe_gramian(t, y_err_per_observer[i], window).min_eigenvalue;
    rep.observers.push_back(o);
    errs.push_back(o.err_p_inf);
    energies.push_back(o.min_energy);
  }
  rep.spearman = spearman(errs, energies);
  return rep;
}

ExponentialEnvelope fit_exponential_envelope(const std::vector<double>& t, const std::vector<double>& e,
                                             double t_start, double floor) {
  if (t.size() != e.size() || t.empty()) throw Error(Errc::InvalidTrace, "time and value counts differ");
  const double e0 = std::abs(e.front());
  if (!(e0 > 0.0)) throw Error(Errc::InvalidArgument, "initial error must be nonzero");
  const double peak = *std::max_element(e.begin(), e.end());
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_start || !(e[i] > floor * peak)) continue;
    const double l = std::log(e[i]);
    st += t[i];
    sl += l;
    stt += t[i] * t[i];
    stl += t[i] * l;
    ++n;
  }
  if (n < 2) throw Error(Errc::InvalidTrace, "fewer than 2 tail samples above the floor");
  const double dn = static_cast<double>(n);
  const double denom = dn * stt - st * st;
  if (!(denom > 0.0)) throw Error(Errc::InvalidTrace, "tail samples share one time");
  ExponentialEnvelope env;
  env.lambda_bar = -(dn * stl - st * sl) / denom;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_start) continue;
    env.k_bar = std::max(env.k_bar, std::abs(e[i]) * std::exp(env.lambda_bar * t[i]) / e0);
  }
  return env;
}

}  // namespace supobs

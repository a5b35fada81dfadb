#include "supobs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "supobs/errors.hpp"

namespace supobs {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " is " << m.rows() << "x" << m.cols();
    throw Error(Errc::NonSquare, os.str());
  }
}

void require_symmetric(const Mat& s) {
  require_square(s, "matrix");
  const double scale = std::max(1.0, max_abs(s));
  const double asym = s.size() == 0 ? 0.0 : (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * scale) {
    std::ostringstream os;
    os << "asymmetry " << asym << " exceeds 1e-9 * " << scale;
    throw Error(Errc::Asymmetric, os.str());
  }
}

// Deterministic entries in [-1, 1] from a 64-bit Mersenne twister.
Mat seeded_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      m(i, j) = 2.0 * unit - 1.0;
    }
  }
  return m;
}

// Real block-diagonal matrix with the given (conjugate-closed) spectrum. With
// `jordan`, equal consecutive blocks are chained so the result is cyclic.
Mat real_spectrum_matrix(std::vector<Complex> targets, bool jordan) {
  std::sort(targets.begin(), targets.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  const auto n = static_cast<Eigen::Index>(targets.size());
  Mat lambda = Mat::Zero(n, n);
  std::vector<bool> used(targets.size(), false);
  Eigen::Index pos = 0;
  Eigen::Index prev_pos = -1;
  Eigen::Index prev_size = 0;
  Complex prev_value{std::numeric_limits<double>::quiet_NaN(), 0.0};
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    const Complex z = targets[i];
    const double tol = 1e-12 * std::max(1.0, std::abs(z));
    Eigen::Index size = 1;
    if (std::abs(z.imag()) <= tol) {
      lambda(pos, pos) = z.real();
    } else {
      for (std::size_t j = i + 1; j < targets.size(); ++j) {
        if (!used[j] && std::abs(targets[j] - std::conj(z)) <= 1e-9 * std::max(1.0, std::abs(z))) {
          used[j] = true;
          break;
        }
      }
      const double w = std::abs(z.imag());
      lambda(pos, pos) = z.real();
      lambda(pos + 1, pos + 1) = z.real();
      lambda(pos, pos + 1) = w;
      lambda(pos + 1, pos) = -w;
      size = 2;
    }
    const Complex value{z.real(), std::abs(z.imag())};
    if (jordan && prev_pos >= 0 && size == prev_size &&
        std::abs(value - prev_value) <= 1e-9 * std::max(1.0, std::abs(value))) {
      lambda.block(prev_pos, pos, size, size) = Mat::Identity(size, size);
    }
    prev_pos = pos;
    prev_size = size;
    prev_value = value;
    pos += size;
  }
  return lambda;
}

}  // namespace

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

SymEig sym_eig(const Mat& s, int max_sweeps) {
  require_symmetric(s);
  if (!s.allFinite()) throw Error(Errc::InvalidArgument, "non-finite matrix entry");
  const Eigen::Index n = s.rows();
  Mat a = 0.5 * (s + s.transpose());
  Mat v = Mat::Identity(n, n);

  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // relative threshold: keeps tiny but significant couplings between
        // small diagonal entries
        if (std::abs(apq) <= kEps * std::sqrt(std::abs(a(p, p)) * std::abs(a(q, q)))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        rotated = true;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
    if (!rotated) break;
  }
  if (sweep == max_sweeps) {
    throw Error(Errc::NoConvergence, "Jacobi iteration hit the sweep cap");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });
  SymEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.eigenvectors.col(k) = v.col(src);
  }
  out.sweeps = sweep;
  return out;
}

double max_eigenvalue(const Mat& s) {
  const auto e = sym_eig(s);
  return e.eigenvalues.size() ? e.eigenvalues(e.eigenvalues.size() - 1) : 0.0;
}

double min_eigenvalue(const Mat& s) {
  const auto e = sym_eig(s);
  return e.eigenvalues.size() ? e.eigenvalues(0) : 0.0;
}

bool is_negative_semidefinite(const Mat& s, double tol) {
  if (tol < 0.0) throw Error(Errc::InvalidArgument, "tolerance must be >= 0");
  if (s.size() == 0) return true;
  return max_eigenvalue(s) <= tol;
}

double equilibrated_max_eigenvalue(const Mat& s) {
  require_symmetric(s);
  if (s.size() == 0) return 0.0;
  Vec d(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double sii = std::abs(s(i, i));
    d(i) = sii > 0.0 ? 1.0 / std::sqrt(sii) : 1.0;
  }
  const Mat scaled = d.asDiagonal() * s * d.asDiagonal();
  return max_eigenvalue(0.5 * (scaled + scaled.transpose()));
}

CVec eigenvalues(const Mat& a) {
  require_square(a, "matrix");
  if (a.size() == 0) return CVec(0);
  Eigen::EigenSolver<Mat> solver(a, false);
  if (solver.info() != Eigen::Success) throw Error(Errc::NoConvergence, "general eigensolver failed");
  return solver.eigenvalues();
}

bool is_hurwitz(const Mat& a) {
  const CVec ev = eigenvalues(a);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev(i).real() < 0.0)) return false;
  }
  return true;
}

double lyapunov_residual(const Mat& p, const Mat& acl, const Mat& q) {
  return max_abs(p * acl + acl.transpose() * p + q);
}

Mat solve_lyapunov(const Mat& acl, const Mat& q) {
  require_square(acl, "closed-loop matrix");
  require_symmetric(q);
  const Eigen::Index n = acl.rows();
  if (q.rows() != n) throw Error(Errc::DimensionMismatch, "Q does not match A");
  if (!is_hurwitz(acl)) throw Error(Errc::NotHurwitz, "closed-loop matrix has an eigenvalue with Re >= 0");

  // vec(P A + A^T P) = (A^T (x) I + I (x) A^T) vec(P), column-major vec
  const Eigen::Index nn = n * n;
  Mat k = Mat::Zero(nn, nn);
  const Mat at = acl.transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    k.block(j * n, j * n, n, n) += at;
    for (Eigen::Index l = 0; l < n; ++l) {
      if (at(j, l) != 0.0) k.block(j * n, l * n, n, n).diagonal().array() += at(j, l);
    }
  }
  Vec rhs = -Eigen::Map<const Vec>(q.data(), nn);
  Eigen::PartialPivLU<Mat> lu(k);
  Vec x = lu.solve(rhs);
  for (int refine = 0; refine < 2; ++refine) {
    x += lu.solve(rhs - k * x);
  }
  if (!x.allFinite()) throw Error(Errc::NotHurwitz, "Lyapunov system is singular");
  Mat p = Eigen::Map<Mat>(x.data(), n, n);
  return 0.5 * (p + p.transpose());
}

Mat solve_lyapunov(const Mat& acl, double nu) {
  if (!(nu > 0.0)) throw Error(Errc::InvalidArgument, "nu must be > 0");
  const Eigen::Index n = acl.rows();
  const Mat q = nu * Mat::Identity(n, acl.cols());
  Mat p = solve_lyapunov(acl, q);
  const double residual = lyapunov_residual(p, acl, q);
  const double scale = std::max(1.0, max_abs(acl) * max_abs(p) / nu);
  if (residual > 1e-8 * nu * scale) {
    std::ostringstream os;
    os << "Lyapunov residual " << residual << " too large";
    throw Error(Errc::NoConvergence, os.str());
  }
  if (!(min_eigenvalue(p) > 0.0)) throw Error(Errc::NotHurwitz, "Lyapunov solution is not positive definite");
  return p;
}

Mat observability_matrix(const Mat& a, const Mat& c) {
  require_square(a, "A");
  if (c.cols() != a.rows()) throw Error(Errc::DimensionMismatch, "C columns must equal A rows");
  const Eigen::Index n = a.rows();
  const Eigen::Index ny = c.rows();
  Mat o(n * ny, n);
  Mat block = c;
  for (Eigen::Index k = 0; k < n; ++k) {
    o.block(k * ny, 0, ny, n) = block;
    block = block * a;
  }
  return o;
}

std::size_t observability_rank(const Mat& a, const Mat& c) {
  Mat o = observability_matrix(a, c);
  const Eigen::Index n = a.rows();
  const Eigen::Index ny = c.rows();
  if (n == 0) return 0;
  // Rows of C*A^k grow like |A|^k; normalize each block so the rank decision
  // is not swamped by the largest power.
  const double norm_a = std::max(max_abs(a), kEps);
  const double norm_c = max_abs(c);
  double power = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    auto blk = o.block(k * ny, 0, ny, n);
    const double mag = max_abs(blk);
    if (mag <= 1e-12 * norm_c * power * static_cast<double>(n)) {
      blk.setZero();
    } else {
      blk /= mag;
    }
    power *= norm_a;
  }
  Eigen::JacobiSVD<Mat> svd(o);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-9 * sv(0)) ++rank;
  }
  return rank;
}

bool spectra_match(const CVec& actual, std::span<const Complex> targets, double rel_tol) {
  if (static_cast<std::size_t>(actual.size()) != targets.size()) return false;
  std::vector<bool> used(targets.size(), false);
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = targets.size();
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(actual(i) - targets[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    if (best_j == targets.size()) return false;
    if (best > rel_tol * std::max(1.0, std::abs(targets[best_j]))) return false;
    used[best_j] = true;
  }
  return true;
}

namespace {

std::vector<Complex> monic_coefficients(std::span<const Complex> roots) {
  std::vector<Complex> c{1.0};
  for (const Complex& r : roots) {
    c.push_back(0.0);
    for (std::size_t k = c.size() - 1; k > 0; --k) c[k] -= r * c[k - 1];
  }
  return c;
}

}  // namespace

bool characteristic_match(const CVec& actual, std::span<const Complex> targets, double rel_tol) {
  if (static_cast<std::size_t>(actual.size()) != targets.size()) return false;
  const std::vector<Complex> got = monic_coefficients(std::span<const Complex>(actual.data(), actual.size()));
  const std::vector<Complex> want = monic_coefficients(targets);
  // coefficient k is a degree-k symmetric function, compare on the scale of |roots|^k
  double r = 1.0;
  for (const Complex& z : targets) r = std::max(r, std::abs(z));
  double scale = 1.0;
  for (std::size_t k = 1; k < want.size(); ++k) {
    scale *= r * static_cast<double>(want.size() - k) / static_cast<double>(k);
    if (std::abs(got[k] - want[k]) > rel_tol * std::max(scale, std::abs(want[k]))) return false;
  }
  return true;
}

Mat stabilizing_output_injection(const Mat& a, const Mat& c, std::span<const Complex> targets) {
  require_square(a, "A");
  const Eigen::Index n = a.rows();
  if (c.cols() != n) throw Error(Errc::DimensionMismatch, "C columns must equal A rows");
  const Eigen::Index ny = c.rows();

  if (static_cast<Eigen::Index>(targets.size()) != n) {
    throw Error(Errc::BadTargets, "need exactly one target per state");
  }
  for (const Complex& z : targets) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || !(z.real() < 0.0)) {
      throw Error(Errc::BadTargets, "targets must be finite with negative real part");
    }
    if (std::abs(z.imag()) > 1e-12 * std::max(1.0, std::abs(z))) {
      const auto conj_count = std::count_if(targets.begin(), targets.end(), [&](const Complex& w) {
        return std::abs(w - std::conj(z)) <= 1e-9 * std::max(1.0, std::abs(z));
      });
      const auto self_count = std::count_if(targets.begin(), targets.end(), [&](const Complex& w) {
        return std::abs(w - z) <= 1e-9 * std::max(1.0, std::abs(z));
      });
      if (conj_count != self_count) throw Error(Errc::BadTargets, "targets are not closed under conjugation");
    }
  }

  if (spectra_match(eigenvalues(a), targets, 1e-9)) return Mat::Zero(n, ny);

  if (observability_rank(a, c) < static_cast<std::size_t>(n)) {
    throw Error(Errc::NotObservable, "observability matrix is rank deficient");
  }

  // Dual state-feedback problem: find F with spec(A^T + C^T F) = targets via
  // the Sylvester equation A^T X - X Lambda = -C^T G, F = G X^{-1}; then
  // L = F^T. Diagonal Lambda first (keeps the simplest gain when several
  // outputs allow it), chained Jordan blocks for repeated targets otherwise.
  const Mat at = a.transpose();
  const Mat ct = c.transpose();
  const std::vector<Complex> tv(targets.begin(), targets.end());
  for (bool jordan : {false, true}) {
    const Mat lambda = real_spectrum_matrix(tv, jordan);
    const Eigen::Index nn = n * n;
    Mat k = Mat::Zero(nn, nn);
    for (Eigen::Index j = 0; j < n; ++j) k.block(j * n, j * n, n, n) += at;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index l = 0; l < n; ++l) {
        if (lambda(l, j) != 0.0) k.block(j * n, l * n, n, n).diagonal().array() -= lambda(l, j);
      }
    }
    Eigen::FullPivLU<Mat> lu(k);
    if (!lu.isInvertible()) continue;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const Mat g = seeded_matrix(ny, n, seed);
      Mat rhs = -ct * g;
      Vec xv = lu.solve(Eigen::Map<Vec>(rhs.data(), nn));
      Mat x = Eigen::Map<Mat>(xv.data(), n, n);
      Eigen::FullPivLU<Mat> xlu(x);
      if (!xlu.isInvertible() || xlu.rcond() < 1e-12) continue;
      const Mat f = g * xlu.inverse();
      const Mat l = f.transpose();
      if (!l.allFinite()) continue;
      const CVec got = eigenvalues(a + l * c);
      if (spectra_match(got, targets, 1e-6) || characteristic_match(got, targets, 1e-9)) return l;
    }
  }
  throw Error(Errc::NoConvergence, "eigenvalue assignment did not reach the targets");
}

}  // namespace supobs

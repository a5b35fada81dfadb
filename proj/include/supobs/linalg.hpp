#pragma once

// Small dense linear algebra for observer design and certification.
//
// Everything here is sized for n <= ~20: the symmetric eigensolver is a
// cyclic Jacobi iteration and the Lyapunov solver works on the n^2 x n^2
// Kronecker system. Tolerances are absolute-relative hybrids scaled by
// max(1, |.|_max) unless stated otherwise.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace supobs {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

struct SymEig {
  Vec eigenvalues;   // ascending
  Mat eigenvectors;  // orthonormal columns, column j pairs with eigenvalues(j)
  int sweeps = 0;
};

/// Largest absolute entry, 0 for an empty matrix.
double max_abs(const Mat& m);

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Throws NonSquare, Asymmetric (relative asymmetry > 1e-9) or NoConvergence
/// (100 sweeps without reaching round-off).
SymEig sym_eig(const Mat& s, int max_sweeps = 100);

double max_eigenvalue(const Mat& s);
double min_eigenvalue(const Mat& s);

/// True iff the largest eigenvalue of `s` is <= tol.
bool is_negative_semidefinite(const Mat& s, double tol);

/// Largest eigenvalue of D*S*D with D = diag(|s_ii|^-1/2) (unit entries where
/// s_ii = 0). The congruence preserves inertia, so the sign of the result is
/// the definiteness verdict, but it is far better conditioned than the raw
/// spectrum when diagonal entries span many decades.
double equilibrated_max_eigenvalue(const Mat& s);

/// General (complex) spectrum.
CVec eigenvalues(const Mat& a);
bool is_hurwitz(const Mat& a);

/// Solves P*A + A^T*P = -nu*I for Hurwitz A. The result is symmetric positive
/// definite; throws NotHurwitz otherwise.
Mat solve_lyapunov(const Mat& acl, double nu);

/// Solves P*A + A^T*P = -Q for Hurwitz A and symmetric Q.
Mat solve_lyapunov(const Mat& acl, const Mat& q);

/// Residual |P*A + A^T*P + Q|_max.
double lyapunov_residual(const Mat& p, const Mat& acl, const Mat& q);

Mat observability_matrix(const Mat& a, const Mat& c);
std::size_t observability_rank(const Mat& a, const Mat& c);

/// Matches two spectra as multisets (greedy nearest pairing); true when every
/// pair agrees within rel_tol * max(1, |target|).
bool spectra_match(const CVec& actual, std::span<const Complex> targets, double rel_tol);

/// Compares the monic polynomials with the two root sets. Clustered roots are
/// ill-conditioned one by one but their symmetric functions are not, so this
/// is the check to use when targets nearly coincide. Coefficient k must agree
/// within rel_tol * max(C(n,k) r^k, |target coefficient|), r = max(1, |target|).
bool characteristic_match(const CVec& actual, std::span<const Complex> targets, double rel_tol);

/// Output injection gain L such that spec(A + L*C) equals `targets`.
///
/// The result is accepted when the computed closed-loop spectrum matches the
/// targets within 1e-6 (spectra_match) or, for clustered targets, when the
/// characteristic polynomials agree within 1e-9 (characteristic_match).
/// Requires (A, C) observable (NotObservable otherwise) and targets closed
/// under conjugation with negative real parts (BadTargets otherwise). Returns
/// L = 0 when spec(A) already equals the targets.
Mat stabilizing_output_injection(const Mat& a, const Mat& c, std::span<const Complex> targets);

}  // namespace supobs

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stablepc/dense.hpp"
#include "stablepc/operators.hpp"

namespace stablepc {

struct QrFactors {
  DenseMatrix q;  // m×n, orthonormal columns
  DenseMatrix r;  // n×n, upper triangular
};

/// Householder QR of an m×n matrix with m ≥ n (economy form). A rank
/// deficient input yields zero or tiny diagonal entries in R.
QrFactors householder_qr(const DenseMatrix& a);

/// Haar-distributed n×n orthogonal matrix: QR of a Gaussian matrix with each
/// column of Q multiplied by sign(R_jj).
DenseMatrix haar_orthogonal(std::size_t n, std::uint64_t seed);

/// LU with partial pivoting, PA = LU, stored compactly.
class LuFactorization {
 public:
  /// Throws SingularMatrix if a pivot is exactly zero.
  explicit LuFactorization(const DenseMatrix& a);

  std::size_t dim() const noexcept { return lu_.rows(); }
  Vector solve(std::span<const double> b) const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

/// Direct solve: LU with partial pivoting followed by `refinement_steps`
/// steps of iterative refinement whose residuals are evaluated with
/// compensated (double-double) arithmetic. Zero steps gives the plain LU
/// solution.
Vector lu_solve(const DenseMatrix& a, std::span<const double> b, int refinement_steps = 1);

/// Upper-triangular R with A = RᵀR. Reads the upper triangle of A only.
/// Throws NotPositiveDefinite on a nonpositive pivot.
DenseMatrix cholesky(const DenseMatrix& a);

enum class Triangle { lower, upper };

/// Solves R x = b, or Rᵀ x = b when `transpose` is set, by substitution.
/// Only the named triangle of R is read.
Vector triangular_solve(const DenseMatrix& r, std::span<const double> b, Triangle side,
                        bool transpose = false);

/// Randomized power method: z Gaussian, then `iters` times z ← AᵀAz/‖AᵀAz‖;
/// returns ‖Az‖. Never exceeds ‖A‖ beyond roundoff.
/// Throws ZeroVector if the iterate vanishes.
double spectral_norm_estimate(const LinearOperator& op, std::size_t iters, std::uint64_t seed);

/// ⌈ln n⌉ power steps, at least one.
std::size_t default_power_iterations(std::size_t n);

struct SvdResult {
  DenseMatrix u;               // m×n
  std::vector<double> sigma;   // descending
  DenseMatrix v;               // n×n
};

/// One-sided (Hestenes) Jacobi SVD of an m×n matrix, m ≥ n. Intended for
/// oracle-scale problems and small factors (n up to a few hundred).
SvdResult jacobi_svd(const DenseMatrix& a);
std::vector<double> singular_values(const DenseMatrix& a);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& a);

}  // namespace stablepc

#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "stablepc/dense.hpp"

namespace stablepc {

/// Matrix-free operator with its adjoint. Immutable once built; copies share
/// the captured state, so an operator may be used concurrently by many runs.
class LinearOperator {
 public:
  using Map = std::function<Vector(std::span<const double>)>;

  LinearOperator() = default;
  LinearOperator(std::size_t out_dim, std::size_t in_dim, Map apply, Map apply_adjoint);

  std::size_t out_dim() const noexcept { return out_dim_; }
  std::size_t in_dim() const noexcept { return in_dim_; }

  /// Az. Throws DimensionMismatch unless z has length in_dim().
  Vector apply(std::span<const double> z) const;
  /// Aᵀz. Throws DimensionMismatch unless z has length out_dim().
  Vector apply_adjoint(std::span<const double> z) const;

 private:
  std::size_t out_dim_ = 0;
  std::size_t in_dim_ = 0;
  Map apply_;
  Map apply_adjoint_;
};

/// Exposes only the inverse actions P⁻¹z and P⁻ᵀz.
class Preconditioner {
 public:
  using Map = LinearOperator::Map;

  Preconditioner() = default;
  Preconditioner(std::size_t dim, Map pre, Map pre_adjoint, bool is_identity = false);

  std::size_t dim() const noexcept { return dim_; }
  bool is_identity() const noexcept { return identity_; }

  Vector pre(std::span<const double> z) const;
  Vector pre_adjoint(std::span<const double> z) const;

 private:
  std::size_t dim_ = 0;
  bool identity_ = false;
  Map pre_;
  Map pre_adjoint_;
};

LinearOperator dense_operator(DenseMatrix a);
LinearOperator identity_operator(std::size_t n);

/// pre(z) = z exactly.
Preconditioner identity_preconditioner(std::size_t n);
/// The matrix given is P⁻¹ itself, never P.
Preconditioner dense_inverse_preconditioner(DenseMatrix pinv);
/// Factors the SPD matrix P = RᵀR once; pre(z) = R⁻¹(R⁻ᵀz).
Preconditioner cholesky_preconditioner(const DenseMatrix& p);

/// P = FFᵀ + λI applied through the economy SVD F = UΣVᵀ:
///   P⁻¹y = U (Σ² + λI)⁻¹ Uᵀy + (y − UUᵀy)/λ.
/// The SVD comes from a QR of F followed by a one-sided Jacobi SVD of the
/// k×k triangular factor.
Preconditioner nystrom_preconditioner(const DenseMatrix& f, double lambda);

/// z ↦ P⁻ᵀ(Aᵀ(A(P⁻¹z))), evaluated in exactly that order. Self-adjoint.
LinearOperator composed_normal_operator(const LinearOperator& a, const Preconditioner& p);
/// z ↦ A(P⁻¹z), adjoint z ↦ P⁻ᵀ(Aᵀz).
LinearOperator right_preconditioned_operator(const LinearOperator& a, const Preconditioner& p);
/// z ↦ P⁻¹(Az), adjoint z ↦ Aᵀ(P⁻ᵀz).
LinearOperator left_preconditioned_operator(const LinearOperator& a, const Preconditioner& p);

/// Invocation counts for the four primitives of a solver run.
struct MatvecCounts {
  std::size_t apply = 0;
  std::size_t apply_adjoint = 0;
  std::size_t pre = 0;
  std::size_t pre_adjoint = 0;

  friend bool operator==(const MatvecCounts&, const MatvecCounts&) = default;
};

/// Wrappers that bump the given per-run counters on every invocation. The
/// counters must outlive the returned objects.
LinearOperator counted(const LinearOperator& a, MatvecCounts& counts);
Preconditioner counted(const Preconditioner& p, MatvecCounts& counts);

}  // namespace stablepc

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stablepc/dense.hpp"
#include "stablepc/operators.hpp"

namespace stablepc {

enum class Side { none, right, left, spd };

std::string_view to_string(Side s);
Side side_from_string(std::string_view s);

/// How the preconditioner of an instance is stored, so it can be written to
/// disk and rebuilt.
struct PreconditionerSpec {
  enum class Form { identity, dense_inverse, cholesky, nystrom };
  Form form = Form::identity;
  /// P⁻¹ (dense_inverse), P (cholesky) or F (nystrom); empty for identity.
  DenseMatrix matrix;
  double lambda = 0.0;  // nystrom only
};

std::string_view to_string(PreconditionerSpec::Form f);
PreconditionerSpec::Form preconditioner_form_from_string(std::string_view s);

/// Factors the stored matrix as needed.
Preconditioner build_preconditioner(const PreconditionerSpec& spec, std::size_t n);

struct ProblemMeta {
  std::string generator;
  std::size_t n = 0;
  double kappa_a = 1.0;                   // requested κ(A)
  std::optional<double> kappa_pre;        // requested κ(AP⁻¹), κ(P⁻¹A) or κ(P^-½AP^-½)
  Side side = Side::none;
  std::uint64_t seed = 0;
};

struct ProblemInstance {
  std::shared_ptr<const DenseMatrix> a;
  LinearOperator op;
  PreconditionerSpec pre_spec;
  Preconditioner pre;
  Vector b;
  std::optional<Vector> x_ref;
  double norm_a = 1.0;  // exact ‖A‖ when the generator knows it, else a 20-step estimate
  ProblemMeta meta;
};

/// Assembles an instance around a dense matrix; computes x_ref with the LU
/// oracle when `with_reference` is set.
ProblemInstance make_instance(DenseMatrix a, PreconditionerSpec pre, Vector b,
                              std::optional<double> norm_a, ProblemMeta meta,
                              bool with_reference = true);

/// A = UΣVᵀ with Haar U, V and σ_i = 10^{-a(i-1)}, a = log₁₀(κ_A)/(n−1);
/// P⁻¹ = V·diag((1 + β(i−1))/σ_i), β = (κ_AP − 1)/(n−1), so that
/// AP⁻¹ = U·diag(1 + β(i−1)). b = Ax for a unit Gaussian x.
/// Throws InvalidSpec unless 1 ≤ κ_AP ≤ κ_A.
ProblemInstance gen_right_preconditioned(std::size_t n, double kappa_a, double kappa_ap,
                                         std::uint64_t seed);

/// Same A; P⁻¹ = diag((1 + β(i−1))/σ_i)·Uᵀ so P⁻¹A = diag(1 + β(i−1))·Vᵀ.
ProblemInstance gen_left_preconditioned(std::size_t n, double kappa_a, double kappa_pa,
                                        std::uint64_t seed);

struct ProblemTrio {
  ProblemInstance cluster_ill;   // W D W⁻¹, D = logspace(−2, 0)
  ProblemInstance spread_well;   // U D′, D′ = 1/linspace(1, 4)
  ProblemInstance cluster_well;  // W D′ W⁻¹
};

/// W = U_w·diag(linspace(½, 1))·V_wᵀ, so κ(W) = 2. Unpreconditioned, with a
/// shared unit Gaussian b.
ProblemTrio gen_gmres_lsqr_trio(std::size_t n, std::uint64_t seed);

/// Cyclic shift: A(i+1, i) = 1, A(1, n) = 1; b = e₁, so x = eₙ.
ProblemInstance gen_shift_matrix(std::size_t n);

/// A = UΣUᵀ with eigenvalues logspaced from 1 down to 1/κ_A and
/// P = UΣ^½ W Σ^½Uᵀ, W = GᵀG/(factor·n) for a Gaussian (factor·n)×n G.
/// P is symmetrized and applied through its Cholesky factor. b = Ax for a
/// unit Gaussian x.
ProblemInstance gen_spd_wishart(std::size_t n, double kappa_a, double wishart_factor,
                                std::uint64_t seed);

/// A = K + λI with K_ij = exp(−‖x_i − x_j‖²/2) over the rows of `points`.
/// Identity preconditioner; b = Ax for a unit Gaussian x drawn from `seed`.
ProblemInstance kernel_matrix(const DenseMatrix& points, double lambda, std::uint64_t seed = 0,
                              bool with_reference = true);

/// Columns of an SPD matrix, accessed one at a time.
struct ColumnSource {
  std::size_t n = 0;
  std::function<double(std::size_t)> diagonal;
  std::function<Vector(std::size_t)> column;
};

ColumnSource dense_columns(std::shared_ptr<const DenseMatrix> a);

struct RpCholeskyResult {
  DenseMatrix f;  // n×k', k' ≤ k
  std::vector<std::size_t> pivots;
  Vector residual_diagonal;  // diag(A − FFᵀ) after clamping
  /// Smallest residual diagonal entry before clamping, over all steps,
  /// relative to the largest initial diagonal entry.
  double min_relative_residual = 0.0;
  bool degenerate = false;  // trace vanished before k columns
};

/// Randomly pivoted partial Cholesky: pivot s drawn with probability
/// d_s/Σd, g = (Ae_s − F F_sᵀ)/√d_s, d ← max(d − g∘g, 0).
RpCholeskyResult rpcholesky(const ColumnSource& a, std::size_t k, std::uint64_t seed);

/// Kernel system with P = FFᵀ + λI from `rank` RPCholesky columns.
ProblemInstance kernel_nystrom_problem(const DenseMatrix& points, double lambda,
                                       std::size_t rank, std::uint64_t seed);

}  // namespace stablepc

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stablepc/dense.hpp"
#include "stablepc/history.hpp"

namespace stablepc {

/// b − Ax with every entry accumulated in double-double arithmetic and
/// rounded once at the end.
Vector compensated_residual(const DenseMatrix& a, std::span<const double> x,
                            std::span<const double> b);

/// Plain working-precision b − Ax, row by row in natural order.
Vector naive_residual(const DenseMatrix& a, std::span<const double> x, std::span<const double> b);

struct ErrorReport {
  double residual_norm = 0.0;  // compensated ‖b − Ax̂‖
  double berr = 0.0;           // residual_norm / (normest ‖x̂‖)
  std::optional<double> forward_error;  // ‖x_ref − x̂‖ / ‖x_ref‖
  double normest = 0.0;
};

/// Power steps used for ‖A‖ when the exact value is not known.
inline constexpr std::size_t kOraclePowerSteps = 20;

/// Normwise backward error ‖b − Ax̂‖/(‖A‖‖x̂‖) with the compensated residual.
/// `norm_a` should be the exact ‖A‖ when known. Throws ZeroSolution if x̂ = 0.
double backward_error(const DenseMatrix& a, double norm_a, std::span<const double> x_hat,
                      std::span<const double> b);
/// Same, estimating ‖A‖ with kOraclePowerSteps power steps.
double backward_error(const DenseMatrix& a, std::span<const double> x_hat,
                      std::span<const double> b);

ErrorReport error_report(const DenseMatrix& a, double norm_a, std::span<const double> x_hat,
                         std::span<const double> b,
                         std::optional<std::span<const double>> x_ref = std::nullopt);

/// Minimum-norm ΔA = r x̂ᵀ/‖x̂‖² with (A + ΔA)x̂ = b, r = b − Ax̂.
/// Throws ZeroSolution if x̂ = 0.
DenseMatrix rigal_gaches_perturbation(const DenseMatrix& a, std::span<const double> x_hat,
                                      std::span<const double> b);

/// Per-iteration contraction factor: exp of the least-squares slope of
/// ln(residual) against iteration. Throws InsufficientData with fewer than
/// two points or a nonpositive residual.
double fit_rate(std::span<const std::size_t> iterations, std::span<const double> residuals);
/// Uses records with first ≤ iteration ≤ last; measured residual when
/// present, else the solver's estimate.
double fit_rate(const ConvergenceHistory& history, std::size_t first, std::size_t last);

/// σ_max/σ_min through the one-sided Jacobi SVD (oracle scale).
double condition_number_oracle(const DenseMatrix& a);

/// (κ − 1)/(κ + 1)
double lsqr_rate(double kappa);
/// (√κ − 1)/(√κ + 1)
double cg_rate(double kappa);

/// Monitor that measures iterates against a dense matrix with the
/// compensated residual. `x_ref`, when given, adds the relative forward error.
Monitor oracle_monitor(std::shared_ptr<const DenseMatrix> a, Vector b, double norm_a,
                       std::optional<Vector> x_ref = std::nullopt, std::size_t every = 1);

}  // namespace stablepc

#pragma once

#include <cstddef>
#include <span>

#include "stablepc/history.hpp"
#include "stablepc/operators.hpp"

namespace stablepc {

/// Golub-Kahan LSQR on a bare operator from x₀ = 0. Records the recurrence
/// residual φ̄ every iteration. Stops at max_iters, at rtol, or on breakdown
/// (α or β below 10·u times the norm of the vector it came from), which
/// signals that the Krylov space holds the least-squares solution.
SolveResult lsqr(const LinearOperator& op, std::span<const double> b,
                 const SolveControls& controls, const Instrumentation& inst = {});

/// Right-preconditioned LSQR: LSQR on z ↦ A(P⁻¹z), then x = P⁻¹y.
SolveResult plsqr(const LinearOperator& a, const Preconditioner& p, std::span<const double> b,
                  const SolveControls& controls, const Instrumentation& inst = {});

/// PLSQR with iterative refinement and automatic termination:
///  * ‖A‖ estimated with ⌈ln n⌉ randomized power steps;
///  * every f = cfg.check_frequency iterations x' = x + P⁻¹y, r = b − Ax',
///    berr = ‖r‖/(‖x'‖·normest);
///  * stop when berr ≤ tol; refine (x ← x', y ← 0, u ← r/‖r‖) when
///    berr > stagnation·berr_{i−f} (automatic) or at every check (fixed).
/// Returns Status::no_progress when two consecutive refinements leave both
/// berr and ‖r‖ unchanged to 1% while still above tolerance.
SolveResult plsqr_ir(const LinearOperator& a, const Preconditioner& p, std::span<const double> b,
                     const SolverConfig& cfg, const Instrumentation& inst = {});

/// plsqr_ir with the automatic schedule forced.
SolveResult plsqr_ir_auto(const LinearOperator& a, const Preconditioner& p,
                          std::span<const double> b, const SolverConfig& cfg,
                          const Instrumentation& inst = {});

struct LanczosResult {
  Vector solution;
  std::size_t steps = 0;  // Lanczos vectors used, k
  bool truncated = false;  // β_{k+1} vanished before q steps
};

/// Lanczos without reorthogonalization for M y = c, M symmetric:
/// y = ‖c‖·Q(T⁻¹e₁), with the tridiagonal solve done by Givens QR. A zero
/// diagonal in that QR truncates one step and re-solves. c = 0 returns 0.
LanczosResult lanczos_solve(const LinearOperator& m, std::span<const double> c, std::size_t q,
                            double unit_roundoff = 0x1.0p-53);

struct InnerSolver {
  enum class Kind { lanczos, cg, lsqr };
  Kind kind = Kind::lanczos;
  std::size_t iterations = 50;
};

struct MetaSolverConfig {
  std::size_t max_sweeps = 10;  // t
  InnerSolver inner;
  std::optional<double> berr_tolerance_factor;  // absent means √n
  double unit_roundoff = 0x1.0p-53;
  std::uint64_t seed = 0;
};

/// Refinement on the preconditioned normal equations. Sweep i:
///   c = P⁻ᵀ(Aᵀ(b − Ax)),  δy ≈ M⁻¹c with M = P⁻ᵀAᵀAP⁻¹,  x ← x + P⁻¹δy,
/// then stops early once the working-precision berr reaches tolerance.
/// Records one history row per sweep.
SolveResult meta_solver(const LinearOperator& a, const Preconditioner& p,
                        std::span<const double> b, const MetaSolverConfig& cfg,
                        const Instrumentation& inst = {});

/// Full MGS-Arnoldi GMRES from x₀ = 0 with Givens least-squares updates.
/// With a preconditioner it minimizes ‖b − AP⁻¹z‖ and returns x = P⁻¹z.
SolveResult gmres(const LinearOperator& op, std::span<const double> b,
                  const SolveControls& controls, const Preconditioner* right_pre = nullptr,
                  const Instrumentation& inst = {});

/// Preconditioned CG from x₀ = 0; `pre` plays the role of P⁻¹. Throws
/// IndefiniteOperator on nonpositive curvature pᵀAp ≤ 0 with p ≠ 0.
SolveResult cg(const LinearOperator& op, std::span<const double> b, const SolveControls& controls,
               const Preconditioner* pre = nullptr, const Instrumentation& inst = {});

/// PCG with a residual recomputation and restart every cfg.check_frequency
/// iterations, terminating once the working-precision berr reaches tolerance.
SolveResult pcg_ir(const LinearOperator& a, const Preconditioner& p, std::span<const double> b,
                   const SolverConfig& cfg, const Instrumentation& inst = {});

/// CG on (AᵀP⁻ᵀP⁻¹A)x = Aᵀ(P⁻ᵀ(P⁻¹b)).
SolveResult cgnr_left(const LinearOperator& a, const Preconditioner& p,
                      std::span<const double> b, const SolveControls& controls,
                      const Instrumentation& inst = {});

/// CG on (P⁻¹AAᵀP⁻ᵀ)y = P⁻¹b, x = Aᵀ(P⁻ᵀy).
SolveResult cgne_left(const LinearOperator& a, const Preconditioner& p,
                      std::span<const double> b, const SolveControls& controls,
                      const Instrumentation& inst = {});

/// LSQR on P⁻¹A x = P⁻¹b, no refinement. The monitor sees x directly, so
/// measurements refer to the original system.
SolveResult left_plsqr(const LinearOperator& a, const Preconditioner& p,
                       std::span<const double> b, const SolveControls& controls,
                       const Instrumentation& inst = {});

}  // namespace stablepc

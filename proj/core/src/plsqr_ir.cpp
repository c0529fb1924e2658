#include <cmath>
#include <limits>

#include "solver_common.hpp"
#include "stablepc/errors.hpp"
#include "stablepc/linalg.hpp"
#include "stablepc/solvers.hpp"

namespace stablepc {

SolveResult plsqr_ir(const LinearOperator& a, const Preconditioner& p, std::span<const double> b,
                     const SolverConfig& cfg, const Instrumentation& inst) {
  cfg.validate();
  const std::size_t n = a.in_dim();
  if (a.out_dim() != b.size()) throw DimensionMismatch("plsqr_ir: rhs length");

  SolveResult result;
  MatvecCounts& counts = result.history.counts;
  const LinearOperator a_c = counted(a, counts);
  const Preconditioner p_c = counted(p, counts);
  const LinearOperator op = right_preconditioned_operator(a_c, p_c);
  detail::Recorder rec(result.history, inst);

  const double tol = cfg.tolerance(n);
  const double normest =
      spectral_norm_estimate(a_c, default_power_iterations(n), cfg.seed);

  // x accumulates solution-space corrections (refinement mode); y_base
  // accumulates preconditioned coordinates (restart mode). Exactly one of
  // them is ever nonzero.
  Vector x(n, 0.0);
  Vector y_base(n, 0.0);
  const bool restart_mode = cfg.mode == RefinementMode::restart;

  auto current_solution = [&](const Vector& y, bool charge) {
    const Preconditioner& pp = charge ? p_c : p;
    if (restart_mode) return pp.pre(add(y_base, y));
    return add(x, pp.pre(y));
  };

  detail::LsqrEngine engine(op, cfg.unit_roundoff);
  Vector rhs(b.begin(), b.end());
  std::size_t total = 0;
  double last_refinement_berr = std::numeric_limits<double>::quiet_NaN();
  double last_refinement_residual = std::numeric_limits<double>::quiet_NaN();
  rec.record(0, norm2(b), [&] { return current_solution(Vector(n, 0.0), false); });

  if (norm2(b) == 0.0) {
    result.solution = Vector(n, 0.0);
    result.status = Status::converged;
    rec.finish(Event::terminated, result.solution);
    return result;
  }

  while (true) {
    bool alive = engine.start(rhs);
    double prev_berr = std::numeric_limits<double>::infinity();  // berr₀ of this run
    Vector x_prime;
    Vector r;
    double berr = std::numeric_limits<double>::infinity();
    bool checked = false;

    for (std::size_t i = 1; alive || i == 1; ++i) {
      if (alive) {
        alive = engine.step();
        ++total;
        rec.record(total, engine.residual_estimate(),
                   [&] { return current_solution(engine.y(), false); }, !alive);
      }
      const bool budget_spent = total >= cfg.max_total_iters;
      if (i % cfg.check_frequency != 0 && alive && !budget_spent) continue;

      // x' = x + P⁻¹y, r = b − Ax', berr = ‖r‖/(‖x'‖·normest)
      x_prime = current_solution(engine.y(), true);
      r = subtract(b, a_c.apply(x_prime));
      const double nx = norm2(x_prime);
      berr = nx > 0.0 ? norm2(r) / (nx * normest) : std::numeric_limits<double>::infinity();
      checked = true;
      if (!result.history.empty()) result.history.back().berr_estimate = berr;

      if (berr <= tol) {
        result.solution = std::move(x_prime);
        result.status = Status::converged;
        rec.finish(Event::terminated, result.solution);
        return result;
      }
      if (budget_spent) {
        result.solution = std::move(x_prime);
        result.status = Status::max_iters;
        rec.finish(Event::terminated, result.solution);
        return result;
      }
      const bool stagnated = cfg.schedule == RefinementSchedule::fixed ||
                             berr > cfg.stagnation_factor * prev_berr;
      if (!alive || stagnated) break;
      prev_berr = berr;
    }
    if (!checked) break;

    // Stuck only if neither berr nor ‖r‖ moved: while ‖x'‖ is still dominated
    // by error, berr can sit still although the residual keeps falling.
    const double rnorm = norm2(r);
    if (std::abs(berr - last_refinement_berr) <= 1e-2 * berr &&
        std::abs(rnorm - last_refinement_residual) <= 1e-2 * rnorm) {
      result.solution = std::move(x_prime);
      result.status = Status::no_progress;
      rec.finish(Event::terminated, result.solution);
      return result;
    }
    last_refinement_berr = berr;
    last_refinement_residual = rnorm;

    // Iterative refinement: x ← x', y ← 0, u ← r/‖r‖.
    if (restart_mode) {
      y_base = add(y_base, engine.y());
    } else {
      x = std::move(x_prime);
    }
    rhs = std::move(r);
    rec.mark(Event::refinement);
  }

  result.solution = current_solution(engine.y(), true);
  result.status = Status::breakdown;
  rec.finish(Event::breakdown, result.solution);
  return result;
}

SolveResult plsqr_ir_auto(const LinearOperator& a, const Preconditioner& p,
                          std::span<const double> b, const SolverConfig& cfg,
                          const Instrumentation& inst) {
  SolverConfig auto_cfg = cfg;
  auto_cfg.schedule = RefinementSchedule::automatic;
  return plsqr_ir(a, p, b, auto_cfg, inst);
}

}  // namespace stablepc

#include <cmath>
#include <limits>

#include "solver_common.hpp"
#include "stablepc/errors.hpp"
#include "stablepc/linalg.hpp"
#include "stablepc/solvers.hpp"

namespace stablepc {

namespace {

Vector inner_solve(const LinearOperator& m, const Vector& c, const InnerSolver& inner,
                   double unit_roundoff) {
  switch (inner.kind) {
    case InnerSolver::Kind::lanczos:
      return lanczos_solve(m, c, inner.iterations, unit_roundoff).solution;
    case InnerSolver::Kind::cg:
      return cg(m, c, {.max_iters = inner.iterations}).solution;
    case InnerSolver::Kind::lsqr:
      return lsqr(m, c, {.max_iters = inner.iterations}).solution;
  }
  return Vector(c.size(), 0.0);
}

}  // namespace

SolveResult meta_solver(const LinearOperator& a, const Preconditioner& p,
                        std::span<const double> b, const MetaSolverConfig& cfg,
                        const Instrumentation& inst) {
  if (cfg.max_sweeps < 1) throw InvalidSpec("meta_solver: need at least one sweep");
  if (cfg.inner.iterations < 1) throw InvalidSpec("meta_solver: inner iterations must be >= 1");
  if (a.out_dim() != b.size()) throw DimensionMismatch("meta_solver: rhs length");
  const std::size_t n = a.in_dim();

  SolveResult result;
  MatvecCounts& counts = result.history.counts;
  const LinearOperator a_c = counted(a, counts);
  const Preconditioner p_c = counted(p, counts);
  const LinearOperator m = composed_normal_operator(a_c, p_c);
  detail::Recorder rec(result.history, inst);

  const double tol =
      cfg.berr_tolerance_factor.value_or(std::sqrt(static_cast<double>(n))) * cfg.unit_roundoff;
  const double normest = spectral_norm_estimate(a_c, default_power_iterations(n), cfg.seed);

  Vector x(n, 0.0);
  Vector r(b.begin(), b.end());
  rec.record(0, norm2(r), [&] { return x; });

  result.status = Status::max_iters;
  for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    const Vector c = p_c.pre_adjoint(a_c.apply_adjoint(r));
    const Vector dy = inner_solve(m, c, cfg.inner, cfg.unit_roundoff);
    axpy(1.0, p_c.pre(dy), x);

    r = subtract(b, a_c.apply(x));
    const double rnorm = norm2(r);
    const double xnorm = norm2(x);
    const double berr =
        xnorm > 0.0 ? rnorm / (xnorm * normest) : std::numeric_limits<double>::infinity();
    IterationRecord& row = rec.record(sweep, rnorm, [&] { return x; });
    row.berr_estimate = berr;
    if (berr <= tol) {
      result.status = Status::converged;
      break;
    }
    if (sweep < cfg.max_sweeps) rec.mark(Event::refinement);
  }
  result.solution = std::move(x);
  rec.finish(Event::terminated, result.solution);
  return result;
}

}  // namespace stablepc

#include <cmath>
#include <limits>
#include <optional>

#include "solver_common.hpp"
#include "stablepc/errors.hpp"
#include "stablepc/linalg.hpp"
#include "stablepc/solvers.hpp"

namespace stablepc {

namespace {

/// Preconditioned CG state for one run from d = 0 on op·d = rhs.
class CgEngine {
 public:
  CgEngine(const LinearOperator& op, const Preconditioner* pre) : op_(op), pre_(pre) {}

  /// Returns false if rhs is zero, in which case d = 0 solves it.
  bool start(std::span<const double> rhs) {
    d_.assign(op_.in_dim(), 0.0);
    r_.assign(rhs.begin(), rhs.end());
    rnorm_ = norm2(r_);
    if (rnorm_ == 0.0) return false;
    Vector z = precondition(r_);
    rz_ = dot(r_, z);
    p_ = std::move(z);
    return rz_ != 0.0;
  }

  /// One CG step. Returns false once the residual vanished exactly and no
  /// further step is possible.
  bool step() {
    const Vector q = op_.apply(p_);
    const double curvature = dot(p_, q);
    if (!(curvature > 0.0)) {
      if (norm2(p_) > 0.0) {
        throw IndefiniteOperator("cg: nonpositive curvature pᵀAp = " +
                                 std::to_string(curvature));
      }
      return false;
    }
    const double a = rz_ / curvature;
    axpy(a, p_, d_);
    axpy(-a, q, r_);
    rnorm_ = norm2(r_);
    if (rnorm_ == 0.0) return false;
    Vector z = precondition(r_);
    const double rz_next = dot(r_, z);
    if (rz_next == 0.0) return false;
    const double beta = rz_next / rz_;
    rz_ = rz_next;
    for (std::size_t i = 0; i < p_.size(); ++i) p_[i] = z[i] + beta * p_[i];
    return true;
  }

  const Vector& solution() const noexcept { return d_; }
  double residual_norm() const noexcept { return rnorm_; }

 private:
  Vector precondition(const Vector& r) const { return pre_ ? pre_->pre(r) : r; }

  const LinearOperator& op_;
  const Preconditioner* pre_;
  Vector d_, r_, p_;
  double rz_ = 0.0;
  double rnorm_ = 0.0;
};

SolveResult run_cg(const LinearOperator& op, std::span<const double> rhs,
                   const SolveControls& controls, const Preconditioner* pre,
                   const Instrumentation& inst,
                   const std::function<Vector(const Vector&, bool counted)>& to_solution) {
  if (op.in_dim() != op.out_dim()) throw DimensionMismatch("cg: operator must be square");
  if (rhs.size() != op.out_dim()) throw DimensionMismatch("cg: rhs length");
  SolveResult result;
  detail::Recorder rec(result.history, inst);
  CgEngine engine(op, pre);
  const bool started = engine.start(rhs);
  const double initial = engine.residual_norm();
  auto materialize = [&] { return to_solution(engine.solution(), false); };
  rec.record(0, initial, materialize);

  result.status = started ? Status::max_iters : Status::converged;
  Event final_event = Event::terminated;
  for (std::size_t it = 1; started && it <= controls.max_iters; ++it) {
    const bool ok = engine.step();
    rec.record(it, engine.residual_norm(), materialize, !ok);
    if (!ok) {
      result.status = engine.residual_norm() == 0.0 ? Status::converged : Status::breakdown;
      if (result.status == Status::breakdown) final_event = Event::breakdown;
      break;
    }
    if (controls.rtol > 0.0 && engine.residual_norm() <= controls.rtol * initial) {
      result.status = Status::converged;
      break;
    }
  }
  result.solution = to_solution(engine.solution(), true);
  rec.finish(final_event, result.solution);
  return result;
}

}  // namespace

SolveResult cg(const LinearOperator& op, std::span<const double> b, const SolveControls& controls,
               const Preconditioner* pre, const Instrumentation& inst) {
  MatvecCounts tally;
  const LinearOperator op_c = counted(op, tally);
  std::optional<Preconditioner> pre_c;
  if (pre) pre_c = counted(*pre, tally);
  SolveResult result = run_cg(op_c, b, controls, pre_c ? &*pre_c : nullptr, inst,
                              [](const Vector& d, bool) { return d; });
  result.history.counts = tally;
  return result;
}

SolveResult pcg_ir(const LinearOperator& a, const Preconditioner& p, std::span<const double> b,
                   const SolverConfig& cfg, const Instrumentation& inst) {
  cfg.validate();
  if (a.in_dim() != a.out_dim()) throw DimensionMismatch("pcg_ir: operator must be square");
  if (b.size() != a.out_dim()) throw DimensionMismatch("pcg_ir: rhs length");
  const std::size_t n = b.size();

  SolveResult result;
  MatvecCounts& counts = result.history.counts;
  const LinearOperator a_c = counted(a, counts);
  const Preconditioner p_c = counted(p, counts);
  detail::Recorder rec(result.history, inst);

  const double tol = cfg.tolerance(n);
  const double normest = spectral_norm_estimate(a_c, default_power_iterations(n), cfg.seed);

  Vector x(n, 0.0);
  CgEngine engine(a_c, &p_c);
  Vector rhs(b.begin(), b.end());
  auto current = [&] { return add(x, engine.solution()); };
  rec.record(0, norm2(b), [&] { return x; });
  if (norm2(b) == 0.0) {
    result.solution = x;
    result.status = Status::converged;
    rec.finish(Event::terminated, result.solution);
    return result;
  }

  std::size_t total = 0;
  double last_refinement_berr = std::numeric_limits<double>::quiet_NaN();
  double last_refinement_residual = std::numeric_limits<double>::quiet_NaN();
  while (true) {
    bool alive = engine.start(rhs);
    Vector x_prime;
    Vector r;
    double berr = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; alive || i == 1; ++i) {
      if (alive) {
        alive = engine.step();
        ++total;
        rec.record(total, engine.residual_norm(), current, !alive);
      }
      const bool budget_spent = total >= cfg.max_total_iters;
      if (i % cfg.check_frequency != 0 && alive && !budget_spent) continue;

      x_prime = current();
      r = subtract(b, a_c.apply(x_prime));
      const double nx = norm2(x_prime);
      berr = nx > 0.0 ? norm2(r) / (nx * normest) : std::numeric_limits<double>::infinity();
      result.history.back().berr_estimate = berr;
      if (berr <= tol || budget_spent) {
        result.solution = std::move(x_prime);
        result.status = berr <= tol ? Status::converged : Status::max_iters;
        rec.finish(Event::terminated, result.solution);
        return result;
      }
      break;
    }

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
    x = std::move(x_prime);
    rhs = std::move(r);
    rec.mark(Event::refinement);
  }
}

SolveResult cgnr_left(const LinearOperator& a, const Preconditioner& p,
                      std::span<const double> b, const SolveControls& controls,
                      const Instrumentation& inst) {
  if (a.out_dim() != b.size() || p.dim() != a.out_dim()) {
    throw DimensionMismatch("cgnr_left: dimensions");
  }
  MatvecCounts tally;
  const LinearOperator a_c = counted(a, tally);
  const Preconditioner p_c = counted(p, tally);
  const LinearOperator normal(
      a.in_dim(), a.in_dim(),
      [a_c, p_c](std::span<const double> z) {
        return a_c.apply_adjoint(p_c.pre_adjoint(p_c.pre(a_c.apply(z))));
      },
      [a_c, p_c](std::span<const double> z) {
        return a_c.apply_adjoint(p_c.pre_adjoint(p_c.pre(a_c.apply(z))));
      });
  const Vector rhs = a_c.apply_adjoint(p_c.pre_adjoint(p_c.pre(b)));
  SolveResult result = run_cg(normal, rhs, controls, nullptr, inst,
                              [](const Vector& x, bool) { return x; });
  result.history.counts = tally;
  return result;
}

SolveResult cgne_left(const LinearOperator& a, const Preconditioner& p,
                      std::span<const double> b, const SolveControls& controls,
                      const Instrumentation& inst) {
  if (a.out_dim() != b.size() || p.dim() != a.out_dim()) {
    throw DimensionMismatch("cgne_left: dimensions");
  }
  MatvecCounts tally;
  const LinearOperator a_c = counted(a, tally);
  const Preconditioner p_c = counted(p, tally);
  const LinearOperator adjoint_normal(
      a.out_dim(), a.out_dim(),
      [a_c, p_c](std::span<const double> y) {
        return p_c.pre(a_c.apply(a_c.apply_adjoint(p_c.pre_adjoint(y))));
      },
      [a_c, p_c](std::span<const double> y) {
        return p_c.pre(a_c.apply(a_c.apply_adjoint(p_c.pre_adjoint(y))));
      });
  const Vector rhs = p_c.pre(b);
  SolveResult result = run_cg(
      adjoint_normal, rhs, controls, nullptr, inst, [&](const Vector& y, bool charge) {
        return charge ? a_c.apply_adjoint(p_c.pre_adjoint(y)) : a.apply_adjoint(p.pre_adjoint(y));
      });
  result.history.counts = tally;
  return result;
}

}  // namespace stablepc

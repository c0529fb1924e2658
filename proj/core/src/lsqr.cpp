#include <cmath>

#include "solver_common.hpp"
#include "stablepc/errors.hpp"
#include "stablepc/solvers.hpp"

namespace stablepc {

namespace detail {

Recorder::Recorder(ConvergenceHistory& history, const Instrumentation& inst)
    : history_(history), inst_(inst) {}

void Recorder::measure_into(IterationRecord& rec, std::span<const double> x) {
  const Measurement m = inst_.monitor->measure(x);
  rec.residual = m.residual;
  rec.berr = m.berr;
  rec.forward_error = m.forward_error;
}

IterationRecord& Recorder::record(std::size_t iteration, double residual_estimate,
                                  const Materialize& materialize, bool force) {
  flush();
  IterationRecord& rec = history_.append({.iteration = iteration,
                                          .residual_estimate = residual_estimate});
  pending_ = true;
  if (inst_.monitor) {
    const std::size_t every = inst_.monitor->every == 0 ? 1 : inst_.monitor->every;
    if (force || iteration % every == 0) {
      const Vector x = materialize();
      measure_into(rec, x);
    }
  }
  return rec;
}

void Recorder::mark(Event e) {
  if (!history_.empty()) history_.back().event = e;
}

void Recorder::finish(Event e, std::span<const double> solution) {
  if (history_.empty()) return;
  IterationRecord& rec = history_.back();
  rec.event = e;
  if (inst_.monitor && !rec.residual) measure_into(rec, solution);
  flush();
}

void Recorder::flush() {
  if (pending_ && inst_.observer) inst_.observer(history_.back());
  pending_ = false;
}

LsqrEngine::LsqrEngine(const LinearOperator& op, double unit_roundoff)
    : op_(op), unit_roundoff_(unit_roundoff) {}

bool LsqrEngine::start(std::span<const double> rhs) {
  y_.assign(op_.in_dim(), 0.0);
  beta_ = norm2(rhs);
  beta0_ = beta_;
  phibar_ = beta_;
  if (beta_ == 0.0) {
    alpha_ = 0.0;
    return false;
  }
  u_.assign(rhs.begin(), rhs.end());
  scale(1.0 / beta_, u_);
  v_ = op_.apply_adjoint(u_);
  alpha_ = norm2(v_);
  rhobar_ = alpha_;
  if (alpha_ == 0.0) return false;
  scale(1.0 / alpha_, v_);
  w_ = v_;
  return true;
}

bool LsqrEngine::step() {
  // u ← Op v − αu, β ← ‖u‖
  Vector next_u = op_.apply(v_);
  const double pre_norm_u = norm2(next_u);
  axpy(-alpha_, u_, next_u);
  double beta = norm2(next_u);
  const bool beta_zero = beta <= kBreakdownFactor * unit_roundoff_ * pre_norm_u;

  double alpha = 0.0;
  bool alpha_zero = true;
  if (beta_zero) {
    beta = 0.0;
  } else {
    scale(1.0 / beta, next_u);
    u_ = std::move(next_u);
    // v ← Opᵀu − βv, α ← ‖v‖
    Vector next_v = op_.apply_adjoint(u_);
    const double pre_norm_v = norm2(next_v);
    axpy(-beta, v_, next_v);
    alpha = norm2(next_v);
    alpha_zero = alpha <= kBreakdownFactor * unit_roundoff_ * pre_norm_v;
    if (alpha_zero) {
      alpha = 0.0;
    } else {
      scale(1.0 / alpha, next_v);
      v_ = std::move(next_v);
    }
  }

  const double rho = std::sqrt(rhobar_ * rhobar_ + beta * beta);
  const double c = rhobar_ / rho;
  const double s = beta / rho;
  const double theta = s * alpha;
  rhobar_ = -c * alpha;
  const double phi = c * phibar_;
  phibar_ = s * phibar_;

  axpy(phi / rho, w_, y_);
  for (std::size_t i = 0; i < w_.size(); ++i) w_[i] = v_[i] - (theta / rho) * w_[i];

  beta_ = beta;
  alpha_ = alpha;
  return !(beta_zero || alpha_zero);
}

namespace {

/// Shared LSQR driver; `to_solution` maps the LSQR iterate to the solution
/// of the caller's system (identity, or P⁻¹y).
SolveResult run_lsqr(const LinearOperator& op, std::span<const double> rhs,
                     const SolveControls& controls, const Instrumentation& inst,
                     const std::function<Vector(const Vector&, bool counted)>& to_solution) {
  SolveResult result;
  Recorder rec(result.history, inst);
  LsqrEngine engine(op, 0x1.0p-53);

  const bool started = engine.start(rhs);
  const double initial = engine.initial_norm();
  auto materialize = [&] { return to_solution(engine.y(), false); };
  rec.record(0, initial, materialize);

  if (!started) {
    result.solution = to_solution(engine.y(), true);
    result.status = initial == 0.0 ? Status::converged : Status::breakdown;
    rec.finish(initial == 0.0 ? Event::terminated : Event::breakdown, result.solution);
    return result;
  }

  result.status = Status::max_iters;
  Event final_event = Event::terminated;
  for (std::size_t it = 1; it <= controls.max_iters; ++it) {
    const bool ok = engine.step();
    rec.record(it, engine.residual_estimate(), materialize, !ok);
    if (!ok) {
      result.status = Status::breakdown;
      final_event = Event::breakdown;
      break;
    }
    if (controls.rtol > 0.0 && engine.residual_estimate() <= controls.rtol * initial) {
      result.status = Status::converged;
      break;
    }
  }
  result.solution = to_solution(engine.y(), true);
  rec.finish(final_event, result.solution);
  return result;
}

}  // namespace

}  // namespace detail

SolveResult lsqr(const LinearOperator& op, std::span<const double> b,
                 const SolveControls& controls, const Instrumentation& inst) {
  MatvecCounts tally;
  const LinearOperator op_counted = counted(op, tally);
  SolveResult result = detail::run_lsqr(op_counted, b, controls, inst,
                                        [](const Vector& y, bool) { return y; });
  result.history.counts = tally;
  return result;
}

SolveResult plsqr(const LinearOperator& a, const Preconditioner& p, std::span<const double> b,
                  const SolveControls& controls, const Instrumentation& inst) {
  MatvecCounts tally;
  const LinearOperator a_counted = counted(a, tally);
  const Preconditioner p_counted = counted(p, tally);
  const LinearOperator op = right_preconditioned_operator(a_counted, p_counted);
  SolveResult result = detail::run_lsqr(
      op, b, controls, inst,
      [&](const Vector& y, bool charge) { return charge ? p_counted.pre(y) : p.pre(y); });
  result.history.counts = tally;
  return result;
}

SolveResult left_plsqr(const LinearOperator& a, const Preconditioner& p,
                       std::span<const double> b, const SolveControls& controls,
                       const Instrumentation& inst) {
  MatvecCounts tally;
  const LinearOperator a_counted = counted(a, tally);
  const Preconditioner p_counted = counted(p, tally);
  const Vector rhs = p_counted.pre(b);
  const LinearOperator op = left_preconditioned_operator(a_counted, p_counted);
  SolveResult result = detail::run_lsqr(op, rhs, controls, inst,
                                        [](const Vector& y, bool) { return y; });
  result.history.counts = tally;
  return result;
}

}  // namespace stablepc

#pragma once

// Internal helpers shared by the solver implementations.

#include <functional>
#include <span>

#include "stablepc/history.hpp"
#include "stablepc/operators.hpp"

namespace stablepc::detail {

/// Below this multiple of u (relative to the vector a scalar was computed
/// from) an α, β or h_{k+1,k} is treated as an exact zero.
inline constexpr double kBreakdownFactor = 10.0;

/// Appends history rows, runs the monitor on schedule, and hands each row to
/// the observer once it can no longer change.
class Recorder {
 public:
  using Materialize = std::function<Vector()>;

  Recorder(ConvergenceHistory& history, const Instrumentation& inst);
  Recorder(const Recorder&) = delete;
  Recorder& operator=(const Recorder&) = delete;

  /// Measures when the monitor is due at this iteration or `force` is set;
  /// `materialize` is only invoked when a measurement happens.
  IterationRecord& record(std::size_t iteration, double residual_estimate,
                          const Materialize& materialize, bool force = false);
  void mark(Event e);
  /// Marks the last row with the terminal event, measuring it against
  /// `solution` if it was not measured yet, and flushes it.
  void finish(Event e, std::span<const double> solution);

 private:
  void flush();
  void measure_into(IterationRecord& rec, std::span<const double> x);

  ConvergenceHistory& history_;
  const Instrumentation& inst_;
  bool pending_ = false;
};

/// Golub-Kahan bidiagonalization with the LSQR Givens updates, on whatever
/// operator it is given. Variable names follow the usual LSQR recurrence.
class LsqrEngine {
 public:
  LsqrEngine(const LinearOperator& op, double unit_roundoff);

  /// u ← rhs/‖rhs‖, y ← 0, and the first right vector. Returns false if the
  /// start already breaks down (rhs = 0 or Aᵀrhs = 0).
  bool start(std::span<const double> rhs);
  /// One bidiagonalization step plus solution update. Returns false when α
  /// or β vanished; the update for this step has been applied.
  bool step();

  const Vector& y() const noexcept { return y_; }
  double residual_estimate() const noexcept { return phibar_; }
  double initial_norm() const noexcept { return beta0_; }

  /// Bidiagonalization state, exposed for recurrence checks in tests.
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  const Vector& u() const noexcept { return u_; }
  const Vector& v() const noexcept { return v_; }

 private:
  const LinearOperator& op_;
  double unit_roundoff_;
  Vector u_, v_, w_, y_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double beta0_ = 0.0;
  double phibar_ = 0.0;
  double rhobar_ = 0.0;
};

}  // namespace stablepc::detail

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stablepc/dense.hpp"
#include "stablepc/operators.hpp"

namespace stablepc {

enum class Event { none, refinement, terminated, breakdown };

enum class Status {
  converged,    // backward-error target met (or exact solution reached)
  max_iters,    // iteration budget exhausted
  breakdown,    // Krylov breakdown ended the run
  no_progress,  // refinement stopped reducing the backward error
};

std::string_view to_string(Event e);
std::string_view to_string(Status s);
Event event_from_string(std::string_view s);

/// One row of a convergence history. `residual_estimate` is what the solver's
/// own recurrence believes; the optional fields are filled by measurements.
struct IterationRecord {
  std::size_t iteration = 0;
  double residual_estimate = 0.0;
  std::optional<double> residual;       // measured ‖b − Ax‖ (monitor)
  std::optional<double> berr;           // measured backward error (monitor)
  std::optional<double> berr_estimate;  // the solver's own working-precision check
  std::optional<double> forward_error;  // relative, when a reference is known
  Event event = Event::none;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

/// Per-iteration records plus primitive invocation counts for one run.
class ConvergenceHistory {
 public:
  /// Throws std::logic_error unless iteration indices strictly increase.
  IterationRecord& append(IterationRecord record);

  std::span<const IterationRecord> records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }
  const IterationRecord& back() const { return records_.back(); }
  IterationRecord& back() { return records_.back(); }

  std::size_t count(Event e) const;
  std::size_t refinements() const { return count(Event::refinement); }

  MatvecCounts counts;

  friend bool operator==(const ConvergenceHistory&, const ConvergenceHistory&) = default;

 private:
  std::vector<IterationRecord> records_;
};

struct SolveResult {
  Vector solution;
  ConvergenceHistory history;
  Status status = Status::max_iters;
};

/// Result of measuring an iterate against an external reference.
struct Measurement {
  double residual = 0.0;
  std::optional<double> berr;  // absent when x = 0
  std::optional<double> forward_error;
};

/// Measures iterates every `every` iterations (and at run end). Measurement
/// work is not charged to the run's matvec counters.
struct Monitor {
  std::function<Measurement(std::span<const double> x)> measure;
  std::size_t every = 1;
};

/// Called synchronously with each record as it is finalized. Must not touch
/// solver state.
using Observer = std::function<void(const IterationRecord&)>;

struct Instrumentation {
  std::optional<Monitor> monitor;
  Observer observer;
};

/// Controls for the single-run baseline solvers.
struct SolveControls {
  std::size_t max_iters = 100;
  /// Stop once the recurrence residual falls to rtol·‖b‖; 0 disables.
  double rtol = 0.0;
};

enum class RefinementMode {
  iterative_refinement,  // x accumulates in solution space, y resets
  restart,               // accumulate in preconditioned coordinates, restart LSQR
};

enum class RefinementSchedule {
  automatic,  // stagnation rule berr_i > factor · berr_{i−f}
  fixed,      // refine at every check
};

struct SolverConfig {
  std::size_t max_total_iters = 1000;
  std::size_t check_frequency = 50;
  /// Termination at berr ≤ factor·u; absent means √n.
  std::optional<double> berr_tolerance_factor;
  double stagnation_factor = 0.9;
  double unit_roundoff = 0x1.0p-53;
  std::uint64_t seed = 0;
  RefinementMode mode = RefinementMode::iterative_refinement;
  RefinementSchedule schedule = RefinementSchedule::automatic;

  /// Throws InvalidSpec unless check_frequency ≥ 1 and 0 < stagnation < 1.
  void validate() const;
  double tolerance(std::size_t n) const;
};

}  // namespace stablepc

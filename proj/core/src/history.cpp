#include "stablepc/history.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stablepc/errors.hpp"

namespace stablepc {

std::string_view to_string(Event e) {
  switch (e) {
    case Event::none: return "none";
    case Event::refinement: return "refinement";
    case Event::terminated: return "terminated";
    case Event::breakdown: return "breakdown";
  }
  return "none";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::max_iters: return "max_iters";
    case Status::breakdown: return "breakdown";
    case Status::no_progress: return "no_progress";
  }
  return "max_iters";
}

Event event_from_string(std::string_view s) {
  if (s.empty() || s == "none") return Event::none;
  if (s == "refinement") return Event::refinement;
  if (s == "terminated") return Event::terminated;
  if (s == "breakdown") return Event::breakdown;
  throw InvalidSpec("unknown event '" + std::string(s) + "'");
}

IterationRecord& ConvergenceHistory::append(IterationRecord record) {
  if (!records_.empty() && record.iteration <= records_.back().iteration) {
    throw std::logic_error("ConvergenceHistory: iteration " + std::to_string(record.iteration) +
                           " does not follow " + std::to_string(records_.back().iteration));
  }
  records_.push_back(record);
  return records_.back();
}

std::size_t ConvergenceHistory::count(Event e) const {
  return static_cast<std::size_t>(std::count_if(
      records_.begin(), records_.end(), [e](const IterationRecord& r) { return r.event == e; }));
}

void SolverConfig::validate() const {
  if (check_frequency < 1) throw InvalidSpec("SolverConfig: check frequency must be >= 1");
  if (!(stagnation_factor > 0.0 && stagnation_factor < 1.0)) {
    throw InvalidSpec("SolverConfig: stagnation factor must lie in (0, 1)");
  }
  if (!(unit_roundoff > 0.0)) throw InvalidSpec("SolverConfig: unit roundoff must be positive");
}

double SolverConfig::tolerance(std::size_t n) const {
  const double factor = berr_tolerance_factor.value_or(std::sqrt(static_cast<double>(n)));
  return factor * unit_roundoff;
}

}  // namespace stablepc

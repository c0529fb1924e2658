#include "stablepc/metrics.hpp"

#include <cmath>
#include <limits>

#include "stablepc/double_double.hpp"
#include "stablepc/errors.hpp"
#include "stablepc/linalg.hpp"

namespace stablepc {

Vector compensated_residual(const DenseMatrix& a, std::span<const double> x,
                            std::span<const double> b) {
  if (x.size() != a.cols() || b.size() != a.rows()) {
    throw DimensionMismatch("compensated_residual: shapes");
  }
  const std::size_t m = a.rows();
  std::vector<double> hi(b.begin(), b.end());
  std::vector<double> lo(m, 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const auto col = a.column(j);
    for (std::size_t i = 0; i < m; ++i) {
      const dd::Pair p = dd::two_prod(-col[i], xj);
      const dd::Pair s = dd::two_sum(hi[i], p.hi);
      const dd::Pair t = dd::two_sum(s.hi, lo[i] + s.lo + p.lo);
      hi[i] = t.hi;
      lo[i] = t.lo;
    }
  }
  for (std::size_t i = 0; i < m; ++i) hi[i] += lo[i];
  return hi;
}

Vector naive_residual(const DenseMatrix& a, std::span<const double> x, std::span<const double> b) {
  if (x.size() != a.cols() || b.size() != a.rows()) {
    throw DimensionMismatch("naive_residual: shapes");
  }
  Vector r(b.begin(), b.end());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    r[i] -= acc;
  }
  return r;
}

double backward_error(const DenseMatrix& a, double norm_a, std::span<const double> x_hat,
                      std::span<const double> b) {
  const double nx = norm2(x_hat);
  if (nx == 0.0) throw ZeroSolution("backward_error: x̂ = 0");
  return norm2(compensated_residual(a, x_hat, b)) / (norm_a * nx);
}

double backward_error(const DenseMatrix& a, std::span<const double> x_hat,
                      std::span<const double> b) {
  const double norm_a = spectral_norm_estimate(dense_operator(a), kOraclePowerSteps, 0);
  return backward_error(a, norm_a, x_hat, b);
}

ErrorReport error_report(const DenseMatrix& a, double norm_a, std::span<const double> x_hat,
                         std::span<const double> b, std::optional<std::span<const double>> x_ref) {
  ErrorReport rep;
  rep.normest = norm_a;
  rep.residual_norm = norm2(compensated_residual(a, x_hat, b));
  const double nx = norm2(x_hat);
  if (nx == 0.0) throw ZeroSolution("error_report: x̂ = 0");
  rep.berr = rep.residual_norm / (norm_a * nx);
  if (x_ref) rep.forward_error = norm2(subtract(*x_ref, x_hat)) / norm2(*x_ref);
  return rep;
}

DenseMatrix rigal_gaches_perturbation(const DenseMatrix& a, std::span<const double> x_hat,
                                      std::span<const double> b) {
  const double nx2 = dot(x_hat, x_hat);
  if (nx2 == 0.0) throw ZeroSolution("rigal_gaches_perturbation: x̂ = 0");
  const Vector r = compensated_residual(a, x_hat, b);
  DenseMatrix delta(a.rows(), a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double w = x_hat[j] / nx2;
    for (std::size_t i = 0; i < a.rows(); ++i) delta(i, j) = r[i] * w;
  }
  return delta;
}

double fit_rate(std::span<const std::size_t> iterations, std::span<const double> residuals) {
  if (iterations.size() != residuals.size()) throw DimensionMismatch("fit_rate: lengths");
  const std::size_t m = residuals.size();
  if (m < 2) throw InsufficientData("fit_rate: need at least two points");
  double mean_t = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(residuals[i] > 0.0)) throw InsufficientData("fit_rate: nonpositive residual");
    mean_t += static_cast<double>(iterations[i]);
    mean_y += std::log(residuals[i]);
  }
  mean_t /= static_cast<double>(m);
  mean_y /= static_cast<double>(m);
  double stt = 0.0;
  double sty = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = static_cast<double>(iterations[i]) - mean_t;
    stt += dt * dt;
    sty += dt * (std::log(residuals[i]) - mean_y);
  }
  if (stt == 0.0) throw InsufficientData("fit_rate: iterations do not vary");
  return std::exp(sty / stt);
}

double fit_rate(const ConvergenceHistory& history, std::size_t first, std::size_t last) {
  std::vector<std::size_t> its;
  std::vector<double> res;
  for (const IterationRecord& rec : history.records()) {
    if (rec.iteration < first || rec.iteration > last) continue;
    its.push_back(rec.iteration);
    res.push_back(rec.residual.value_or(rec.residual_estimate));
  }
  return fit_rate(its, res);
}

double condition_number_oracle(const DenseMatrix& a) {
  const std::vector<double> s =
      a.rows() >= a.cols() ? singular_values(a) : singular_values(a.transposed());
  if (s.empty()) return 1.0;
  return s.back() == 0.0 ? std::numeric_limits<double>::infinity() : s.front() / s.back();
}

double lsqr_rate(double kappa) { return (kappa - 1.0) / (kappa + 1.0); }

double cg_rate(double kappa) {
  const double root = std::sqrt(kappa);
  return (root - 1.0) / (root + 1.0);
}

Monitor oracle_monitor(std::shared_ptr<const DenseMatrix> a, Vector b, double norm_a,
                       std::optional<Vector> x_ref, std::size_t every) {
  const double ref_norm = x_ref ? norm2(*x_ref) : 0.0;
  Monitor mon;
  mon.every = every;
  mon.measure = [a = std::move(a), b = std::move(b), norm_a, x_ref = std::move(x_ref),
                 ref_norm](std::span<const double> x) {
    Measurement m;
    m.residual = norm2(compensated_residual(*a, x, b));
    const double nx = norm2(x);
    if (nx > 0.0) m.berr = m.residual / (norm_a * nx);
    if (x_ref) m.forward_error = norm2(subtract(*x_ref, x)) / ref_norm;
    return m;
  };
  return mon;
}

}  // namespace stablepc

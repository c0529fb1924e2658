// Acceptance run: every figure preset end to end, then the property suites.
// Prints one PASS/FAIL line per criterion and exits nonzero if any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "solver_common.hpp"
#include "stablepc/experiments/config.hpp"
#include "stablepc/experiments/criteria.hpp"
#include "stablepc/experiments/io.hpp"
#include "stablepc/experiments/runner.hpp"
#include "stablepc/libsvm.hpp"
#include "stablepc/linalg.hpp"
#include "stablepc/metrics.hpp"
#include "stablepc/problems.hpp"
#include "stablepc/rng.hpp"
#include "stablepc/solvers.hpp"

using namespace stablepc;
using namespace stablepc::experiments;

namespace {

constexpr double u = kUnitRoundoff;

struct Tally {
  int passed = 0;
  int failed = 0;
  std::vector<std::string> failures;

  void add(const CriterionResult& r) {
    std::cout << format_result(r) << std::endl;
    if (r.passed) {
      ++passed;
    } else {
      ++failed;
      failures.push_back(r.id);
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- property suites --------------------------------------------------------

double orthogonality_defect(const DenseMatrix& q) {
  double worst = 0.0;
  for (std::size_t i = 0; i < q.cols(); ++i)
    for (std::size_t j = 0; j < q.cols(); ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < q.rows(); ++k) s += static_cast<long double>(q(k, i)) * q(k, j);
      worst = std::max(worst, static_cast<double>(std::fabs(s - (i == j ? 1.0L : 0.0L))));
    }
  return worst;
}

double residual_norm(const DenseMatrix& a, std::span<const double> x, std::span<const double> b) {
  return norm2(compensated_residual(a, x, b));
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

CriterionResult qr_haar() {
  double worst = 0.0;
  Rng shapes(1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + static_cast<std::size_t>(shapes.uniform() * 100);
    const std::size_t m = n + static_cast<std::size_t>(shapes.uniform() * (200 - n));
    const DenseMatrix a = gaussian_matrix(m, n, 100 + t);
    const QrFactors f = householder_qr(a);
    worst = std::max(worst, orthogonality_defect(f.q));
    worst = std::max(worst, max_abs_diff(matmul(f.q, f.r), a) / std::max(1.0, max_abs(a)) / 10);
  }
  for (std::size_t n : {1u, 10u, 200u}) worst = std::max(worst, orthogonality_defect(haar_orthogonal(n, n)));
  return {"A8a", "QR and Haar orthogonality <= 1e-14", worst <= 1e-14, "worst " + sci(worst)};
}

CriterionResult adjoint_consistency() {
  const ProblemInstance right = gen_right_preconditioned(100, 1e10, 4, 3);
  const ProblemInstance left = gen_left_preconditioned(100, 1e10, 4, 4);
  const ProblemInstance spd = gen_spd_wishart(100, 1e6, 4, 5);
  const ProblemInstance kern = kernel_nystrom_problem(synthetic_points(100, 3, 6), 1e-4, 20, 7);

  auto as_op = [](const Preconditioner& p) {
    return LinearOperator(p.dim(), p.dim(), [p](std::span<const double> z) { return p.pre(z); },
                          [p](std::span<const double> z) { return p.pre_adjoint(z); });
  };
  auto est = [](const LinearOperator& op) { return spectral_norm_estimate(op, 30, 1) * 1.01; };

  // Composed realizations are scaled by the product of their factors' norms:
  // rounding in A(P⁻¹z) is relative to ‖A‖‖P⁻¹‖, not to ‖AP⁻¹‖.
  const double na_r = est(right.op), np_r = est(as_op(right.pre));
  const double na_l = est(left.op), np_l = est(as_op(left.pre));
  struct Case {
    std::string name;
    LinearOperator op;
    double scale;
  };
  std::vector<Case> ops{
      {"A", right.op, na_r},
      {"AP^-1", right_preconditioned_operator(right.op, right.pre), na_r * np_r},
      {"P^-1A", left_preconditioned_operator(left.op, left.pre), na_l * np_l},
      {"normal", composed_normal_operator(right.op, right.pre), na_r * na_r * np_r * np_r},
      {"dense P^-1", as_op(right.pre), np_r},
      {"cholesky P^-1", as_op(spd.pre), est(as_op(spd.pre))},
      {"nystrom P^-1", as_op(kern.pre), est(as_op(kern.pre))},
  };

  double worst = 0.0;
  std::string where;
  for (const auto& [name, op, scale] : ops) {
    for (std::uint64_t t = 0; t < 20; ++t) {
      const Vector z = gaussian_vector(op.in_dim(), derive_seed(t, 1));
      const Vector w = gaussian_vector(op.out_dim(), derive_seed(t, 2));
      const double d = std::fabs(dot(op.apply(z), w) - dot(z, op.apply_adjoint(w))) /
                       (scale * norm2(z) * norm2(w));
      if (d > worst) {
        worst = d;
        where = name;
      }
    }
  }
  return {"A8b", "adjoint consistency <= 1e-12 over 20 probes per realization", worst <= 1e-12,
          "worst " + sci(worst) + " (" + where + ")"};
}

CriterionResult bidiagonalization() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::size_t n = 50;
    const LinearOperator op = dense_operator(gaussian_matrix(n, n, seed));
    const double norm = spectral_norm_estimate(op, 30, seed) * 1.01;
    detail::LsqrEngine eng(op, u);
    if (!eng.start(gaussian_vector(n, 50 + seed))) continue;
    for (int i = 0; i < 40; ++i) {
      const Vector ui = eng.u();
      const Vector vi = eng.v();
      const double ai = eng.alpha();
      const bool alive = eng.step();
      Vector lhs = eng.u();
      scale(eng.beta(), lhs);
      Vector rhs = op.apply(vi);
      axpy(-ai, ui, rhs);
      worst = std::max(worst, norm2(subtract(lhs, rhs)) / norm);
      if (!alive) break;
    }
  }
  return {"A8c", "bidiagonalization recurrence <= 1e-13 per step (n = 50)", worst <= 1e-13,
          "worst " + sci(worst)};
}

CriterionResult rigal_gaches() {
  double worst_fit = 0.0, worst_norm = 0.0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 30;
    const DenseMatrix a = gaussian_matrix(n, n, 1000 + t);
    const Vector x = gaussian_vector(n, 2000 + t);
    const Vector b = gaussian_vector(n, 3000 + t);
    const DenseMatrix da = rigal_gaches_perturbation(a, x, b);
    DenseMatrix sum = a;
    for (std::size_t k = 0; k < sum.data().size(); ++k) sum.data()[k] += da.data()[k];
    worst_fit = std::max(worst_fit, residual_norm(sum, x, b) /
                                        (frobenius_norm(sum) * norm2(x) + norm2(b)));
    const double quotient = residual_norm(a, x, b) / norm2(x);
    worst_norm = std::max(worst_norm, std::fabs(frobenius_norm(da) - quotient) / quotient);
  }
  const bool ok = worst_fit <= 1e-13 && worst_norm <= 1e-13;
  return {"A8d", "Rigal-Gaches: (A + dA)x = b and |dA| = |r|/|x| on 200 instances", ok,
          "interpolation " + sci(worst_fit) + ", norm " + sci(worst_norm)};
}

CriterionResult lanczos_vs_lu() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 25;
    const DenseMatrix q = haar_orthogonal(n, seed);
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = 1.0 + 9.0 * i / (n - 1);
    const DenseMatrix m = matmul_nt(scale_columns(q, d), q);
    const Vector c = gaussian_vector(n, 100 + seed);
    const Vector y = lanczos_solve(dense_operator(m), c, n).solution;
    const Vector ref = lu_solve(m, c);
    worst = std::max(worst, norm2(subtract(y, ref)) / norm2(ref));
  }
  return {"A8e", "Lanczos matches lu_solve on small SPD systems to 1e-10", worst <= 1e-10,
          "worst " + sci(worst)};
}

CriterionResult nystrom_round_trip() {
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const std::size_t n = 30 + t % 20;
    const std::size_t k = 1 + t % 12;
    const double lambda = std::pow(10.0, -static_cast<double>(t % 5));
    const DenseMatrix f = gaussian_matrix(n, k, 500 + t);
    DenseMatrix p = matmul_nt(f, f);
    for (std::size_t i = 0; i < n; ++i) p(i, i) += lambda;
    const Vector y = gaussian_vector(n, 600 + t);
    const Vector back = matvec(p, nystrom_preconditioner(f, lambda).pre(y));
    const double cond = (max_abs(p) * n + lambda) / lambda;
    worst = std::max(worst, norm2(subtract(back, y)) / (cond * u * norm2(y)));
  }
  return {"A8f", "Nystrom P(P^-1 y) = y on 50 instances, within 1e2 kappa u", worst <= 1e2,
          "worst " + sci(worst) + " kappa u"};
}

CriterionResult rpcholesky_psd() {
  const ProblemInstance k = kernel_matrix(synthetic_points(200, 4, 9), 1e-12, 1, false);
  const RpCholeskyResult r = rpcholesky(dense_columns(k.a), 50, 10);
  DenseMatrix e = *k.a;
  const DenseMatrix ff = matmul_nt(r.f, r.f);
  for (std::size_t i = 0; i < e.data().size(); ++i) e.data()[i] -= ff.data()[i];
  const double min_eig = symmetric_eigenvalues(e).front();
  const bool ok = r.min_relative_residual >= -10 * u && min_eig >= -1e-12;
  return {"A8g", "RPCholesky residual PSD: diagonal >= -10u, eigenvalues >= -1e-12", ok,
          "min diagonal " + sci(r.min_relative_residual) + ", min eigenvalue " + sci(min_eig)};
}

CriterionResult determinism() {
  ExperimentConfig cfg = preset(Experiment::fig1);
  cfg.problem.n = 100;
  auto csvs = [&] {
    const ExperimentOutput out = run_experiment(cfg);
    std::ostringstream all;
    for (const Run& run : out.runs) write_csv(all, run.rows);
    return all.str();
  };
  const std::string first = csvs();
  const bool ok = !first.empty() && first == csvs();
  return {"A8h", "identical config and seeds give byte-identical CSV histories", ok,
          std::to_string(first.size()) + " bytes compared"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the preconditioned Krylov solvers"};
  std::size_t n = 1000;
  std::vector<std::string> only;
  bool skip_properties = false;
  app.add_option("--n", n, "problem dimension (the shift experiment always uses 200)");
  app.add_option("--only", only, "restrict to these presets")
      ->delimiter(',')
      ->check(CLI::IsMember(experiment_names()));
  app.add_flag("--skip-properties", skip_properties, "skip the property suites");
  CLI11_PARSE(app, argc, argv);

  const std::set<std::string> selected(only.begin(), only.end());
  Tally tally;

  for (Experiment e : {Experiment::fig1, Experiment::fig3, Experiment::fig2, Experiment::shift,
                       Experiment::fig4_left, Experiment::fig4_right_synthetic, Experiment::fig5}) {
    if (!selected.empty() && !selected.count(std::string(to_string(e)))) continue;
    ExperimentConfig cfg = preset(e);
    if (e != Experiment::shift) cfg.problem.n = n;
    const auto t0 = std::chrono::steady_clock::now();
    std::cout << "== " << to_string(e) << " (n = " << cfg.problem.n << ")" << std::endl;
    const ExperimentOutput out = run_experiment(cfg);
    for (const CriterionResult& r : evaluate(out)) tally.add(r);
    std::printf("   %.1f s\n", seconds_since(t0));
  }

  if (!skip_properties) {
    std::cout << "== properties" << std::endl;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& check : std::vector<std::function<CriterionResult()>>{
             qr_haar, adjoint_consistency, bidiagonalization, rigal_gaches, lanczos_vs_lu,
             nystrom_round_trip, rpcholesky_psd, determinism}) {
      tally.add(check());
    }
    std::printf("   %.1f s\n", seconds_since(t0));
  }

  std::cout << tally.passed << " passed, " << tally.failed << " failed";
  if (!tally.failures.empty()) {
    std::cout << ":";
    for (const std::string& id : tally.failures) std::cout << ' ' << id;
  }
  std::cout << std::endl;
  return tally.failed == 0 ? 0 : 1;
}

#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "oracle.hpp"
#include "stablepc/errors.hpp"
#include "stablepc/linalg.hpp"
#include "stablepc/metrics.hpp"
#include "stablepc/problems.hpp"
#include "stablepc/rng.hpp"
#include "stablepc/solvers.hpp"

using namespace stablepc;

namespace {

constexpr double u = 0x1.0p-53;

using i128 = __int128;

// Exact b − Ax for integer-valued data.
std::vector<i128> exact_residual(const DenseMatrix& a, const Vector& x, const Vector& b) {
  std::vector<i128> r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    i128 s = static_cast<i128>(b[i]);
    for (std::size_t j = 0; j < a.cols(); ++j) s -= static_cast<i128>(a(i, j)) * static_cast<i128>(x[j]);
    r[i] = s;
  }
  return r;
}

double abs_error(const Vector& got, const std::vector<i128>& exact) {
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const long double d = static_cast<long double>(got[i]) - static_cast<long double>(exact[i]);
    worst = std::max(worst, static_cast<double>(std::fabs(d)));
  }
  return worst;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("compensated_residual at x = 0 returns b") {
  const Vector b{0.1, -7e-300, 3e200};
  CHECK(compensated_residual(gaussian_matrix(3, 2, 1), Vector{0, 0}, b) == b);
}

TEST_CASE("compensated_residual resolves a designed cancellation") {
  // 10¹⁶ + 1 − 10¹⁶ = 1 in exact arithmetic; the naive sum absorbs the 1.
  const DenseMatrix a = DenseMatrix::from_rows({{1, 1, 1}});
  const Vector x{1e16, 1.0, -1e16};
  const Vector b{1.0};
  CHECK(compensated_residual(a, x, b) == Vector{0.0});
  CHECK(naive_residual(a, x, b) == Vector{1.0});
  CHECK(abs_error(compensated_residual(a, x, b), exact_residual(a, x, b)) == 0.0);
}

TEST_CASE("compensated_residual on the two-term cancellation as stored") {
  // −10¹⁶ + 1 is not representable and rounds to −10¹⁶, so the stored
  // system has exact residual 1; both evaluations agree with that.
  const DenseMatrix a = DenseMatrix::from_rows({{1, 1}});
  const Vector x{1e16, -1e16 + 1};
  CHECK(x[1] == -1e16);
  CHECK(compensated_residual(a, x, Vector{1.0}) == Vector{1.0});
}

TEST_CASE("compensated error never exceeds naive error on integer instances") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 6, n = 10;
    DenseMatrix a(m, n);
    Vector x(n);
    for (double& v : a.data()) v = std::floor((rng.uniform() - 0.5) * 0x1.0p21);
    for (double& v : x) {
      const double mant = std::floor((rng.uniform() - 0.5) * 0x1.0p53);
      v = std::ldexp(mant, static_cast<int>(rng.uniform() * 8));
    }
    // b is Ax rounded once: an integer near a heavily cancelling target.
    Vector b(m);
    const std::vector<i128> zero = exact_residual(a, x, Vector(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) b[i] = -static_cast<double>(zero[i]);
    const std::vector<i128> exact = exact_residual(a, x, b);
    const double comp = abs_error(compensated_residual(a, x, b), exact);
    const double naive = abs_error(naive_residual(a, x, b), exact);
    REQUIRE(comp <= naive);
    REQUIRE(comp <= 1e-3);
  }
}

TEST_CASE("compensated_residual against binary128 on random data") {
  const DenseMatrix a = gaussian_matrix(40, 40, 3);
  const Vector x = gaussian_vector(40, 4);
  const Vector b = matvec(a, x);
  const Vector c = compensated_residual(a, x, b);
  const Vector q = oracle::residual(a, x, b);
  for (std::size_t i = 0; i < 40; ++i) {
    // Double-double accumulation: error ≲ u²·Σ|a_ij x_j| before the final rounding.
    double mass = std::fabs(b[i]);
    for (std::size_t j = 0; j < 40; ++j) mass += std::fabs(a(i, j) * x[j]);
    CHECK(std::fabs(c[i] - q[i]) <= u * std::fabs(q[i]) + 8 * u * u * mass);
  }
}

TEST_CASE("backward_error examples") {
  CHECK(backward_error(DenseMatrix::identity(2), 1.0, Vector{0.5, 0}, Vector{1, 0}) == 1.0);
  const DenseMatrix d = DenseMatrix::diagonal(Vector{3, 7, 0.25});
  const Vector b{1, 1, 1};
  const Vector x{1.0 / 3, 1.0 / 7, 4};
  CHECK(backward_error(d, 7.0, x, b) <= 10 * u);
  CHECK(backward_error(d, x, b) <= 10 * u);
  CHECK_THROWS_AS(backward_error(d, 7.0, Vector{0, 0, 0}, b), ZeroSolution);
}

TEST_CASE("error_report fields are consistent") {
  const ProblemInstance p = gen_right_preconditioned(80, 1e6, 4, 2);
  Vector x = *p.x_ref;
  x[0] += 1e-6;
  const ErrorReport rep = error_report(*p.a, p.norm_a, x, p.b, std::span<const double>(*p.x_ref));
  CHECK(rep.normest == p.norm_a);
  CHECK(rep.residual_norm == doctest::Approx(oracle::norm(oracle::residual(*p.a, x, p.b))).epsilon(1e-12));
  CHECK(rep.berr == doctest::Approx(rep.residual_norm / (rep.normest * norm2(x))));
  REQUIRE(rep.forward_error.has_value());
  CHECK(*rep.forward_error == doctest::Approx(1e-6 / norm2(*p.x_ref)).epsilon(1e-6));
  CHECK_FALSE(error_report(*p.a, p.norm_a, x, p.b).forward_error.has_value());
}

TEST_CASE("direct solve is backward stable on generated instances") {
  const std::size_t n = 200;
  for (const ProblemInstance& p :
       {gen_right_preconditioned(n, 1e10, 4, 1), gen_left_preconditioned(n, 1e14, 10, 2),
        gen_spd_wishart(n, 1e10, 4, 3), gen_gmres_lsqr_trio(n, 4).cluster_ill}) {
    const Vector x = lu_solve(*p.a, p.b, 0);
    CHECK(backward_error(*p.a, p.norm_a, x, p.b) <= 100 * n * u);
  }
}

TEST_CASE("rigal_gaches_perturbation examples") {
  const DenseMatrix a = DenseMatrix::from_rows({{2, 1}, {0, 3}});
  const Vector b{3, 3};
  const DenseMatrix zero = rigal_gaches_perturbation(a, Vector{1, 1}, b);
  CHECK(max_abs(zero) == 0.0);
  const DenseMatrix d = rigal_gaches_perturbation(DenseMatrix::identity(1), Vector{1}, Vector{2});
  CHECK(d(0, 0) == 1.0);
  CHECK_THROWS_AS(rigal_gaches_perturbation(a, Vector{0, 0}, b), ZeroSolution);
}

TEST_CASE("rigal_gaches_perturbation interpolates and attains the quotient") {
  Rng sizes(5);
  for (std::uint64_t t = 0; t < 200; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(sizes.uniform() * 20);
    const DenseMatrix a = gaussian_matrix(n, n, 100 + t);
    const Vector x = gaussian_vector(n, 400 + t);
    const Vector b = gaussian_vector(n, 700 + t);
    const DenseMatrix da = rigal_gaches_perturbation(a, x, b);
    DenseMatrix sum = a;
    for (std::size_t k = 0; k < sum.data().size(); ++k) sum.data()[k] += da.data()[k];
    const Vector r = oracle::residual(sum, x, b);
    REQUIRE(oracle::norm(r) <= 1e-13 * (frobenius_norm(sum) * oracle::norm(x) + oracle::norm(b)));
    // ΔA is rank one, so its 2-norm equals its Frobenius norm.
    const double quotient = oracle::norm(oracle::residual(a, x, b)) / oracle::norm(x);
    REQUIRE(frobenius_norm(da) == doctest::Approx(quotient).epsilon(1e-13));
  }
}

TEST_CASE("fit_rate") {
  const std::vector<std::size_t> its{1, 2, 3, 4};
  CHECK(fit_rate(its, Vector{1, 0.5, 0.25, 0.125}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(fit_rate(its, Vector{3, 3, 3, 3}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(fit_rate(std::vector<std::size_t>{1}, Vector{1}), InsufficientData);
  CHECK_THROWS_AS(fit_rate(its, Vector{1, 0, 1, 1}), InsufficientData);

  ConvergenceHistory h;
  for (std::size_t k = 1; k <= 10; ++k) {
    IterationRecord rec;
    rec.iteration = k;
    rec.residual_estimate = std::pow(0.3, static_cast<double>(k));
    if (k > 5) rec.residual = std::pow(0.3, static_cast<double>(k));
    h.append(rec);
  }
  CHECK(fit_rate(h, 2, 9) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("rate bounds") {
  CHECK(lsqr_rate(4.0) == doctest::Approx(0.6));
  CHECK(cg_rate(4.0) == doctest::Approx(1.0 / 3.0));
  CHECK(lsqr_rate(1.0) == 0.0);
}

TEST_CASE("lsqr converges no slower than its rate bound") {
  const ProblemInstance p = gen_gmres_lsqr_trio(200, 6).spread_well;
  const SolveResult r = lsqr(p.op, p.b, {.max_iters = 20});
  CHECK(fit_rate(r.history, 1, 20) <= lsqr_rate(4.0) + 0.1);
}

TEST_CASE("condition_number_oracle") {
  CHECK(condition_number_oracle(DenseMatrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(condition_number_oracle(DenseMatrix::diagonal(Vector{1, 10})) == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("oracle_monitor measures against the reference") {
  const ProblemInstance p = gen_right_preconditioned(50, 1e4, 2, 8);
  const Monitor m = oracle_monitor(p.a, p.b, p.norm_a, p.x_ref, 5);
  CHECK(m.every == 5);
  const Measurement at_ref = m.measure(*p.x_ref);
  CHECK(*at_ref.forward_error == 0.0);
  CHECK(*at_ref.berr <= 50 * u);
  const Measurement at_zero = m.measure(Vector(50, 0.0));
  CHECK_FALSE(at_zero.berr.has_value());
  CHECK(at_zero.residual == doctest::Approx(norm2(p.b)));
}

}  // TEST_SUITE

#include "stablepc/problems.hpp"

#include <cmath>

#include "stablepc/errors.hpp"
#include "stablepc/linalg.hpp"
#include "stablepc/metrics.hpp"
#include "stablepc/rng.hpp"

namespace stablepc {

namespace {

// Sub-stream ids for derive_seed.
enum Stream : std::uint64_t { kLeft = 1, kRight = 2, kRhs = 3, kWishart = 4, kWLeft = 5, kWRight = 6 };

// Refinement steps for the reference solution; enough to converge whenever
// κ(A)u is comfortably below one.
constexpr int kReferenceRefinements = 5;

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

/// 10^{lo} ... 10^{hi} in n steps.
std::vector<double> logspace(double lo, double hi, std::size_t n) {
  std::vector<double> out = linspace(lo, hi, n);
  for (double& v : out) v = std::pow(10.0, v);
  return out;
}

void check_kappas(std::size_t n, double kappa_a, double kappa_pre) {
  if (n < 2) throw InvalidSpec("generator: n must be at least 2");
  if (!(kappa_pre >= 1.0) || !(kappa_a >= 1.0)) {
    throw InvalidSpec("generator: condition numbers must be >= 1");
  }
  if (kappa_pre > kappa_a) {
    throw InvalidSpec("generator: preconditioned condition number exceeds kappa_A");
  }
}

struct Svd {
  DenseMatrix u, v;
  std::vector<double> sigma;
  std::vector<double> pre_scale;  // (1 + β(i−1))/σ_i
};

Svd test_matrix_factors(std::size_t n, double kappa_a, double kappa_pre, std::uint64_t seed) {
  check_kappas(n, kappa_a, kappa_pre);
  Svd f;
  f.u = haar_orthogonal(n, derive_seed(seed, kLeft));
  f.v = haar_orthogonal(n, derive_seed(seed, kRight));
  const double a = std::log10(kappa_a) / static_cast<double>(n - 1);
  const double beta = (kappa_pre - 1.0) / static_cast<double>(n - 1);
  f.sigma.resize(n);
  f.pre_scale.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    f.sigma[i] = std::pow(10.0, -a * t);
    f.pre_scale[i] = (1.0 + beta * t) / f.sigma[i];
  }
  return f;
}

/// b = A x for a unit Gaussian x, so that ‖x‖ stays O(1) however
/// ill-conditioned A is.
Vector consistent_rhs(const DenseMatrix& a, std::uint64_t seed) {
  return matvec(a, unit_gaussian_vector(a.cols(), derive_seed(seed, kRhs)));
}

}  // namespace

std::string_view to_string(Side s) {
  switch (s) {
    case Side::none: return "none";
    case Side::right: return "right";
    case Side::left: return "left";
    case Side::spd: return "spd";
  }
  return "none";
}

Side side_from_string(std::string_view s) {
  if (s == "none") return Side::none;
  if (s == "right") return Side::right;
  if (s == "left") return Side::left;
  if (s == "spd") return Side::spd;
  throw InvalidSpec("unknown side '" + std::string(s) + "'");
}

std::string_view to_string(PreconditionerSpec::Form f) {
  using F = PreconditionerSpec::Form;
  switch (f) {
    case F::identity: return "identity";
    case F::dense_inverse: return "dense_inverse";
    case F::cholesky: return "cholesky";
    case F::nystrom: return "nystrom";
  }
  return "identity";
}

PreconditionerSpec::Form preconditioner_form_from_string(std::string_view s) {
  using F = PreconditionerSpec::Form;
  if (s == "identity") return F::identity;
  if (s == "dense_inverse") return F::dense_inverse;
  if (s == "cholesky") return F::cholesky;
  if (s == "nystrom") return F::nystrom;
  throw InvalidSpec("unknown preconditioner form '" + std::string(s) + "'");
}

Preconditioner build_preconditioner(const PreconditionerSpec& spec, std::size_t n) {
  using F = PreconditionerSpec::Form;
  switch (spec.form) {
    case F::identity: return identity_preconditioner(n);
    case F::dense_inverse:
      if (spec.matrix.rows() != n) throw DimensionMismatch("preconditioner size");
      return dense_inverse_preconditioner(spec.matrix);
    case F::cholesky:
      if (spec.matrix.rows() != n) throw DimensionMismatch("preconditioner size");
      return cholesky_preconditioner(spec.matrix);
    case F::nystrom:
      if (spec.matrix.rows() != n) throw DimensionMismatch("preconditioner size");
      return nystrom_preconditioner(spec.matrix, spec.lambda);
  }
  return identity_preconditioner(n);
}

ProblemInstance make_instance(DenseMatrix a, PreconditionerSpec pre, Vector b,
                              std::optional<double> norm_a, ProblemMeta meta,
                              bool with_reference) {
  if (a.rows() != b.size()) throw DimensionMismatch("make_instance: rhs length");
  ProblemInstance inst;
  inst.a = std::make_shared<const DenseMatrix>(std::move(a));
  inst.op = dense_operator(*inst.a);
  inst.pre = build_preconditioner(pre, inst.a->cols());
  inst.pre_spec = std::move(pre);
  inst.b = std::move(b);
  inst.norm_a = norm_a ? *norm_a
                       : spectral_norm_estimate(inst.op, kOraclePowerSteps,
                                                derive_seed(meta.seed, 99));
  if (with_reference && inst.a->rows() == inst.a->cols()) {
    inst.x_ref = lu_solve(*inst.a, inst.b, kReferenceRefinements);
  }
  meta.n = inst.a->cols();
  inst.meta = std::move(meta);
  return inst;
}

ProblemInstance gen_right_preconditioned(std::size_t n, double kappa_a, double kappa_ap,
                                         std::uint64_t seed) {
  const Svd f = test_matrix_factors(n, kappa_a, kappa_ap, seed);
  DenseMatrix a = matmul_nt(scale_columns(f.u, f.sigma), f.v);
  PreconditionerSpec pre{.form = PreconditionerSpec::Form::dense_inverse,
                         .matrix = scale_columns(f.v, f.pre_scale)};
  Vector b = consistent_rhs(a, seed);
  return make_instance(std::move(a), std::move(pre), std::move(b), f.sigma.front(),
                       {.generator = "right_preconditioned",
                        .kappa_a = kappa_a,
                        .kappa_pre = kappa_ap,
                        .side = Side::right,
                        .seed = seed});
}

ProblemInstance gen_left_preconditioned(std::size_t n, double kappa_a, double kappa_pa,
                                        std::uint64_t seed) {
  const Svd f = test_matrix_factors(n, kappa_a, kappa_pa, seed);
  DenseMatrix a = matmul_nt(scale_columns(f.u, f.sigma), f.v);
  PreconditionerSpec pre{.form = PreconditionerSpec::Form::dense_inverse,
                         .matrix = scale_rows(f.u.transposed(), f.pre_scale)};
  Vector b = consistent_rhs(a, seed);
  return make_instance(std::move(a), std::move(pre), std::move(b), f.sigma.front(),
                       {.generator = "left_preconditioned",
                        .kappa_a = kappa_a,
                        .kappa_pre = kappa_pa,
                        .side = Side::left,
                        .seed = seed});
}

ProblemTrio gen_gmres_lsqr_trio(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InvalidSpec("gen_gmres_lsqr_trio: n must be at least 2");
  const DenseMatrix uw = haar_orthogonal(n, derive_seed(seed, kWLeft));
  const DenseMatrix vw = haar_orthogonal(n, derive_seed(seed, kWRight));
  const DenseMatrix u = haar_orthogonal(n, derive_seed(seed, kLeft));
  const std::vector<double> w_sigma = linspace(0.5, 1.0, n);
  std::vector<double> w_inv_sigma(n);
  for (std::size_t i = 0; i < n; ++i) w_inv_sigma[i] = 1.0 / w_sigma[i];
  const DenseMatrix w = matmul_nt(scale_columns(uw, w_sigma), vw);

  const std::vector<double> d = logspace(-2.0, 0.0, n);
  std::vector<double> d_prime = linspace(1.0, 4.0, n);
  for (double& v : d_prime) v = 1.0 / v;

  // W⁻ᵀ = U_w Σ⁻¹ V_wᵀ
  const DenseMatrix w_inv_transposed = matmul_nt(scale_columns(uw, w_inv_sigma), vw);
  // W D W⁻¹ = (W D)(W⁻ᵀ)ᵀ
  auto similarity = [&](const std::vector<double>& diag) {
    return matmul_nt(scale_columns(w, diag), w_inv_transposed);
  };
  const Vector b = unit_gaussian_vector(n, derive_seed(seed, kRhs));
  ProblemMeta meta{.generator = "", .kappa_a = 1.0, .side = Side::none, .seed = seed};

  ProblemTrio trio;
  meta.generator = "cluster_eigs_ill_cond";
  meta.kappa_a = 100.0;
  trio.cluster_ill = make_instance(similarity(d), {}, b, std::nullopt, meta);
  meta.generator = "spread_eigs_well_cond";
  meta.kappa_a = 4.0;
  trio.spread_well = make_instance(scale_columns(u, d_prime), {}, b, 1.0, meta);
  meta.generator = "cluster_eigs_well_cond";
  trio.cluster_well = make_instance(similarity(d_prime), {}, b, std::nullopt, meta);
  return trio;
}

ProblemInstance gen_shift_matrix(std::size_t n) {
  if (n < 2) throw InvalidSpec("gen_shift_matrix: n must be at least 2");
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i + 1 < n; ++i) a(i + 1, i) = 1.0;
  a(0, n - 1) = 1.0;
  Vector b(n, 0.0);
  b[0] = 1.0;
  return make_instance(std::move(a), {}, std::move(b), 1.0,
                       {.generator = "shift", .kappa_a = 1.0, .side = Side::none, .seed = 0});
}

ProblemInstance gen_spd_wishart(std::size_t n, double kappa_a, double wishart_factor,
                                std::uint64_t seed) {
  if (n < 2) throw InvalidSpec("gen_spd_wishart: n must be at least 2");
  if (!(kappa_a >= 1.0)) throw InvalidSpec("gen_spd_wishart: kappa_A must be >= 1");
  if (!(wishart_factor >= 1.0)) throw InvalidSpec("gen_spd_wishart: factor must be >= 1");
  const DenseMatrix u = haar_orthogonal(n, derive_seed(seed, kLeft));
  const std::vector<double> lambda = logspace(0.0, -std::log10(kappa_a), n);
  std::vector<double> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = std::sqrt(lambda[i]);

  DenseMatrix a = matmul_nt(scale_columns(u, lambda), u);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) a(j, i) = a(i, j);
  }

  const auto m = static_cast<std::size_t>(std::ceil(wishart_factor * static_cast<double>(n)));
  DenseMatrix w = gram(gaussian_matrix(m, n, derive_seed(seed, kWishart)));
  scale(1.0 / static_cast<double>(m), w.data());
  const DenseMatrix b_half = scale_columns(u, root);  // UΣ^½
  DenseMatrix p = matmul_nt(matmul(b_half, w), b_half);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double s = 0.5 * (p(i, j) + p(j, i));
      p(i, j) = s;
      p(j, i) = s;
    }
  }
  PreconditionerSpec pre{.form = PreconditionerSpec::Form::cholesky, .matrix = std::move(p)};
  Vector b = consistent_rhs(a, seed);
  return make_instance(std::move(a), std::move(pre), std::move(b), lambda.front(),
                       {.generator = "spd_wishart",
                        .kappa_a = kappa_a,
                        .kappa_pre = std::nullopt,
                        .side = Side::spd,
                        .seed = seed});
}

namespace {

DenseMatrix squared_exponential_gram(const DenseMatrix& points) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  if (n == 0) throw InvalidSpec("kernel_matrix: no points");
  DenseMatrix a(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    a(j, j) = 1.0;
    for (std::size_t i = j + 1; i < n; ++i) {
      double dist2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = points(i, c) - points(j, c);
        dist2 += diff * diff;
      }
      const double k = std::exp(-0.5 * dist2);
      a(i, j) = k;
      a(j, i) = k;
    }
  }
  return a;
}

}  // namespace

ProblemInstance kernel_matrix(const DenseMatrix& points, double lambda, std::uint64_t seed,
                              bool with_reference) {
  if (!(lambda > 0.0)) throw InvalidSpec("kernel_matrix: lambda must be positive");
  DenseMatrix a = squared_exponential_gram(points);
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) a(i, i) += lambda;
  Vector b = consistent_rhs(a, seed);
  return make_instance(std::move(a), {}, std::move(b), std::nullopt,
                       {.generator = "kernel", .kappa_a = 1.0, .side = Side::spd, .seed = seed},
                       with_reference);
}

ColumnSource dense_columns(std::shared_ptr<const DenseMatrix> a) {
  ColumnSource src;
  src.n = a->rows();
  src.diagonal = [a](std::size_t i) { return (*a)(i, i); };
  src.column = [a](std::size_t j) {
    const auto c = a->column(j);
    return Vector(c.begin(), c.end());
  };
  return src;
}

ProblemInstance kernel_nystrom_problem(const DenseMatrix& points, double lambda,
                                       std::size_t rank, std::uint64_t seed) {
  ProblemInstance inst = kernel_matrix(points, lambda, seed);
  // The factor comes from K alone; the regularizer lives in P = FFᵀ + λI.
  auto kernel = std::make_shared<const DenseMatrix>(squared_exponential_gram(points));
  RpCholeskyResult rp = rpcholesky(dense_columns(kernel), rank, derive_seed(seed, kWishart));
  inst.pre_spec = {.form = PreconditionerSpec::Form::nystrom,
                   .matrix = std::move(rp.f),
                   .lambda = lambda};
  inst.pre = build_preconditioner(inst.pre_spec, inst.a->rows());
  inst.meta.generator = "kernel_nystrom";
  return inst;
}

}  // namespace stablepc

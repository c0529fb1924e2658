#include "stablepc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stablepc/errors.hpp"
#include "stablepc/metrics.hpp"
#include "stablepc/rng.hpp"

namespace stablepc {

namespace {

// Householder vectors are kept unnormalized below the diagonal in `work`,
// with the reflector H = I - tau v vᵀ and v_k = 1 implicit.
struct HouseholderWork {
  DenseMatrix work;
  std::vector<double> tau;
};

HouseholderWork householder_factor(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw DimensionMismatch("householder_qr: requires rows >= cols");
  HouseholderWork hw{a, std::vector<double>(n, 0.0)};
  DenseMatrix& w = hw.work;

  for (std::size_t k = 0; k < n; ++k) {
    auto colk = w.column(k);
    double sigma = 0.0;
    for (std::size_t i = k + 1; i < m; ++i) sigma += colk[i] * colk[i];
    const double x0 = colk[k];
    if (sigma == 0.0) {
      // Already upper triangular in this column; H = I.
      hw.tau[k] = 0.0;
      continue;
    }
    const double norm_x = std::sqrt(x0 * x0 + sigma);
    const double alpha = x0 <= 0.0 ? norm_x : -norm_x;  // R_kk
    const double v0 = x0 - alpha;
    // v = (1, x[k+1:]/v0), tau = 2 / (vᵀv) expressed without cancellation.
    for (std::size_t i = k + 1; i < m; ++i) colk[i] /= v0;
    const double vtv = 1.0 + sigma / (v0 * v0);
    const double tau = 2.0 / vtv;
    hw.tau[k] = tau;
    colk[k] = alpha;

    for (std::size_t j = k + 1; j < n; ++j) {
      auto colj = w.column(j);
      double s = colj[k];
      for (std::size_t i = k + 1; i < m; ++i) s += colk[i] * colj[i];
      s *= tau;
      colj[k] -= s;
      for (std::size_t i = k + 1; i < m; ++i) colj[i] -= s * colk[i];
    }
  }
  return hw;
}

}  // namespace

QrFactors householder_qr(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  HouseholderWork hw = householder_factor(a);

  DenseMatrix r(n, n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i <= j; ++i) r(i, j) = hw.work(i, j);

  // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of I.
  DenseMatrix q(m, n);
  for (std::size_t j = 0; j < n; ++j) q(j, j) = 1.0;
  for (std::size_t kk = n; kk-- > 0;) {
    const double tau = hw.tau[kk];
    if (tau == 0.0) continue;
    const auto vk = hw.work.column(kk);
    for (std::size_t j = kk; j < n; ++j) {
      auto qj = q.column(j);
      double s = qj[kk];
      for (std::size_t i = kk + 1; i < m; ++i) s += vk[i] * qj[i];
      s *= tau;
      qj[kk] -= s;
      for (std::size_t i = kk + 1; i < m; ++i) qj[i] -= s * vk[i];
    }
  }
  return {std::move(q), std::move(r)};
}

DenseMatrix haar_orthogonal(std::size_t n, std::uint64_t seed) {
  auto [q, r] = householder_qr(gaussian_matrix(n, n, seed));
  for (std::size_t j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) scale(-1.0, q.column(j));
  }
  return q;
}

LuFactorization::LuFactorization(const DenseMatrix& a) : lu_(a), perm_(a.rows()) {
  if (a.rows() != a.cols()) throw DimensionMismatch("LuFactorization: matrix must be square");
  const std::size_t n = a.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  for (std::size_t k = 0; k < n; ++k) {
    auto colk = lu_.column(k);
    std::size_t p = k;
    double best = std::abs(colk[k]);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(colk[i]) > best) {
        best = std::abs(colk[i]);
        p = i;
      }
    }
    if (best == 0.0) {
      throw SingularMatrix("LuFactorization: zero pivot in column " + std::to_string(k));
    }
    if (p != k) {
      std::swap(perm_[k], perm_[p]);
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
    }
    const double pivot = colk[k];
    for (std::size_t i = k + 1; i < n; ++i) colk[i] /= pivot;
    for (std::size_t j = k + 1; j < n; ++j) {
      auto colj = lu_.column(j);
      const double ukj = colj[k];
      if (ukj == 0.0) continue;
      for (std::size_t i = k + 1; i < n; ++i) colj[i] -= ukj * colk[i];
    }
  }
}

Vector LuFactorization::solve(std::span<const double> b) const {
  const std::size_t n = dim();
  if (b.size() != n) throw DimensionMismatch("LuFactorization::solve");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  // L y = Pb, unit lower triangular.
  for (std::size_t j = 0; j < n; ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const auto col = lu_.column(j);
    for (std::size_t i = j + 1; i < n; ++i) x[i] -= xj * col[i];
  }
  // U x = y
  for (std::size_t j = n; j-- > 0;) {
    const auto col = lu_.column(j);
    x[j] /= col[j];
    const double xj = x[j];
    for (std::size_t i = 0; i < j; ++i) x[i] -= xj * col[i];
  }
  return x;
}

Vector lu_solve(const DenseMatrix& a, std::span<const double> b, int refinement_steps) {
  const LuFactorization lu(a);
  Vector x = lu.solve(b);
  for (int step = 0; step < refinement_steps; ++step) {
    const Vector r = compensated_residual(a, x, b);
    const Vector d = lu.solve(r);
    axpy(1.0, d, x);
  }
  return x;
}

DenseMatrix cholesky(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("cholesky: matrix must be square");
  const std::size_t n = a.rows();
  DenseMatrix r(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    auto rj = r.column(j);
    for (std::size_t i = 0; i < j; ++i) {
      const auto ri = r.column(i);
      double s = a(i, j);
      for (std::size_t k = 0; k < i; ++k) s -= ri[k] * rj[k];
      rj[i] = s / ri[i];
    }
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= rj[k] * rj[k];
    if (!(d > 0.0)) {
      throw NotPositiveDefinite("cholesky: nonpositive pivot at index " + std::to_string(j));
    }
    rj[j] = std::sqrt(d);
  }
  return r;
}

Vector triangular_solve(const DenseMatrix& r, std::span<const double> b, Triangle side,
                        bool transpose) {
  const std::size_t n = r.rows();
  if (r.cols() != n || b.size() != n) throw DimensionMismatch("triangular_solve");
  for (std::size_t i = 0; i < n; ++i) {
    if (r(i, i) == 0.0) {
      throw SingularMatrix("triangular_solve: zero diagonal at index " + std::to_string(i));
    }
  }
  Vector x(b.begin(), b.end());
  const bool upper = side == Triangle::upper;
  if (upper && !transpose) {
    for (std::size_t j = n; j-- > 0;) {
      const auto col = r.column(j);
      x[j] /= col[j];
      for (std::size_t i = 0; i < j; ++i) x[i] -= x[j] * col[i];
    }
  } else if (upper && transpose) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto col = r.column(j);
      double s = x[j];
      for (std::size_t i = 0; i < j; ++i) s -= col[i] * x[i];
      x[j] = s / col[j];
    }
  } else if (!upper && !transpose) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto col = r.column(j);
      x[j] /= col[j];
      for (std::size_t i = j + 1; i < n; ++i) x[i] -= x[j] * col[i];
    }
  } else {
    for (std::size_t j = n; j-- > 0;) {
      const auto col = r.column(j);
      double s = x[j];
      for (std::size_t i = j + 1; i < n; ++i) s -= col[i] * x[i];
      x[j] = s / col[j];
    }
  }
  return x;
}

double spectral_norm_estimate(const LinearOperator& op, std::size_t iters, std::uint64_t seed) {
  Vector z = gaussian_vector(op.in_dim(), seed);
  double nz = norm2(z);
  if (nz == 0.0) throw ZeroVector("spectral_norm_estimate: zero starting vector");
  scale(1.0 / nz, z);
  for (std::size_t i = 0; i < iters; ++i) {
    z = op.apply_adjoint(op.apply(z));
    nz = norm2(z);
    if (nz == 0.0 || !std::isfinite(nz)) {
      throw ZeroVector("spectral_norm_estimate: power iterate vanished");
    }
    scale(1.0 / nz, z);
  }
  return norm2(op.apply(z));
}

std::size_t default_power_iterations(std::size_t n) {
  const double steps = std::ceil(std::log(static_cast<double>(std::max<std::size_t>(n, 1))));
  return std::max<std::size_t>(1, static_cast<std::size_t>(steps));
}

}  // namespace stablepc

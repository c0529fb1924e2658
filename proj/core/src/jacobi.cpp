#include <algorithm>
#include <cmath>
#include <numeric>

#include "stablepc/errors.hpp"
#include "stablepc/linalg.hpp"

namespace stablepc {

namespace {

constexpr int kMaxSweeps = 80;

}  // namespace

SvdResult jacobi_svd(const DenseMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (m < n) throw DimensionMismatch("jacobi_svd: requires rows >= cols");

  DenseMatrix u = a;
  DenseMatrix v = DenseMatrix::identity(n);
  const double tol = 1e-15;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto up = u.column(p);
        auto uq = u.column(q);
        const double alpha = dot(up, up);
        const double beta = dot(uq, uq);
        const double gamma = dot(up, uq);
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double xp = up[i];
          const double xq = uq[i];
          up[i] = c * xp - s * xq;
          uq[i] = s * xp + c * xq;
        }
        auto vp = v.column(p);
        auto vq = v.column(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double xp = vp[i];
          const double xq = vq[i];
          vp[i] = c * xp - s * xq;
          vq[i] = s * xp + c * xq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    sigma[j] = norm2(u.column(j));
    if (sigma[j] > 0.0) scale(1.0 / sigma[j], u.column(j));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  SvdResult out{DenseMatrix(m, n), std::vector<double>(n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.sigma[k] = sigma[j];
    std::copy(u.column(j).begin(), u.column(j).end(), out.u.column(k).begin());
    std::copy(v.column(j).begin(), v.column(j).end(), out.v.column(k).begin());
  }
  return out;
}

std::vector<double> singular_values(const DenseMatrix& a) {
  if (a.rows() < a.cols()) return jacobi_svd(a.transposed()).sigma;
  return jacobi_svd(a).sigma;
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& input) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw DimensionMismatch("symmetric_eigenvalues: matrix must be square");
  DenseMatrix a = input;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) a(i, j) = a(j, i);

  const double scale_ref = std::max(frobenius_norm(a), 1e-300);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t q = 1; q < n; ++q)
      for (std::size_t p = 0; p < q; ++p) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-17 * scale_ref) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(1.0, theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          const double nrp = c * arp - s * arq;
          const double nrq = s * arp + c * arq;
          a(r, p) = nrp;
          a(p, r) = nrp;
          a(r, q) = nrq;
          a(q, r) = nrq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

}  // namespace stablepc

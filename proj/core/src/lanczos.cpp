#include <cmath>

#include "solver_common.hpp"
#include "stablepc/errors.hpp"
#include "stablepc/solvers.hpp"

namespace stablepc {

namespace {

/// Solves T s = e₁ for the leading k×k block of the symmetric tridiagonal
/// T = tridiag(beta[1..], alpha, beta[1..]) by Givens QR, so an indefinite T
/// is fine. Returns false if R has a zero diagonal entry.
bool solve_tridiagonal_e1(const std::vector<double>& alpha, const std::vector<double>& beta,
                          std::size_t k, std::vector<double>& s) {
  // beta[j] couples rows j-1 and j (beta[0] unused).
  DenseMatrix r(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    r(j, j) = alpha[j];
    if (j + 1 < k) {
      r(j, j + 1) = beta[j + 1];
      r(j + 1, j) = beta[j + 1];
    }
  }
  s.assign(k, 0.0);
  s[0] = 1.0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const double a = r(j, j);
    const double b = r(j + 1, j);
    const double h = std::hypot(a, b);
    if (h == 0.0) continue;
    const double c = a / h;
    const double sn = b / h;
    const std::size_t last = std::min(j + 2, k - 1);
    for (std::size_t col = j; col <= last; ++col) {
      const double top = r(j, col);
      const double bot = r(j + 1, col);
      r(j, col) = c * top + sn * bot;
      r(j + 1, col) = -sn * top + c * bot;
    }
    const double top = s[j];
    const double bot = s[j + 1];
    s[j] = c * top + sn * bot;
    s[j + 1] = -sn * top + c * bot;
  }
  for (std::size_t j = k; j-- > 0;) {
    if (r(j, j) == 0.0 || !std::isfinite(r(j, j))) return false;
    double acc = s[j];
    const std::size_t last = std::min(j + 2, k - 1);
    for (std::size_t col = j + 1; col <= last; ++col) acc -= r(j, col) * s[col];
    s[j] = acc / r(j, j);
  }
  return true;
}

}  // namespace

LanczosResult lanczos_solve(const LinearOperator& m, std::span<const double> c, std::size_t q,
                            double unit_roundoff) {
  if (m.in_dim() != m.out_dim()) throw DimensionMismatch("lanczos_solve: M must be square");
  if (c.size() != m.in_dim()) throw DimensionMismatch("lanczos_solve: rhs length");
  const std::size_t n = c.size();
  LanczosResult out;
  out.solution.assign(n, 0.0);

  const double gamma = norm2(c);
  if (gamma == 0.0 || q == 0) return out;

  std::vector<Vector> basis;
  std::vector<double> alpha;
  std::vector<double> beta{0.0};  // beta[0] = β₁ = 0
  basis.reserve(q);

  Vector q_prev(n, 0.0);
  Vector q_cur(c.begin(), c.end());
  scale(1.0 / gamma, q_cur);

  for (std::size_t i = 0; i < q; ++i) {
    Vector w = m.apply(q_cur);
    const double applied_norm = norm2(w);
    axpy(-beta[i], q_prev, w);
    const double a = dot(w, q_cur);
    axpy(-a, q_cur, w);
    const double b = norm2(w);
    alpha.push_back(a);
    basis.push_back(q_cur);
    if (b <= detail::kBreakdownFactor * unit_roundoff * applied_norm) {
      out.truncated = true;
      break;
    }
    if (i + 1 == q) break;
    beta.push_back(b);
    scale(1.0 / b, w);
    q_prev = std::move(q_cur);
    q_cur = std::move(w);
  }

  std::size_t k = basis.size();
  std::vector<double> s;
  while (k > 0 && !solve_tridiagonal_e1(alpha, beta, k, s)) --k;
  out.steps = k;
  for (std::size_t j = 0; j < k; ++j) axpy(gamma * s[j], basis[j], out.solution);
  return out;
}

}  // namespace stablepc

#include <cmath>

#include "solver_common.hpp"
#include "stablepc/errors.hpp"
#include "stablepc/solvers.hpp"

namespace stablepc {

namespace {

/// Arnoldi basis plus the Givens-reduced Hessenberg matrix. Column k of `h`
/// holds the already-rotated (upper triangular) column of R.
struct ArnoldiState {
  std::vector<Vector> basis;
  std::vector<Vector> h;
  std::vector<double> cs, sn;
  std::vector<double> g;

  /// z = V_k R_k⁻¹ g_k for the first k columns.
  Vector combination(std::size_t k, std::size_t n) const {
    std::vector<double> y(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
      double acc = g[i];
      for (std::size_t j = i + 1; j < k; ++j) acc -= h[j][i] * y[j];
      y[i] = acc / h[i][i];
    }
    Vector z(n, 0.0);
    for (std::size_t j = 0; j < k; ++j) axpy(y[j], basis[j], z);
    return z;
  }
};

}  // namespace

SolveResult gmres(const LinearOperator& op, std::span<const double> b,
                  const SolveControls& controls, const Preconditioner* right_pre,
                  const Instrumentation& inst) {
  if (op.in_dim() != op.out_dim()) throw DimensionMismatch("gmres: operator must be square");
  if (b.size() != op.out_dim()) throw DimensionMismatch("gmres: rhs length");
  const std::size_t n = b.size();
  constexpr double u = 0x1.0p-53;

  SolveResult result;
  MatvecCounts tally;
  const LinearOperator a_c = counted(op, tally);
  std::optional<Preconditioner> p_c;
  if (right_pre) p_c = counted(*right_pre, tally);
  detail::Recorder rec(result.history, inst);

  auto to_solution = [&](Vector z, bool charge) {
    if (!right_pre) return z;
    return charge ? p_c->pre(z) : right_pre->pre(z);
  };

  ArnoldiState st;
  const double beta = norm2(b);
  st.g.push_back(beta);
  std::size_t k = 0;
  auto materialize = [&] { return to_solution(st.combination(k, n), false); };
  rec.record(0, beta, materialize);

  result.status = Status::max_iters;
  Event final_event = Event::terminated;
  if (beta == 0.0) {
    result.status = Status::converged;
  } else {
    Vector v0(b.begin(), b.end());
    scale(1.0 / beta, v0);
    st.basis.push_back(std::move(v0));
  }

  while (beta > 0.0 && k < controls.max_iters) {
    const Vector& vk = st.basis[k];
    Vector w = right_pre ? a_c.apply(p_c->pre(vk)) : a_c.apply(vk);
    const double pre_norm = norm2(w);
    Vector col(k + 2, 0.0);
    for (std::size_t j = 0; j <= k; ++j) {
      col[j] = dot(w, st.basis[j]);
      axpy(-col[j], st.basis[j], w);
    }
    const double hnext = norm2(w);
    const bool happy = hnext <= detail::kBreakdownFactor * u * pre_norm;
    col[k + 1] = happy ? 0.0 : hnext;

    for (std::size_t j = 0; j < k; ++j) {
      const double t = st.cs[j] * col[j] + st.sn[j] * col[j + 1];
      col[j + 1] = -st.sn[j] * col[j] + st.cs[j] * col[j + 1];
      col[j] = t;
    }
    const double rr = std::hypot(col[k], col[k + 1]);
    const double c = rr == 0.0 ? 1.0 : col[k] / rr;
    const double s = rr == 0.0 ? 0.0 : col[k + 1] / rr;
    st.cs.push_back(c);
    st.sn.push_back(s);
    col[k] = rr;
    col[k + 1] = 0.0;
    st.g.push_back(-s * st.g[k]);
    st.g[k] = c * st.g[k];
    col.resize(k + 1);
    st.h.push_back(std::move(col));
    ++k;

    const double estimate = std::abs(st.g[k]);
    rec.record(k, estimate, materialize, happy);
    if (happy) {
      result.status = Status::breakdown;
      final_event = Event::breakdown;
      break;
    }
    if (controls.rtol > 0.0 && estimate <= controls.rtol * beta) {
      result.status = Status::converged;
      break;
    }
    scale(1.0 / hnext, w);
    st.basis.push_back(std::move(w));
  }

  result.solution = to_solution(st.combination(k, n), true);
  rec.finish(final_event, result.solution);
  result.history.counts = tally;
  return result;
}

}  // namespace stablepc

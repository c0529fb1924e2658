#include <algorithm>
#include <cmath>

#include "stablepc/errors.hpp"
#include "stablepc/problems.hpp"
#include "stablepc/rng.hpp"

namespace stablepc {

RpCholeskyResult rpcholesky(const ColumnSource& a, std::size_t k, std::uint64_t seed) {
  const std::size_t n = a.n;
  if (k > n) throw InvalidSpec("rpcholesky: k exceeds n");
  RpCholeskyResult out;
  Vector d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a.diagonal(i);
  const double d_max = n ? *std::max_element(d.begin(), d.end()) : 0.0;

  Rng rng(seed);
  std::vector<Vector> cols;
  cols.reserve(k);
  for (std::size_t step = 0; step < k; ++step) {
    double trace = 0.0;
    for (const double v : d) trace += v;
    if (!(trace > 0.0)) {
      out.degenerate = true;
      break;
    }
    const double target = rng.uniform() * trace;
    std::size_t s = n - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d[i];
      if (target < acc) {
        s = i;
        break;
      }
    }
    // Rounding in the running sum can land on a zero entry; step back to the
    // last positive one.
    while (d[s] <= 0.0 && s > 0) --s;
    if (!(d[s] > 0.0)) {
      out.degenerate = true;
      break;
    }

    Vector g = a.column(s);
    for (const Vector& f : cols) {
      const double fs = f[s];
      for (std::size_t i = 0; i < n; ++i) g[i] -= f[i] * fs;
    }
    const double inv_root = 1.0 / std::sqrt(d[s]);
    for (double& v : g) v *= inv_root;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] -= g[i] * g[i];
      if (d_max > 0.0) out.min_relative_residual = std::min(out.min_relative_residual, d[i] / d_max);
      d[i] = std::max(d[i], 0.0);
    }
    d[s] = 0.0;
    out.pivots.push_back(s);
    cols.push_back(std::move(g));
  }

  out.f = DenseMatrix(n, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    std::copy(cols[j].begin(), cols[j].end(), out.f.column(j).begin());
  }
  out.residual_diagonal = std::move(d);
  return out;
}

}  // namespace stablepc

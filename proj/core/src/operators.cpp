#include "stablepc/operators.hpp"

#include <memory>
#include <string>

#include "stablepc/errors.hpp"
#include "stablepc/linalg.hpp"

namespace stablepc {

namespace {

void check_length(std::span<const double> z, std::size_t expected, const char* what) {
  if (z.size() != expected) {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(expected) +
                            ", got " + std::to_string(z.size()));
  }
}

}  // namespace

LinearOperator::LinearOperator(std::size_t out_dim, std::size_t in_dim, Map apply,
                               Map apply_adjoint)
    : out_dim_(out_dim),
      in_dim_(in_dim),
      apply_(std::move(apply)),
      apply_adjoint_(std::move(apply_adjoint)) {}

Vector LinearOperator::apply(std::span<const double> z) const {
  check_length(z, in_dim_, "LinearOperator::apply");
  return apply_(z);
}

Vector LinearOperator::apply_adjoint(std::span<const double> z) const {
  check_length(z, out_dim_, "LinearOperator::apply_adjoint");
  return apply_adjoint_(z);
}

Preconditioner::Preconditioner(std::size_t dim, Map pre, Map pre_adjoint, bool is_identity)
    : dim_(dim), identity_(is_identity), pre_(std::move(pre)), pre_adjoint_(std::move(pre_adjoint)) {}

Vector Preconditioner::pre(std::span<const double> z) const {
  check_length(z, dim_, "Preconditioner::pre");
  return pre_(z);
}

Vector Preconditioner::pre_adjoint(std::span<const double> z) const {
  check_length(z, dim_, "Preconditioner::pre_adjoint");
  return pre_adjoint_(z);
}

LinearOperator dense_operator(DenseMatrix a) {
  auto m = std::make_shared<const DenseMatrix>(std::move(a));
  return LinearOperator(
      m->rows(), m->cols(), [m](std::span<const double> z) { return matvec(*m, z); },
      [m](std::span<const double> z) { return matvec_transpose(*m, z); });
}

LinearOperator identity_operator(std::size_t n) {
  auto copy = [](std::span<const double> z) { return Vector(z.begin(), z.end()); };
  return LinearOperator(n, n, copy, copy);
}

Preconditioner identity_preconditioner(std::size_t n) {
  auto copy = [](std::span<const double> z) { return Vector(z.begin(), z.end()); };
  return Preconditioner(n, copy, copy, /*is_identity=*/true);
}

Preconditioner dense_inverse_preconditioner(DenseMatrix pinv) {
  if (pinv.rows() != pinv.cols()) {
    throw DimensionMismatch("dense_inverse_preconditioner: P⁻¹ must be square");
  }
  auto m = std::make_shared<const DenseMatrix>(std::move(pinv));
  return Preconditioner(
      m->rows(), [m](std::span<const double> z) { return matvec(*m, z); },
      [m](std::span<const double> z) { return matvec_transpose(*m, z); });
}

Preconditioner cholesky_preconditioner(const DenseMatrix& p) {
  auto r = std::make_shared<const DenseMatrix>(cholesky(p));
  // P = RᵀR, so P⁻¹z = R⁻¹(R⁻ᵀz).
  auto apply = [r](std::span<const double> z) {
    const Vector w = triangular_solve(*r, z, Triangle::upper, /*transpose=*/true);
    return triangular_solve(*r, w, Triangle::upper, /*transpose=*/false);
  };
  return Preconditioner(r->rows(), apply, apply);
}

Preconditioner nystrom_preconditioner(const DenseMatrix& f, double lambda) {
  if (!(lambda > 0.0)) throw InvalidSpec("nystrom_preconditioner: lambda must be positive");
  if (f.cols() > f.rows()) throw DimensionMismatch("nystrom_preconditioner: F must be n×k, k ≤ n");

  struct Factors {
    DenseMatrix u;              // n×k orthonormal
    std::vector<double> shift;  // 1/(σ² + λ)
    double lambda;
  };
  auto factors = std::make_shared<Factors>();
  factors->lambda = lambda;
  const std::size_t n = f.rows();
  const std::size_t k = f.cols();
  if (k == 0) {
    factors->u = DenseMatrix(n, 0);
  } else {
    auto [q, r] = householder_qr(f);
    SvdResult svd = jacobi_svd(r);
    factors->u = matmul(q, svd.u);
    factors->shift.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      factors->shift[i] = 1.0 / (svd.sigma[i] * svd.sigma[i] + lambda);
    }
  }

  auto apply = [factors](std::span<const double> y) {
    const DenseMatrix& u = factors->u;
    const Vector uty = matvec_transpose(u, y);
    Vector scaled = uty;
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] *= factors->shift[i];
    const Vector low = matvec(u, scaled);
    const Vector proj = matvec(u, uty);
    Vector out(y.size());
    const double inv_lambda = 1.0 / factors->lambda;
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = low[i] + inv_lambda * (y[i] - proj[i]);
    return out;
  };
  return Preconditioner(n, apply, apply);
}

LinearOperator composed_normal_operator(const LinearOperator& a, const Preconditioner& p) {
  if (a.in_dim() != p.dim()) throw DimensionMismatch("composed_normal_operator");
  auto apply = [a, p](std::span<const double> z) {
    return p.pre_adjoint(a.apply_adjoint(a.apply(p.pre(z))));
  };
  return LinearOperator(p.dim(), p.dim(), apply, apply);
}

LinearOperator right_preconditioned_operator(const LinearOperator& a, const Preconditioner& p) {
  if (a.in_dim() != p.dim()) throw DimensionMismatch("right_preconditioned_operator");
  return LinearOperator(
      a.out_dim(), p.dim(), [a, p](std::span<const double> z) { return a.apply(p.pre(z)); },
      [a, p](std::span<const double> z) { return p.pre_adjoint(a.apply_adjoint(z)); });
}

LinearOperator left_preconditioned_operator(const LinearOperator& a, const Preconditioner& p) {
  if (a.out_dim() != p.dim()) throw DimensionMismatch("left_preconditioned_operator");
  return LinearOperator(
      p.dim(), a.in_dim(), [a, p](std::span<const double> z) { return p.pre(a.apply(z)); },
      [a, p](std::span<const double> z) { return a.apply_adjoint(p.pre_adjoint(z)); });
}

LinearOperator counted(const LinearOperator& a, MatvecCounts& counts) {
  MatvecCounts* c = &counts;
  return LinearOperator(
      a.out_dim(), a.in_dim(),
      [a, c](std::span<const double> z) {
        ++c->apply;
        return a.apply(z);
      },
      [a, c](std::span<const double> z) {
        ++c->apply_adjoint;
        return a.apply_adjoint(z);
      });
}

Preconditioner counted(const Preconditioner& p, MatvecCounts& counts) {
  MatvecCounts* c = &counts;
  return Preconditioner(
      p.dim(),
      [p, c](std::span<const double> z) {
        ++c->pre;
        return p.pre(z);
      },
      [p, c](std::span<const double> z) {
        ++c->pre_adjoint;
        return p.pre_adjoint(z);
      },
      p.is_identity());
}

}  // namespace stablepc

#include "sflab/hermitian_operator.hpp"

#include <algorithm>
#include <cmath>

#include "sflab/eigensolvers.hpp"
#include "sflab/error.hpp"

namespace sflab {

struct HermitianOperator::Impl {
  Eigen::Index dim = 0;
  std::optional<Eigen::MatrixXcd> matrix;
  ApplyFn apply;
  double norm = 0.0;
};

HermitianOperator HermitianOperator::dense(Eigen::MatrixXcd matrix,
                                           std::optional<double> norm_bound) {
  if (matrix.rows() != matrix.cols()) throw ShapeError("dense operator must be square");
  auto impl = std::make_shared<Impl>();
  impl->dim = matrix.rows();
  if (norm_bound) {
    impl->norm = *norm_bound;
  } else if (impl->dim > 0) {
    const auto ev = dense_eigenvalues(matrix);
    impl->norm = std::max(std::abs(ev.front()), std::abs(ev.back()));
  }
  impl->matrix = std::move(matrix);
  return HermitianOperator(std::move(impl));
}

HermitianOperator HermitianOperator::matrix_free(Eigen::Index dim, ApplyFn apply,
                                                 double norm_bound) {
  if (dim < 0) throw ShapeError("negative operator dimension");
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->apply = std::move(apply);
  impl->norm = norm_bound;
  return HermitianOperator(std::move(impl));
}

HermitianOperator HermitianOperator::combine(double a, const HermitianOperator& A, double b,
                                             const HermitianOperator& B) {
  if (A.dim() != B.dim()) throw ShapeError("combine: dimension mismatch");
  const double bound = std::abs(a) * A.norm_bound() + std::abs(b) * B.norm_bound();
  if (A.is_dense() && B.is_dense()) {
    return dense(a * A.matrix() + b * B.matrix(), bound);
  }
  return matrix_free(
      A.dim(),
      [a, b, A, B](const Block& in, Block& out) {
        Block tmp(in.rows(), in.cols());
        A.apply(in, out);
        B.apply(in, tmp);
        out = a * out + b * tmp;
      },
      bound);
}

Eigen::Index HermitianOperator::dim() const { return impl_->dim; }
bool HermitianOperator::is_dense() const { return impl_->matrix.has_value(); }
double HermitianOperator::norm_bound() const { return impl_->norm; }

void HermitianOperator::apply(const Block& in, Block& out) const {
  if (in.rows() != dim()) throw ShapeError("apply: vector length does not match operator");
  out.resize(in.rows(), in.cols());
  if (impl_->matrix) {
    out.noalias() = *impl_->matrix * in;
  } else {
    impl_->apply(in, out);
  }
}

Eigen::VectorXcd HermitianOperator::apply(const Eigen::VectorXcd& v) const {
  Block out;
  apply(Block(v), out);
  return out.col(0);
}

const Eigen::MatrixXcd& HermitianOperator::matrix() const {
  if (!impl_->matrix) throw Error("operator is matrix-free; use to_dense()");
  return *impl_->matrix;
}

Eigen::MatrixXcd HermitianOperator::to_dense() const {
  if (impl_->matrix) return *impl_->matrix;
  Block out;
  apply(Block::Identity(dim(), dim()), out);
  return out;
}

}  // namespace sflab

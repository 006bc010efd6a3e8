#pragma once

#include <functional>
#include <memory>
#include <optional>

#include <Eigen/Dense>

namespace sflab {

/// A Hermitian linear operator, stored either as a dense matrix or as a
/// matrix-free applicator. Immutable and cheap to copy (shared state).
class HermitianOperator {
 public:
  using Block = Eigen::MatrixXcd;
  using ApplyFn = std::function<void(const Block& in, Block& out)>;

  /// Dense operator. Without a bound, the exact spectral norm is computed.
  static HermitianOperator dense(Eigen::MatrixXcd matrix,
                                 std::optional<double> norm_bound = std::nullopt);
  /// Matrix-free operator; `norm_bound` must bound ||A|| from above.
  static HermitianOperator matrix_free(Eigen::Index dim, ApplyFn apply, double norm_bound);

  /// a * A + b * B, dense if both inputs are dense, lazy otherwise.
  static HermitianOperator combine(double a, const HermitianOperator& A, double b,
                                   const HermitianOperator& B);

  Eigen::Index dim() const;
  bool is_dense() const;
  double norm_bound() const;

  /// out = A * in, column by column.
  void apply(const Block& in, Block& out) const;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

  /// The stored matrix; throws if the operator is matrix-free.
  const Eigen::MatrixXcd& matrix() const;
  /// Dense copy, assembled column by column for matrix-free operators.
  Eigen::MatrixXcd to_dense() const;

 private:
  struct Impl;
  explicit HermitianOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace sflab

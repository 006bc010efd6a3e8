#include <doctest.h>

#include <algorithm>

#include "paths.hpp"
#include "sflab/eigensolvers.hpp"
#include "sflab/error.hpp"

using namespace sflab;
using namespace sflab::testing;

TEST_CASE("solver mode names") {
  CHECK(parse_solver_mode("dense") == SolverMode::dense);
  CHECK(parse_solver_mode("iterative") == SolverMode::iterative);
  CHECK(to_string(SolverMode::iterative) == "iterative");
  CHECK_THROWS_AS(parse_solver_mode("lanczos"), ConfigError);
}

TEST_CASE("dense eigenvalues are sorted with multiplicity") {
  const Eigen::MatrixXcd d = Eigen::Vector4cd(2.0, -1.0, 2.0, 0.5).asDiagonal();
  CHECK(dense_eigenvalues(d) == std::vector<double>{-1.0, 0.5, 2.0, 2.0});
  CHECK_THROWS_AS(dense_eigenvalues(Eigen::MatrixXcd::Zero(2, 3)), ShapeError);
}

TEST_CASE("window selection and hazard flag") {
  const Eigen::MatrixXcd d = Eigen::Matrix<std::complex<double>, 6, 1>(-5.0, -3.0, -1.0, 0.2, 3.0 - 1e-8, 4.0).asDiagonal();
  const auto r = window_eigs(HermitianOperator::dense(d), SpectralWindow(3.0, 1e-6), SolverMode::dense);
  CHECK(r.eigenvalues.size() == 4);
  CHECK(r.eigenvalues.front() == doctest::Approx(-3.0));
  CHECK(r.hazard);
  const auto clean = window_eigs(HermitianOperator::dense(d), SpectralWindow(2.0, 1e-6), SolverMode::dense);
  CHECK_FALSE(clean.hazard);
}

TEST_CASE("iterative solver matches dense on random matrix-free operators") {
  Rng rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const int dim = 200 + 50 * trial;
    const Eigen::MatrixXcd a = random_hermitian(dim, rng, 20.0);
    const HermitianOperator dense = HermitianOperator::dense(a);
    const HermitianOperator mf = HermitianOperator::matrix_free(
        dim, [a](const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) { out = a * in; }, dense.norm_bound());
    const SpectralWindow w(3.0, 1e-6);
    const auto ref = window_eigs(dense, w, SolverMode::dense);
    const auto it = window_eigs(mf, w, SolverMode::iterative);
    REQUIRE(ref.eigenvalues.size() == it.eigenvalues.size());
    for (std::size_t i = 0; i < ref.eigenvalues.size(); ++i) {
      CHECK(std::abs(ref.eigenvalues[i] - it.eigenvalues[i]) <= 1e-8);
    }
  }
}

TEST_CASE("iterative solves are deterministic for a fixed seed") {
  Rng rng(3);
  const Eigen::MatrixXcd a = random_hermitian(300, rng, 20.0);
  const HermitianOperator op = HermitianOperator::matrix_free(
      300, [a](const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) { out = a * in; },
      HermitianOperator::dense(a).norm_bound());
  const auto r1 = window_eigs(op, SpectralWindow(2.0, 1e-6), SolverMode::iterative);
  const auto r2 = window_eigs(op, SpectralWindow(2.0, 1e-6), SolverMode::iterative);
  CHECK(r1.eigenvalues == r2.eigenvalues);
}

TEST_CASE("hermitian operator algebra") {
  Rng rng(5);
  const Eigen::MatrixXcd a = random_hermitian(10, rng);
  const Eigen::MatrixXcd b = random_hermitian(10, rng);
  const auto A = HermitianOperator::dense(a);
  const auto B = HermitianOperator::dense(b);
  const auto C = HermitianOperator::combine(2.0, A, -0.5, B);
  CHECK(C.is_dense());
  CHECK((C.matrix() - (2.0 * a - 0.5 * b)).norm() <= 1e-13);
  const auto lazy = HermitianOperator::matrix_free(
      10, [a](const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) { out = a * in; }, A.norm_bound());
  const auto D = HermitianOperator::combine(1.0, lazy, 1.0, B);
  CHECK_FALSE(D.is_dense());
  CHECK((D.to_dense() - (a + b)).norm() <= 1e-13);
  CHECK(D.norm_bound() >= (a + b).operatorNorm() - 1e-12);
  CHECK_THROWS_AS(lazy.matrix(), Error);
  CHECK_THROWS_AS(HermitianOperator::combine(1.0, A, 1.0, HermitianOperator::dense(Eigen::MatrixXcd::Zero(3, 3))),
                  ShapeError);
}

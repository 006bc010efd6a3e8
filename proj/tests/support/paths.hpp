#pragma once

// Random Hermitian paths and a brute-force spectral-flow counter shared by the
// unit tests and the acceptance binary.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sflab/eigensolvers.hpp"
#include "sflab/hermitian_operator.hpp"
#include "sflab/spectral_flow.hpp"

namespace sflab::testing {

using Rng = std::mt19937_64;

inline Eigen::MatrixXcd random_hermitian(int dim, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = {g(rng), g(rng)};
  }
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  return h * (scale / std::sqrt(static_cast<double>(dim)));
}

inline Eigen::MatrixXcd random_unitary(int dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = {g(rng), g(rng)};
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(dim, dim);
}

/// exp(i s H) for Hermitian H.
inline Eigen::MatrixXcd unitary_exp(const Eigen::MatrixXcd& h, double s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd phases =
      (es.eigenvalues().cast<std::complex<double>>() * std::complex<double>(0.0, s)).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline double min_abs_eigenvalue(const Eigen::MatrixXcd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().minCoeff();
}

/// Hermitian matrix whose eigenvalues lie in +-[margin, spread], so it is
/// invertible with a known gap.
inline Eigen::MatrixXcd random_invertible(int dim, Rng& rng, double margin = 0.3, double spread = 4.0) {
  std::uniform_real_distribution<double> mag(margin, spread);
  std::bernoulli_distribution sign(0.5);
  Eigen::VectorXd d(dim);
  for (int i = 0; i < dim; ++i) d(i) = sign(rng) ? mag(rng) : -mag(rng);
  const Eigen::MatrixXcd q = random_unitary(dim, rng);
  return q * d.cast<std::complex<double>>().asDiagonal() * q.adjoint();
}

struct AffinePair {
  Eigen::MatrixXcd a0;
  Eigen::MatrixXcd a1;
};

/// Two invertible endpoints, both with gap at least `margin`.
inline AffinePair random_endpoints(int dim, Rng& rng, double margin = 0.2) {
  for (;;) {
    Eigen::MatrixXcd a0 = random_invertible(dim, rng);
    Eigen::MatrixXcd a1 = a0 + random_hermitian(dim, rng, 6.0);
    if (min_abs_eigenvalue(a0) > margin && min_abs_eigenvalue(a1) > margin) return {a0, a1};
  }
}

inline OperatorPath affine_between(const Eigen::MatrixXcd& a0, const Eigen::MatrixXcd& a1) {
  const Eigen::MatrixXcd x = a1 - a0;
  const HermitianOperator xo = HermitianOperator::dense(x);
  return OperatorPath::affine(HermitianOperator::dense(a0), xo, xo.norm_bound());
}

inline OperatorPath through(const std::vector<Eigen::MatrixXcd>& points) {
  std::vector<double> times;
  std::vector<HermitianOperator> ops;
  for (std::size_t i = 0; i < points.size(); ++i) {
    times.push_back(static_cast<double>(i) / static_cast<double>(points.size() - 1));
    ops.push_back(HermitianOperator::dense(points[i]));
  }
  return OperatorPath::sampled(times, ops);
}

/// A_t = Q_t* D Q_t with Q_t = exp(i t H), sampled densely enough that the
/// piecewise-linear interpolant stays invertible. Flow must be 0.
inline OperatorPath conjugated_invertible_path(int dim, Rng& rng) {
  const Eigen::MatrixXcd d = random_invertible(dim, rng, 0.5, 3.0);
  const Eigen::MatrixXcd h = random_hermitian(dim, rng, 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  const double hn = es.eigenvalues().cwiseAbs().maxCoeff();
  // ||A(t+dt) - A(t)|| <= 2 ||D|| ||H|| dt must stay below the gap 0.5.
  const int pieces = static_cast<int>(std::ceil(2.0 * 3.0 * hn / 0.25)) + 1;
  std::vector<Eigen::MatrixXcd> pts;
  for (int i = 0; i <= pieces; ++i) {
    const Eigen::MatrixXcd q = unitary_exp(h, static_cast<double>(i) / pieces);
    pts.push_back(q.adjoint() * d * q);
  }
  return through(pts);
}

/// Signed zero crossings of sorted-index eigenvalue traces of a dense path
/// sampled at `samples` + 1 equispaced points.
inline int brute_force_flow(const OperatorPath& path, int samples) {
  auto eigs = [&](double t) { return dense_eigenvalues(path.at(t).to_dense()); };
  const double t0 = path.t_start();
  const double t1 = path.t_end();
  std::vector<double> prev = eigs(t0);
  int flow = 0;
  for (int i = 1; i <= samples; ++i) {
    const std::vector<double> cur = eigs(t0 + (t1 - t0) * i / samples);
    for (std::size_t j = 0; j < cur.size(); ++j) {
      if (prev[j] < 0.0 && cur[j] > 0.0) ++flow;
      if (prev[j] > 0.0 && cur[j] < 0.0) --flow;
    }
    prev = cur;
  }
  return flow;
}

}  // namespace sflab::testing

#pragma once

// Pseudospectral twisted Dirac operator on T^3 with twisting bundle T^3 x C^N:
//
//   D_t = D^d + t X,
//   D^d = -i sum_j gamma_j d_j + pi sum_j delta_j gamma_j      (diagonal in Fourier space)
//   X   = -i sum_j gamma_j (x) alpha_j(x)                      (pointwise)
//
// Spinor fields are stored site-major: index = (site * 2 + spin) * N + colour.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "sflab/clifford.hpp"
#include "sflab/eigensolvers.hpp"
#include "sflab/fft.hpp"
#include "sflab/gauge.hpp"
#include "sflab/hermitian_operator.hpp"

namespace sflab {

enum class Representation { dense, matrix_free };

/// Largest tolerated ||alpha + alpha*||_max relative to max ||alpha_j||_op.
inline constexpr double kCompatibilityTolerance = 0.25;

/// The affine family t -> D^d + t X for one connection form. The twist is
/// built from the anti-Hermitian part of alpha so every member is Hermitian.
class TwistedDirac {
 public:
  /// Untwisted operator D^d on rank-N spinors.
  TwistedDirac(int n, int rank, SpinStructure spin);
  /// Twisted by alpha; rejects alpha whose anti-Hermitian defect exceeds
  /// compatibility_tolerance * max_j ||alpha_j||.
  TwistedDirac(std::shared_ptr<const ConnectionForm> alpha, SpinStructure spin,
               double compatibility_tolerance = kCompatibilityTolerance);

  int n() const { return n_; }
  int rank() const { return rank_; }
  const SpinStructure& spin() const { return spin_; }
  Eigen::Index dim() const { return dim_; }

  void apply_untwisted(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const;
  void apply_twist(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const;

  /// Dense D^d assembled from 1-D Fourier kernels (no FFT involved).
  Eigen::MatrixXcd dense_untwisted() const;
  Eigen::MatrixXcd dense_twist() const;

  /// ||D^d|| = 2 pi max |kappa + delta/2|, exact.
  double untwisted_norm() const;
  /// ||X|| = max over sites of the pointwise 2N x 2N block norm, exact.
  double twist_norm() const { return twist_norm_; }

  HermitianOperator untwisted(Representation rep) const;
  HermitianOperator twist(Representation rep) const;
  HermitianOperator at(double t, Representation rep) const;

  /// Twist block -i sum_j gamma_j (x) alpha_j at one site.
  Eigen::MatrixXcd twist_block(std::size_t site) const;

 private:
  int n_;
  int rank_;
  SpinStructure spin_;
  Eigen::Index dim_;
  std::shared_ptr<const GridFFT> fft_;
  std::vector<Complex> twist_;  // column-major 2N x 2N blocks per site; empty if untwisted
  double twist_norm_ = 0.0;
};

/// Operator assembly for one t: D^d + t X.
HermitianOperator assemble(std::shared_ptr<const ConnectionForm> alpha, double t,
                           SpinStructure spin, int rank, Representation rep);

/// Closed-form spectrum {+-2 pi |kappa + delta/2|} with multiplicity `rank`, ascending.
std::vector<double> untwisted_spectrum(int n, SpinStructure spin, int rank = 1);

struct ConjugationOptions {
  /// Probes are band-limited to |kappa_j + delta_j / 2| <= cutoff on every axis.
  double cutoff = 1.5;
  int iterations = 60;
  std::uint64_t seed = 7;
};

/// Norm of (D^k_1 - F_k^* D^d F_k) restricted to a fixed low-frequency probe
/// space, estimated by power iteration.
double conjugation_residual(int k, int n, int rank, const CollapseProfile& profile = {},
                            SpinStructure spin = {}, const ConjugationOptions& options = {});

}  // namespace sflab

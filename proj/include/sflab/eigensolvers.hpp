#pragma once

// Windowed Hermitian eigensolvers: LAPACK (dense) and a warm-startable
// Chebyshev-filtered subspace iteration on the folded operator A^2 (iterative).

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sflab/hermitian_operator.hpp"

namespace sflab {

enum class SolverMode { dense, iterative };

SolverMode parse_solver_mode(const std::string& name);
std::string to_string(SolverMode mode);

/// Zero-centred window [-half_width, half_width] with a boundary guard.
struct SpectralWindow {
  double half_width = 3.0;
  double guard = 1e-6;

  SpectralWindow() = default;
  SpectralWindow(double w, double eps);
  void validate() const;
};

struct IterativeOptions {
  int block_size = 24;
  int filter_degree = 24;       // degree of the Chebyshev polynomial in A^2
  double tolerance = 1e-10;     // residual tolerance relative to ||A||
  int max_iterations = 400;
  int min_outside = 6;          // Ritz values beyond the window kept as a guard band
  std::uint64_t seed = 20240611;
};

struct WindowEigs {
  std::vector<double> eigenvalues;  // ascending, with multiplicity
  std::vector<double> residuals;    // ||A v - lambda v||, same order
  bool hazard = false;              // an eigenvalue within guard of +-half_width
  double norm_estimate = 0.0;
  int iterations = 0;
  long matvecs = 0;
};

/// All eigenvalues of a dense Hermitian matrix, ascending.
std::vector<double> dense_eigenvalues(const Eigen::MatrixXcd& matrix);

/// All eigenvalues in the window. Residuals are checked against
/// 1e-8 * ||A||; a violation raises SolverError.
WindowEigs window_eigs(const HermitianOperator& op, const SpectralWindow& window,
                       SolverMode mode, const IterativeOptions& options = {});

/// Subspace iteration that keeps its basis between calls, so a sequence of
/// nearby operators (a path) converges in a few filter sweeps each.
class FilteredSubspaceSolver {
 public:
  explicit FilteredSubspaceSolver(IterativeOptions options = {});

  WindowEigs solve(const HermitianOperator& op, const SpectralWindow& window);
  void reset() { basis_.resize(0, 0); }

 private:
  IterativeOptions options_;
  Eigen::MatrixXcd basis_;
  std::uint64_t calls_ = 0;
};

}  // namespace sflab

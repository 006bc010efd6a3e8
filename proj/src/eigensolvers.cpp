#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "sflab/eigensolvers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "sflab/error.hpp"

namespace sflab {

namespace {

constexpr double kResidualTolerance = 1e-8;  // relative to ||A||, per returned pair

bool near_boundary(double lambda, const SpectralWindow& w) {
  return std::abs(std::abs(lambda) - w.half_width) <= w.guard;
}

void check_residuals(const WindowEigs& r, double norm) {
  for (std::size_t j = 0; j < r.residuals.size(); ++j) {
    if (!(r.residuals[j] <= kResidualTolerance * std::max(norm, 1.0))) {
      std::ostringstream os;
      os << "eigenpair residual " << r.residuals[j] << " exceeds " << kResidualTolerance
         << " * ||A|| for eigenvalue " << r.eigenvalues[j];
      throw SolverError(os.str());
    }
  }
}

WindowEigs dense_window(const HermitianOperator& op, const SpectralWindow& window) {
  Eigen::MatrixXcd a = op.is_dense() ? op.matrix() : op.to_dense();
  const lapack_int n = static_cast<lapack_int>(a.rows());
  WindowEigs out;
  out.norm_estimate = op.norm_bound();
  if (n == 0) return out;
  Eigen::MatrixXcd work = a;
  std::vector<double> w(static_cast<std::size_t>(n));
  Eigen::MatrixXcd z(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  // zheevr treats the value range as the half-open interval (vl, vu].
  const double lo = std::nextafter(-window.half_width, -1e300);
  const lapack_int info =
      LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'V', 'U', n, work.data(), n, lo, window.half_width,
                     0, 0, 0.0, &found, w.data(), z.data(), n, support.data());
  if (info != 0) throw SolverError("LAPACKE_zheevr failed with info " + std::to_string(info));
  out.eigenvalues.assign(w.begin(), w.begin() + found);
  if (found > 0) {
    const Eigen::MatrixXcd vecs = z.leftCols(found);
    const Eigen::MatrixXcd r =
        a * vecs - vecs * Eigen::Map<const Eigen::VectorXd>(w.data(), found).asDiagonal();
    for (lapack_int j = 0; j < found; ++j) out.residuals.push_back(r.col(j).norm());
  }
  for (double l : out.eigenvalues) out.hazard = out.hazard || near_boundary(l, window);
  out.iterations = 1;
  return out;
}

Eigen::MatrixXcd random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = {gauss(rng), gauss(rng)};
  }
  return m;
}

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& v) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(v);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(v.rows(), v.cols());
}

// Scaled Chebyshev filter (Zhou & Saad) in B = A^2: damps [lo, hi], amplifies
// the part of the spectrum of B below lo, normalised at B = 0.
Eigen::MatrixXcd chebyshev_filter(const HermitianOperator& op, const Eigen::MatrixXcd& v,
                                  int degree, double lo, double hi, long& matvecs) {
  auto apply_b = [&](const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd t;
    Eigen::MatrixXcd y;
    op.apply(x, t);
    op.apply(t, y);
    matvecs += 2 * x.cols();
    return y;
  };
  const double e = 0.5 * (hi - lo);
  const double c = 0.5 * (hi + lo);
  double sigma = e / (0.0 - c);
  const double sigma1 = sigma;
  const double gamma = 2.0 / sigma1;
  Eigen::MatrixXcd x = v;
  Eigen::MatrixXcd y = (apply_b(x) - c * x) * (sigma1 / e);
  for (int i = 2; i <= degree; ++i) {
    const double sigma2 = 1.0 / (gamma - sigma);
    Eigen::MatrixXcd next = (apply_b(y) - c * y) * (2.0 * sigma2 / e) - (sigma * sigma2) * x;
    x = std::move(y);
    y = std::move(next);
    sigma = sigma2;
  }
  return y;
}

// Two-stage Rayleigh-Ritz. Stage one diagonalises A^2 on span(q), giving
// folded Ritz values sigma_j^2 ascending. Stage two diagonalises A on the
// leading `keep` folded Ritz vectors. Cutting the block inside a gap of sigma
// keeps +-lambda pairs together, so stage two cannot invent interior values.
struct FoldedRitz {
  Eigen::MatrixXcd folded;        // folded Ritz vectors, sigma ascending
  Eigen::MatrixXcd folded_image;  // A * folded
  Eigen::VectorXd sigma;          // sqrt of the folded Ritz values
};

FoldedRitz folded_ritz(const HermitianOperator& op, const Eigen::MatrixXcd& q, long& matvecs) {
  Eigen::MatrixXcd aq;
  op.apply(q, aq);
  matvecs += q.cols();
  Eigen::MatrixXcd h2 = aq.adjoint() * aq;
  h2 = 0.5 * (h2 + h2.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h2);
  FoldedRitz f;
  f.folded = q * es.eigenvectors();
  f.folded_image = aq * es.eigenvectors();
  f.sigma = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return f;
}

struct RitzPairs {
  Eigen::VectorXd values;  // ascending
  Eigen::VectorXd residuals;
};

RitzPairs ritz_on(const FoldedRitz& f, Eigen::Index keep) {
  const Eigen::MatrixXcd y = f.folded.leftCols(keep);
  const Eigen::MatrixXcd ay = f.folded_image.leftCols(keep);
  Eigen::MatrixXcd h = y.adjoint() * ay;
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::MatrixXcd x = y * es.eigenvectors();
  const Eigen::MatrixXcd ax = ay * es.eigenvectors();
  RitzPairs r;
  r.values = es.eigenvalues();
  r.residuals.resize(keep);
  for (Eigen::Index j = 0; j < keep; ++j) {
    r.residuals(j) = (ax.col(j) - r.values(j) * x.col(j)).norm();
  }
  return r;
}

// Cut position in (first, last]: the largest relative gap between consecutive sigmas.
Eigen::Index choose_cut(const Eigen::VectorXd& sigma, Eigen::Index first, Eigen::Index last) {
  Eigen::Index best = last;
  double best_gap = -1.0;
  for (Eigen::Index p = first + 1; p <= last; ++p) {
    const double gap = (sigma(p) - sigma(p - 1)) / std::max(sigma(p), 1e-300);
    if (gap > best_gap) {
      best_gap = gap;
      best = p;
    }
  }
  return best;
}

}  // namespace

SolverMode parse_solver_mode(const std::string& name) {
  if (name == "dense") return SolverMode::dense;
  if (name == "iterative") return SolverMode::iterative;
  throw ConfigError("unknown solver mode '" + name + "' (expected dense or iterative)");
}

std::string to_string(SolverMode mode) {
  return mode == SolverMode::dense ? "dense" : "iterative";
}

SpectralWindow::SpectralWindow(double w, double eps) : half_width(w), guard(eps) { validate(); }

void SpectralWindow::validate() const {
  if (!(half_width > 0.0)) throw PreconditionError("window half-width must be positive");
  if (!(guard >= 0.0 && guard < half_width / 10.0)) {
    throw PreconditionError("window guard must lie in [0, half_width / 10)");
  }
}

std::vector<double> dense_eigenvalues(const Eigen::MatrixXcd& matrix) {
  if (matrix.rows() != matrix.cols()) throw ShapeError("dense_eigenvalues: matrix not square");
  const lapack_int n = static_cast<lapack_int>(matrix.rows());
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 0) return w;
  Eigen::MatrixXcd work = matrix;
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', n, work.data(), n, w.data());
  if (info != 0) throw SolverError("LAPACKE_zheevd failed with info " + std::to_string(info));
  return w;
}

WindowEigs window_eigs(const HermitianOperator& op, const SpectralWindow& window,
                       SolverMode mode, const IterativeOptions& options) {
  window.validate();
  if (mode == SolverMode::dense) {
    WindowEigs r = dense_window(op, window);
    check_residuals(r, op.norm_bound());
    return r;
  }
  FilteredSubspaceSolver solver(options);
  return solver.solve(op, window);
}

FilteredSubspaceSolver::FilteredSubspaceSolver(IterativeOptions options)
    : options_(options) {}

WindowEigs FilteredSubspaceSolver::solve(const HermitianOperator& op,
                                         const SpectralWindow& window) {
  window.validate();
  const Eigen::Index n = op.dim();
  const double norm = std::max(op.norm_bound(), 1e-300);
  const double tol = options_.tolerance * norm;
  const double guard_tol = 1e-6 * norm;
  const double w = window.half_width;
  const Eigen::Index reserve = std::max(2, options_.min_outside / 2);
  WindowEigs out;
  out.norm_estimate = op.norm_bound();
  if (n == 0) return out;
  ++calls_;

  Eigen::MatrixXcd basis;
  if (basis_.rows() == n && basis_.cols() > 0) {
    basis = basis_;
  } else {
    basis = random_block(n, std::min<Eigen::Index>(n, options_.block_size), options_.seed);
  }
  long matvecs = 0;
  RitzPairs pairs;
  FoldedRitz folded;
  for (int iter = 1;; ++iter) {
    folded = folded_ritz(op, orthonormalize(basis), matvecs);
    const Eigen::Index m = folded.sigma.size();
    const bool full_space = m >= n;
    Eigen::Index inside = 0;
    while (inside < m && folded.sigma(inside) <= w) ++inside;
    const Eigen::Index outside = m - inside;
    bool converged = false;
    bool cut_in_cluster = false;
    if (full_space) {
      pairs = ritz_on(folded, m);
      converged = true;
    } else if (outside >= options_.min_outside) {
      const Eigen::Index keep = choose_cut(folded.sigma, inside, m - reserve);
      cut_in_cluster = (folded.sigma(keep) - folded.sigma(keep - 1)) < 1e-2 * folded.sigma(keep);
      pairs = ritz_on(folded, keep);
      converged = iter > 1;
      for (Eigen::Index j = 0; j < keep && converged; ++j) {
        const bool wanted = std::abs(pairs.values(j)) <= w;
        converged = pairs.residuals(j) <= (wanted ? tol : guard_tol);
      }
    }
    if (converged) {
      out.iterations = iter;
      break;
    }
    if (iter > options_.max_iterations) {
      double worst = 0.0;
      for (Eigen::Index j = 0; j < pairs.residuals.size(); ++j) worst = std::max(worst, pairs.residuals(j));
      std::ostringstream os;
      os << "filtered subspace iteration did not converge in " << options_.max_iterations
         << " sweeps (block " << m << ", folded values inside " << inside << ", worst residual "
         << worst << ", tolerance " << tol << ")";
      throw SolverError(os.str());
    }
    basis = folded.folded;
    // A cut inside a (near-)degenerate folded cluster separates +-lambda
    // pairs; only a larger block can resolve that.
    const bool stalled = cut_in_cluster && iter % 4 == 0;
    if (!full_space && (outside < options_.min_outside || stalled)) {
      const Eigen::Index extra =
          std::min<Eigen::Index>(n - m, options_.min_outside + std::max<Eigen::Index>(4, m / 4));
      Eigen::MatrixXcd grown(n, m + extra);
      grown << basis,
          random_block(n, extra, options_.seed + calls_ * 7919 + static_cast<std::uint64_t>(m));
      basis = std::move(grown);
    }
    if (basis.cols() < n) {
      const double hi = norm * norm;
      double lo = folded.sigma(m - 1) * folded.sigma(m - 1);
      lo = std::min(lo, 0.5 * hi);
      lo = std::max(lo, 1e-3 * hi / std::max<double>(1.0, static_cast<double>(n)));
      basis = chebyshev_filter(op, basis, options_.filter_degree, lo, hi, matvecs);
    }
  }

  basis_ = folded.folded;
  for (Eigen::Index j = 0; j < pairs.values.size(); ++j) {
    if (std::abs(pairs.values(j)) <= w) {
      out.eigenvalues.push_back(pairs.values(j));
      out.residuals.push_back(pairs.residuals(j));
      out.hazard = out.hazard || near_boundary(pairs.values(j), window);
    }
  }
  out.matvecs = matvecs;
  check_residuals(out, op.norm_bound());
  return out;
}

}  // namespace sflab

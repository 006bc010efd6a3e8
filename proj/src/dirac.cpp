#include "sflab/dirac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>

#include "sflab/error.hpp"

namespace sflab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::span<Complex> column_span(Eigen::MatrixXcd& m, Eigen::Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

// Multiplies every Fourier mode of a spinor field by the symbol 2 pi gamma . xi.
void multiply_symbol(const FrequencyLattice& lattice, int rank, std::span<Complex> hat) {
  const int n = lattice.grid_size;
  const Complex i{0.0, 1.0};
  std::size_t k = 0;
  for (int m0 = 0; m0 < n; ++m0) {
    const double x1 = kTwoPi * lattice.frequency(0, m0);
    for (int m1 = 0; m1 < n; ++m1) {
      const double x2 = kTwoPi * lattice.frequency(1, m1);
      for (int m2 = 0; m2 < n; ++m2, ++k) {
        const double x3 = kTwoPi * lattice.frequency(2, m2);
        const Complex s01 = x1 - i * x2;
        const Complex s10 = x1 + i * x2;
        Complex* base = hat.data() + k * 2 * rank;
        for (int c = 0; c < rank; ++c) {
          const Complex up = base[c];
          const Complex down = base[rank + c];
          base[c] = x3 * up + s01 * down;
          base[rank + c] = s10 * up - x3 * down;
        }
      }
    }
  }
}

}  // namespace

TwistedDirac::TwistedDirac(int n, int rank, SpinStructure spin)
    : n_(n), rank_(rank), spin_(spin) {
  if (n < 2) throw InvalidGridError("TwistedDirac: grid size must be at least 2");
  if (rank < 1) throw RankError("TwistedDirac: rank must be positive");
  dim_ = static_cast<Eigen::Index>(2) * rank * n * n * n;
  fft_ = std::make_shared<GridFFT>(n, 2 * rank);
}

TwistedDirac::TwistedDirac(std::shared_ptr<const ConnectionForm> alpha, SpinStructure spin,
                           double compatibility_tolerance)
    : TwistedDirac(alpha ? alpha->n() : 0, alpha ? alpha->rank() : 0, spin) {
  const auto norms = alpha->max_operator_norms();
  const double scale = std::max({norms[0], norms[1], norms[2], 1e-300});
  if (alpha->anti_hermitian_defect() > compatibility_tolerance * scale) {
    throw CompatibilityError("connection form is not anti-Hermitian within tolerance (defect " +
                             std::to_string(alpha->anti_hermitian_defect()) + ")");
  }
  const auto model = clifford_generators(spin);
  const int b = 2 * rank_;
  const Complex i{0.0, 1.0};
  twist_.resize(alpha->sites() * b * b);
  for (std::size_t s = 0; s < alpha->sites(); ++s) {
    Eigen::Map<Eigen::MatrixXcd> block(twist_.data() + s * b * b, b, b);
    block.setZero();
    for (int j = 0; j < 3; ++j) {
      const Eigen::MatrixXcd a = alpha->at(j, s);
      const Eigen::MatrixXcd skew = 0.5 * (a - a.adjoint());
      const Mat2& g = model.gamma[static_cast<std::size_t>(j)];
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) {
          block.block(p * rank_, q * rank_, rank_, rank_) += -i * g(p, q) * skew;
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block, Eigen::EigenvaluesOnly);
    twist_norm_ = std::max(twist_norm_, es.eigenvalues().cwiseAbs().maxCoeff());
  }
}

void TwistedDirac::apply_untwisted(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const {
  if (in.rows() != dim_) throw ShapeError("apply: vector length does not match operator");
  const FrequencyLattice lattice = frequency_lattice(n_, spin_);
  out = in;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    auto data = column_span(out, j);
    fft_->forward(data);
    multiply_symbol(lattice, rank_, data);
    fft_->inverse(data);
  }
}

void TwistedDirac::apply_twist(const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) const {
  if (in.rows() != dim_) throw ShapeError("apply: vector length does not match operator");
  out.setZero(in.rows(), in.cols());
  if (twist_.empty()) return;
  const int b = 2 * rank_;
  const std::size_t sites = static_cast<std::size_t>(n_) * n_ * n_;
  for (Eigen::Index j = 0; j < in.cols(); ++j) {
    for (std::size_t s = 0; s < sites; ++s) {
      Eigen::Map<const Eigen::MatrixXcd> block(twist_.data() + s * b * b, b, b);
      out.col(j).segment(static_cast<Eigen::Index>(s) * b, b).noalias() =
          block * in.col(j).segment(static_cast<Eigen::Index>(s) * b, b);
    }
  }
}

Eigen::MatrixXcd TwistedDirac::dense_untwisted() const {
  const FrequencyLattice lattice = frequency_lattice(n_, spin_);
  const auto model = clifford_generators(spin_);
  // 1-D kernel of -i d/dx + pi delta on each axis: K[b][a] = (1/n) sum_m 2 pi xi(m) e^{2 pi i m (b - a) / n}.
  std::array<Eigen::MatrixXcd, 3> kernel;
  for (int axis = 0; axis < 3; ++axis) {
    auto& k = kernel[static_cast<std::size_t>(axis)];
    k.resize(n_, n_);
    for (int b = 0; b < n_; ++b) {
      for (int a = 0; a < n_; ++a) {
        Complex sum{};
        for (int m = 0; m < n_; ++m) {
          sum += kTwoPi * lattice.frequency(axis, m) *
                 std::polar(1.0, kTwoPi * m * (b - a) / static_cast<double>(n_));
        }
        k(b, a) = sum / static_cast<double>(n_);
      }
    }
  }
  const TorusGrid grid{n_};
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(dim_, dim_);
  for (int i0 = 0; i0 < n_; ++i0) {
    for (int i1 = 0; i1 < n_; ++i1) {
      for (int i2 = 0; i2 < n_; ++i2) {
        const std::size_t row_site = grid.site(i0, i1, i2);
        const int coord[3] = {i0, i1, i2};
        for (int axis = 0; axis < 3; ++axis) {
          const Mat2& g = model.gamma[static_cast<std::size_t>(axis)];
          for (int a = 0; a < n_; ++a) {
            int other[3] = {i0, i1, i2};
            other[axis] = a;
            const std::size_t col_site = grid.site(other[0], other[1], other[2]);
            const Complex kv = kernel[static_cast<std::size_t>(axis)](coord[axis], a);
            for (int p = 0; p < 2; ++p) {
              for (int q = 0; q < 2; ++q) {
                if (g(p, q) == Complex{}) continue;
                for (int c = 0; c < rank_; ++c) {
                  d(static_cast<Eigen::Index>((row_site * 2 + p) * rank_ + c),
                    static_cast<Eigen::Index>((col_site * 2 + q) * rank_ + c)) += kv * g(p, q);
                }
              }
            }
          }
        }
      }
    }
  }
  return d;
}

Eigen::MatrixXcd TwistedDirac::dense_twist() const {
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(dim_, dim_);
  if (twist_.empty()) return x;
  const int b = 2 * rank_;
  const std::size_t sites = static_cast<std::size_t>(n_) * n_ * n_;
  for (std::size_t s = 0; s < sites; ++s) {
    x.block(static_cast<Eigen::Index>(s) * b, static_cast<Eigen::Index>(s) * b, b, b) =
        twist_block(s);
  }
  return x;
}

Eigen::MatrixXcd TwistedDirac::twist_block(std::size_t site) const {
  const int b = 2 * rank_;
  if (twist_.empty()) return Eigen::MatrixXcd::Zero(b, b);
  return Eigen::Map<const Eigen::MatrixXcd>(twist_.data() + site * b * b, b, b);
}

double TwistedDirac::untwisted_norm() const {
  const FrequencyLattice lattice = frequency_lattice(n_, spin_);
  double sq = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    double m = 0.0;
    for (double f : lattice.frequencies[static_cast<std::size_t>(axis)]) m = std::max(m, std::abs(f));
    sq += m * m;
  }
  return kTwoPi * std::sqrt(sq);
}

HermitianOperator TwistedDirac::untwisted(Representation rep) const {
  if (rep == Representation::dense) {
    return HermitianOperator::dense(dense_untwisted(), untwisted_norm());
  }
  auto self = std::make_shared<TwistedDirac>(*this);
  return HermitianOperator::matrix_free(
      dim_, [self](const auto& in, auto& out) { self->apply_untwisted(in, out); },
      untwisted_norm());
}

HermitianOperator TwistedDirac::twist(Representation rep) const {
  if (rep == Representation::dense) {
    return HermitianOperator::dense(dense_twist(), twist_norm_);
  }
  auto self = std::make_shared<TwistedDirac>(*this);
  return HermitianOperator::matrix_free(
      dim_, [self](const auto& in, auto& out) { self->apply_twist(in, out); }, twist_norm_);
}

HermitianOperator TwistedDirac::at(double t, Representation rep) const {
  if (rep == Representation::dense) {
    return HermitianOperator::dense(dense_untwisted() + t * dense_twist(),
                                    untwisted_norm() + std::abs(t) * twist_norm_);
  }
  auto self = std::make_shared<TwistedDirac>(*this);
  return HermitianOperator::matrix_free(
      dim_,
      [self, t](const Eigen::MatrixXcd& in, Eigen::MatrixXcd& out) {
        Eigen::MatrixXcd tw;
        self->apply_untwisted(in, out);
        self->apply_twist(in, tw);
        out += t * tw;
      },
      untwisted_norm() + std::abs(t) * twist_norm_);
}

HermitianOperator assemble(std::shared_ptr<const ConnectionForm> alpha, double t,
                           SpinStructure spin, int rank, Representation rep) {
  if (!alpha) throw ShapeError("assemble: missing connection form");
  if (alpha->rank() != rank) {
    throw ShapeError("assemble: connection rank " + std::to_string(alpha->rank()) +
                     " does not match requested rank " + std::to_string(rank));
  }
  return TwistedDirac(std::move(alpha), spin).at(t, rep);
}

std::vector<double> untwisted_spectrum(int n, SpinStructure spin, int rank) {
  const FrequencyLattice lattice = frequency_lattice(n, spin);
  std::vector<double> out;
  out.reserve(lattice.size() * 2 * rank);
  for (double f0 : lattice.frequencies[0]) {
    for (double f1 : lattice.frequencies[1]) {
      for (double f2 : lattice.frequencies[2]) {
        const double l = kTwoPi * std::sqrt(f0 * f0 + f1 * f1 + f2 * f2);
        for (int c = 0; c < rank; ++c) {
          out.push_back(l);
          out.push_back(-l);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double conjugation_residual(int k, int n, int rank, const CollapseProfile& profile,
                            SpinStructure spin, const ConjugationOptions& options) {
  const UnitaryField field = gauge_field(k, n, rank, profile);
  const auto alpha = std::make_shared<const ConnectionForm>(maurer_cartan(field));
  const TwistedDirac family(alpha, spin);
  const FrequencyLattice lattice = frequency_lattice(n, spin);
  const GridFFT fft(n, 2 * rank);
  const Eigen::Index dim = family.dim();
  const int r = rank;

  auto project = [&](Eigen::VectorXcd& v) {
    std::span<Complex> data(v.data(), static_cast<std::size_t>(dim));
    fft.forward(data);
    std::size_t idx = 0;
    for (int m0 = 0; m0 < n; ++m0) {
      for (int m1 = 0; m1 < n; ++m1) {
        for (int m2 = 0; m2 < n; ++m2) {
          const bool keep = std::abs(lattice.frequency(0, m0)) <= options.cutoff &&
                            std::abs(lattice.frequency(1, m1)) <= options.cutoff &&
                            std::abs(lattice.frequency(2, m2)) <= options.cutoff;
          for (int c = 0; c < 2 * r; ++c, ++idx) {
            if (!keep) data[idx] = 0.0;
          }
        }
      }
    }
    fft.inverse(data);
  };
  // (G v)(x) = F(x) v(x) on the colour index; adjoint applies F(x)^*.
  auto gauge = [&](const Eigen::VectorXcd& v, bool adjoint) {
    Eigen::VectorXcd out(dim);
    for (std::size_t s = 0; s < field.sites(); ++s) {
      const auto f = field.at(s);
      for (int p = 0; p < 2; ++p) {
        const Eigen::Index off = static_cast<Eigen::Index>((s * 2 + p) * r);
        if (adjoint) {
          out.segment(off, r).noalias() = f.adjoint() * v.segment(off, r);
        } else {
          out.segment(off, r).noalias() = f * v.segment(off, r);
        }
      }
    }
    return out;
  };
  auto delta = [&](const Eigen::VectorXcd& v) {
    Eigen::MatrixXcd dv;
    Eigen::MatrixXcd xv;
    Eigen::MatrixXcd dfv;
    family.apply_untwisted(v, dv);
    family.apply_twist(v, xv);
    family.apply_untwisted(gauge(v, false), dfv);
    return Eigen::VectorXcd(dv.col(0) + xv.col(0) - gauge(dfv.col(0), true));
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss;
  Eigen::VectorXcd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = {gauss(rng), gauss(rng)};
  project(v);
  double estimate = 0.0;
  for (int it = 0; it < options.iterations; ++it) {
    const double vn = v.norm();
    if (vn == 0.0) return 0.0;
    v /= vn;
    Eigen::VectorXcd u = delta(v);
    estimate = u.norm();
    if (estimate <= 1e-300) return 0.0;
    // Delta is Hermitian, so P Delta Delta P is the normal operator of Delta P.
    v = delta(u);
    project(v);
  }
  return estimate;
}

}  // namespace sflab

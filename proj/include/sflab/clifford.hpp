#pragma once

// Flat 3-torus R^3/Z^3, spin structures and the Clifford conventions used by
// every operator in the library.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sflab/grid.hpp"

namespace sflab {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec3 = Eigen::Vector3d;

/// Spin structure class on T^3: delta_j = 1 marks an antiperiodic axis.
class SpinStructure {
 public:
  constexpr SpinStructure() = default;
  explicit SpinStructure(std::array<int, 3> delta);

  const std::array<int, 3>& delta() const { return delta_; }
  int operator[](int axis) const { return delta_[static_cast<std::size_t>(axis)]; }
  bool trivial() const { return delta_ == std::array<int, 3>{0, 0, 0}; }
  std::string to_string() const;

  friend bool operator==(const SpinStructure&, const SpinStructure&) = default;

 private:
  std::array<int, 3> delta_{1, 1, 1};
};

struct CliffordModel {
  std::array<Mat2, 3> gamma;
  SpinStructure spin;
  static constexpr double torus_period = 1.0;
};

/// Pauli generators gamma_j = sigma_j, so gamma_1 gamma_2 = i gamma_3.
CliffordModel clifford_generators(SpinStructure spin = {});

struct FrequencyLattice {
  int grid_size = 0;
  SpinStructure spin;
  /// Shifted wave numbers kappa + delta/2 per axis, indexed by FFT storage index.
  std::array<std::vector<double>, 3> frequencies;

  double frequency(int axis, int fft_index) const {
    return frequencies[static_cast<std::size_t>(axis)][static_cast<std::size_t>(fft_index)];
  }
  std::size_t size() const {
    return static_cast<std::size_t>(grid_size) * grid_size * grid_size;
  }
  /// Human-readable band convention, embedded in result metadata.
  std::string band_convention() const;
};

FrequencyLattice frequency_lattice(int n_g, SpinStructure spin);

/// Principal symbol sum_j gamma_j (2 pi xi_j); eigenvalues are +-2 pi |xi|.
Mat2 dirac_symbol(const Vec3& xi);

/// Tag describing every sign/orientation convention, stored in all outputs.
std::string convention_tag();

}  // namespace sflab

#include "sflab/clifford.hpp"

#include <numbers>
#include <sstream>

#include "sflab/error.hpp"

namespace sflab {

SpinStructure::SpinStructure(std::array<int, 3> delta) : delta_(delta) {
  for (int d : delta_) {
    if (d != 0 && d != 1) {
      throw DomainError("spin structure entries must be 0 or 1");
    }
  }
}

std::string SpinStructure::to_string() const {
  std::ostringstream os;
  os << delta_[0] << ',' << delta_[1] << ',' << delta_[2];
  return os.str();
}

CliffordModel clifford_generators(SpinStructure spin) {
  const Complex i{0.0, 1.0};
  CliffordModel model;
  model.gamma[0] << 0, 1, 1, 0;
  model.gamma[1] << 0, -i, i, 0;
  model.gamma[2] << 1, 0, 0, -1;
  model.spin = spin;
  return model;
}

FrequencyLattice frequency_lattice(int n_g, SpinStructure spin) {
  if (n_g < 2) {
    throw InvalidGridError("grid size must be at least 2, got " + std::to_string(n_g));
  }
  FrequencyLattice lattice;
  lattice.grid_size = n_g;
  lattice.spin = spin;
  for (int axis = 0; axis < 3; ++axis) {
    auto& f = lattice.frequencies[static_cast<std::size_t>(axis)];
    f.resize(static_cast<std::size_t>(n_g));
    for (int m = 0; m < n_g; ++m) {
      f[static_cast<std::size_t>(m)] = band_index(m, n_g) + 0.5 * spin[axis];
    }
  }
  return lattice;
}

std::string FrequencyLattice::band_convention() const {
  std::ostringstream os;
  if (grid_size % 2 == 0) {
    os << "kappa in [" << -grid_size / 2 << ", " << grid_size / 2 - 1 << "]";
  } else {
    os << "kappa in [" << -(grid_size - 1) / 2 << ", " << (grid_size - 1) / 2 << "] (odd grid)";
  }
  os << ", shifted by delta/2 = (" << spin.to_string() << ")/2";
  return os.str();
}

Mat2 dirac_symbol(const Vec3& xi) {
  static const CliffordModel model = clifford_generators();
  Mat2 s = Mat2::Zero();
  for (int j = 0; j < 3; ++j) {
    s += model.gamma[static_cast<std::size_t>(j)] * (2.0 * std::numbers::pi * xi[j]);
  }
  return s;
}

std::string convention_tag() {
  return "gamma=pauli;su2=w+i(x,y,z).sigma;degree=det[d1f,d2f,d3f,f];winding=-cs;v1";
}

}  // namespace sflab

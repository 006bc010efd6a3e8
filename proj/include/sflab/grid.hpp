#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace sflab {

/// Map from an FFT storage index m in [0, n) to the integer wave number of
/// the symmetric band (-n/2 .. n/2-1 for even n, -(n-1)/2 .. (n-1)/2 for odd n).
inline int band_index(int m, int n) { return m <= (n - 1) / 2 ? m : m - n; }

/// Uniform sampling of the unit torus [0,1)^3.
struct TorusGrid {
  int n = 0;

  std::size_t sites() const { return static_cast<std::size_t>(n) * n * n; }
  std::size_t site(int i0, int i1, int i2) const {
    return (static_cast<std::size_t>(i0) * n + i1) * n + i2;
  }
  Eigen::Vector3d point(std::size_t s) const {
    const auto nn = static_cast<std::size_t>(n);
    const double h = 1.0 / n;
    return {static_cast<double>(s / (nn * nn)) * h, static_cast<double>((s / nn) % nn) * h,
            static_cast<double>(s % nn) * h};
  }
};

}  // namespace sflab

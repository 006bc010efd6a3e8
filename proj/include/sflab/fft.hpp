#pragma once

// Batched in-place 3-D FFTs on the periodic n^3 grid. Data layout everywhere
// in the library is site-major with interleaved components:
//   data[site * components + c],  site = (i0 * n + i1) * n + i2,
// where i0 indexes the x1 axis.

#include <array>
#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace sflab {

using Complex = std::complex<double>;

class GridFFT {
 public:
  GridFFT(int n, int components);
  ~GridFFT();
  GridFFT(const GridFFT&) = delete;
  GridFFT& operator=(const GridFFT&) = delete;
  GridFFT(GridFFT&&) noexcept;
  GridFFT& operator=(GridFFT&&) noexcept;

  int n() const { return n_; }
  int components() const { return components_; }
  std::size_t size() const;

  void forward(std::span<Complex> data) const;
  /// Inverse transform including the 1/n^3 normalisation.
  void inverse(std::span<Complex> data) const;

 private:
  struct Plans;
  int n_;
  int components_;
  std::unique_ptr<Plans> plans_;
};

/// Spectral derivative d/dx_axis of periodic data with the Nyquist mode
/// zeroed on even grids, so real data stays real and the operator is skew.
void spectral_derivative(const GridFFT& fft, std::span<const Complex> in, int axis,
                         std::span<Complex> out);

/// All three spectral partial derivatives from a single forward transform.
std::array<std::vector<Complex>, 3> spectral_gradient(const GridFFT& fft,
                                                      std::span<const Complex> in);

}  // namespace sflab

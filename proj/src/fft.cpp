#include "sflab/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>
#include <vector>

#include "sflab/error.hpp"
#include "sflab/grid.hpp"

namespace sflab {

namespace {
// The FFTW planner is not re-entrant; execution of existing plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct GridFFT::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

GridFFT::GridFFT(int n, int components) : n_(n), components_(components) {
  if (n < 1 || components < 1) {
    throw ShapeError("GridFFT needs positive grid size and component count");
  }
  plans_ = std::make_unique<Plans>();
  const int dims[3] = {n, n, n};
  std::vector<Complex> scratch(size());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  // FFTW_ESTIMATE keeps the algorithm choice, and hence the rounding, fixed across runs.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  plans_->forward = fftw_plan_many_dft(3, dims, components, buf, nullptr, components, 1, buf,
                                       nullptr, components, 1, FFTW_FORWARD, flags);
  plans_->inverse = fftw_plan_many_dft(3, dims, components, buf, nullptr, components, 1, buf,
                                       nullptr, components, 1, FFTW_BACKWARD, flags);
  if (!plans_->forward || !plans_->inverse) {
    throw Error("FFTW plan creation failed");
  }
}

GridFFT::~GridFFT() = default;
GridFFT::GridFFT(GridFFT&&) noexcept = default;
GridFFT& GridFFT::operator=(GridFFT&&) noexcept = default;

std::size_t GridFFT::size() const {
  return static_cast<std::size_t>(n_) * n_ * n_ * components_;
}

void GridFFT::forward(std::span<Complex> data) const {
  if (data.size() != size()) throw ShapeError("GridFFT::forward: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->forward, p, p);
}

void GridFFT::inverse(std::span<Complex> data) const {
  if (data.size() != size()) throw ShapeError("GridFFT::inverse: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_->inverse, p, p);
  const double scale = 1.0 / (static_cast<double>(n_) * n_ * n_);
  for (auto& z : data) z *= scale;
}

namespace {

// Multiplies spectral data by 2 pi i kappa_axis (Nyquist zeroed) in place.
void multiply_wave_number(const GridFFT& fft, int axis, std::span<Complex> out) {
  const int n = fft.n();
  const int nc = fft.components();
  const double two_pi = 2.0 * std::numbers::pi;
  std::size_t idx = 0;
  for (int i0 = 0; i0 < n; ++i0) {
    for (int i1 = 0; i1 < n; ++i1) {
      for (int i2 = 0; i2 < n; ++i2) {
        const int m = axis == 0 ? i0 : (axis == 1 ? i1 : i2);
        const bool nyquist = (n % 2 == 0) && (m == n / 2);
        const Complex factor = nyquist ? Complex{} : Complex{0.0, two_pi * band_index(m, n)};
        for (int c = 0; c < nc; ++c, ++idx) out[idx] *= factor;
      }
    }
  }
}

}  // namespace

void spectral_derivative(const GridFFT& fft, std::span<const Complex> in, int axis,
                         std::span<Complex> out) {
  if (in.size() != fft.size() || out.size() != fft.size()) {
    throw ShapeError("spectral_derivative: size mismatch");
  }
  if (axis < 0 || axis > 2) throw ShapeError("spectral_derivative: axis must be 0, 1 or 2");
  std::copy(in.begin(), in.end(), out.begin());
  fft.forward(out);
  multiply_wave_number(fft, axis, out);
  fft.inverse(out);
}

std::array<std::vector<Complex>, 3> spectral_gradient(const GridFFT& fft,
                                                      std::span<const Complex> in) {
  if (in.size() != fft.size()) throw ShapeError("spectral_gradient: size mismatch");
  std::vector<Complex> hat(in.begin(), in.end());
  fft.forward(hat);
  std::array<std::vector<Complex>, 3> grad;
  for (int axis = 0; axis < 3; ++axis) {
    auto& g = grad[static_cast<std::size_t>(axis)];
    g = hat;
    multiply_wave_number(fft, axis, g);
    fft.inverse(g);
  }
  return grad;
}

}  // namespace sflab

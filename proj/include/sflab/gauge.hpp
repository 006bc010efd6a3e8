#pragma once

// Degree-k maps T^3 -> S^3, the SU(2) generator, gauge fields F_k and their
// Maurer-Cartan forms, plus the two topological oracles computed from them:
// the degree integral and the Chern-Simons winding / mapping-torus index.

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "sflab/grid.hpp"

namespace sflab {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

/// Radial profile chi(s) = pi * psi(s / radius) of the collapse map, where
///   psi(u) = int_0^u phi / int_0^1 phi,   phi(v) = exp(-a v^2 / (1 - v^2)),
/// and a is the steepness. psi is odd, C^infinity, and flat at u = 1.
class CollapseProfile {
 public:
  CollapseProfile() : CollapseProfile(0.45, 0.25) {}
  CollapseProfile(double radius, double steepness);

  double radius() const { return radius_; }
  double steepness() const { return steepness_; }

  double operator()(double s) const;
  /// chi'(s) in closed form.
  double derivative(double s) const;

 private:
  double mollifier(double v) const;
  double radius_;
  double steepness_;
  double norm_;  // int_0^1 phi
};

/// Collapse of the ball of the given radius around c = (1/2,1/2,1/2) onto S^3:
/// (sin chi(s) (x-c)/s, cos chi(s)), constant (0,0,0,-1) outside the ball.
Vec4 collapse_map(const Vec3& x, const CollapseProfile& profile);

/// Unit quaternion q = (w, x, y, z) raised to an integer power.
Vec4 quaternion_power(const Vec4& q, int k);

/// SU(2) image of a unit quaternion, w I + i (x s1 + y s2 + z s3), padded
/// with the identity to rank N. Order-reversing: embed(p q) = embed(q) embed(p),
/// so embed(q^k) = embed(q)^k.
Eigen::MatrixXcd su2_embed(const Vec4& q, int rank);

/// Samples of a map T^3 -> S^3 on the uniform grid.
struct SphereField {
  TorusGrid grid;
  std::vector<Vec4> values;
};

/// f_k = p_k o f_1 with p_k(q) = q^k, sampled on n^3 points.
SphereField sphere_map(int k, int n, const CollapseProfile& profile);

/// Map T^3 -> U(N); one column-major N x N block per site.
class UnitaryField {
 public:
  /// Validates unitarity of every sample within `tolerance`.
  UnitaryField(int n, int rank, std::vector<Complex> values, double tolerance = 1e-12);

  int n() const { return grid_.n; }
  int rank() const { return rank_; }
  const TorusGrid& grid() const { return grid_; }
  std::size_t sites() const { return grid_.sites(); }
  const std::vector<Complex>& data() const { return values_; }

  Eigen::Map<const Eigen::MatrixXcd> at(std::size_t site) const {
    return {values_.data() + site * rank_ * rank_, rank_, rank_};
  }

  /// max over sites of ||U* U - I||_max.
  double unitarity_defect() const;

 private:
  TorusGrid grid_;
  int rank_;
  std::vector<Complex> values_;
};

/// u(N)-valued 1-form alpha = (alpha_1, alpha_2, alpha_3) on the grid.
class ConnectionForm {
 public:
  ConnectionForm(int n, int rank, std::array<std::vector<Complex>, 3> components);

  /// The trivial connection d (alpha = 0).
  static ConnectionForm zero(int n, int rank);

  int n() const { return grid_.n; }
  int rank() const { return rank_; }
  const TorusGrid& grid() const { return grid_; }
  std::size_t sites() const { return grid_.sites(); }
  const std::vector<Complex>& component(int j) const {
    return components_[static_cast<std::size_t>(j)];
  }
  Eigen::Map<const Eigen::MatrixXcd> at(int j, std::size_t site) const {
    return {component(j).data() + site * rank_ * rank_, rank_, rank_};
  }

  /// max over components and sites of ||alpha + alpha*||_max.
  double anti_hermitian_defect() const { return defect_; }
  /// max over sites of ||alpha_j(x)||_op for each j.
  std::array<double, 3> max_operator_norms() const;

 private:
  TorusGrid grid_;
  int rank_;
  std::array<std::vector<Complex>, 3> components_;
  double defect_ = 0.0;
};

/// F_k = su2_embed o quaternion_power(., k) o collapse_map on n^3 points.
UnitaryField gauge_field(int k, int n, int rank, const CollapseProfile& profile);

/// alpha_j = F^{-1} d_j F with spectral derivatives.
ConnectionForm maurer_cartan(const UnitaryField& field);

/// (1 / 2 pi^2) * mean over the grid of the pulled-back volume form, oriented
/// so that the collapse map has degree +1.
double degree(const SphereField& f);

/// Chern-Simons winding (1 / 24 pi^2) int eps^{ijk} tr(a_i a_j a_k), sign
/// calibrated so that gauge_field(1, ...) has winding +1.
double winding_number(const UnitaryField& field);

/// Index of -d/dt + D_t on the mapping torus T^3 x S^1: the Chern-Weil integral
/// of ch_2 for the path connection t * alpha, with the t-integral done in
/// closed form and the curvature built from spectral d(alpha). Agrees with
/// winding_number up to discretisation error.
double mapping_torus_index(const UnitaryField& field);

}  // namespace sflab

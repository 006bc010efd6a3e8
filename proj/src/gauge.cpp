#include "sflab/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sflab/error.hpp"
#include "sflab/fft.hpp"
#include "sflab/numerics.hpp"

namespace sflab {

namespace {

constexpr double kPi = std::numbers::pi;

// Orientation calibration, fixed once so that the k = 1 constructions give +1
// for all three integers (degree, winding, spectral flow).
constexpr double kDegreeOrientation = -1.0;  // det[f, d1f, d2f, d3f] -> det[d1f, d2f, d3f, f]
constexpr double kWindingSign = -1.0;
constexpr double kIndexSign = -kWindingSign;

constexpr double kUnitTolerance = 1e-12;

void require_unit(const Vec4& q, const char* what) {
  if (std::abs(q.norm() - 1.0) > kUnitTolerance) {
    throw DomainError(std::string(what) + ": quaternion is not of unit norm");
  }
}

Eigen::MatrixXcd commutator(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return a * b - b * a;
}

}  // namespace

// --- CollapseProfile -------------------------------------------------------

CollapseProfile::CollapseProfile(double radius, double steepness)
    : radius_(radius), steepness_(steepness), norm_(0.0) {
  if (!(radius > 0.0 && radius <= 0.5)) {
    throw DomainError("collapse radius must lie in (0, 1/2]");
  }
  if (!(steepness > 0.0)) throw DomainError("profile steepness must be positive");
  norm_ = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [this](double v) { return mollifier(v); }, 0.0, 1.0, 6, 1e-12);
}

double CollapseProfile::mollifier(double v) const {
  if (v >= 1.0) return 0.0;
  return std::exp(-steepness_ * v * v / (1.0 - v * v));
}

double CollapseProfile::operator()(double s) const {
  const double u = s / radius_;
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return kPi;
  const double part = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [this](double v) { return mollifier(v); }, 0.0, u, 6, 1e-12);
  return kPi * std::min(1.0, part / norm_);
}

double CollapseProfile::derivative(double s) const {
  const double u = s / radius_;
  if (u >= 1.0 || u < 0.0) return 0.0;
  return kPi * mollifier(u) / (norm_ * radius_);
}

// --- maps --------------------------------------------------------------------

Vec4 collapse_map(const Vec3& x, const CollapseProfile& profile) {
  const Vec3 d = x - Vec3::Constant(0.5);
  const double s = d.norm();
  if (s == 0.0) return {0.0, 0.0, 0.0, 1.0};
  if (s >= profile.radius()) return {0.0, 0.0, 0.0, -1.0};
  const double chi = profile(s);
  Vec4 out;
  out.head<3>() = std::sin(chi) * d / s;
  out[3] = std::cos(chi);
  return out;
}

Vec4 quaternion_power(const Vec4& q, int k) {
  require_unit(q, "quaternion_power");
  if (k == 0) return {1.0, 0.0, 0.0, 0.0};
  const double w = q[0];
  const Eigen::Vector3d v = q.tail<3>();
  const double vn = v.norm();
  const double theta = std::atan2(vn, w);
  Vec4 out;
  out[0] = std::cos(k * theta);
  if (vn == 0.0) {
    out.tail<3>().setZero();
  } else {
    out.tail<3>() = std::sin(k * theta) * v / vn;
  }
  return out;
}

Eigen::MatrixXcd su2_embed(const Vec4& q, int rank) {
  if (rank < 2) throw RankError("su2_embed needs rank N >= 2");
  require_unit(q, "su2_embed");
  const Complex i{0.0, 1.0};
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(rank, rank);
  // w I + i (x s1 + y s2 + z s3)
  u(0, 0) = q[0] + i * q[3];
  u(0, 1) = i * q[1] + q[2];
  u(1, 0) = i * q[1] - q[2];
  u(1, 1) = q[0] - i * q[3];
  return u;
}

SphereField sphere_map(int k, int n, const CollapseProfile& profile) {
  if (n < 2) throw InvalidGridError("sphere_map: grid size must be at least 2");
  SphereField f{TorusGrid{n}, {}};
  f.values.resize(f.grid.sites());
  for (std::size_t s = 0; s < f.grid.sites(); ++s) {
    f.values[s] = quaternion_power(collapse_map(f.grid.point(s), profile), k);
  }
  return f;
}

// --- UnitaryField / ConnectionForm --------------------------------------------

UnitaryField::UnitaryField(int n, int rank, std::vector<Complex> values, double tolerance)
    : grid_{n}, rank_(rank), values_(std::move(values)) {
  if (n < 2) throw InvalidGridError("UnitaryField: grid size must be at least 2");
  if (rank < 1) throw RankError("UnitaryField: rank must be positive");
  if (values_.size() != grid_.sites() * rank_ * rank_) {
    throw ShapeError("UnitaryField: value count does not match n^3 * N^2");
  }
  const double defect = unitarity_defect();
  if (!(defect <= tolerance)) {
    throw DomainError("UnitaryField: sample not unitary (defect " + std::to_string(defect) + ")");
  }
}

double UnitaryField::unitarity_defect() const {
  double worst = 0.0;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(rank_, rank_);
  for (std::size_t s = 0; s < sites(); ++s) {
    const auto u = at(s);
    worst = std::max(worst, (u.adjoint() * u - id).cwiseAbs().maxCoeff());
  }
  return worst;
}

ConnectionForm::ConnectionForm(int n, int rank, std::array<std::vector<Complex>, 3> components)
    : grid_{n}, rank_(rank), components_(std::move(components)) {
  if (n < 2) throw InvalidGridError("ConnectionForm: grid size must be at least 2");
  if (rank < 1) throw RankError("ConnectionForm: rank must be positive");
  for (const auto& c : components_) {
    if (c.size() != grid_.sites() * rank_ * rank_) {
      throw ShapeError("ConnectionForm: component size does not match n^3 * N^2");
    }
  }
  for (int j = 0; j < 3; ++j) {
    for (std::size_t s = 0; s < sites(); ++s) {
      const auto a = at(j, s);
      defect_ = std::max(defect_, (a + a.adjoint()).cwiseAbs().maxCoeff());
    }
  }
}

ConnectionForm ConnectionForm::zero(int n, int rank) {
  const std::size_t count = static_cast<std::size_t>(n) * n * n * rank * rank;
  return ConnectionForm(n, rank, {std::vector<Complex>(count), std::vector<Complex>(count),
                                  std::vector<Complex>(count)});
}

std::array<double, 3> ConnectionForm::max_operator_norms() const {
  std::array<double, 3> norms{0.0, 0.0, 0.0};
  for (int j = 0; j < 3; ++j) {
    for (std::size_t s = 0; s < sites(); ++s) {
      const Eigen::MatrixXcd a = at(j, s);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
      norms[static_cast<std::size_t>(j)] =
          std::max(norms[static_cast<std::size_t>(j)], svd.singularValues()(0));
    }
  }
  return norms;
}

UnitaryField gauge_field(int k, int n, int rank, const CollapseProfile& profile) {
  if (n < 2) throw InvalidGridError("gauge_field: grid size must be at least 2");
  if (rank < 2) throw RankError("gauge_field: rank N must be at least 2");
  const TorusGrid grid{n};
  std::vector<Complex> values(grid.sites() * rank * rank);
  for (std::size_t s = 0; s < grid.sites(); ++s) {
    const Eigen::MatrixXcd u =
        su2_embed(quaternion_power(collapse_map(grid.point(s), profile), k), rank);
    std::copy(u.data(), u.data() + rank * rank, values.begin() + s * rank * rank);
  }
  return UnitaryField(n, rank, std::move(values));
}

ConnectionForm maurer_cartan(const UnitaryField& field) {
  const int n = field.n();
  const int r = field.rank();
  const GridFFT fft(n, r * r);
  auto grad = spectral_gradient(fft, field.data());
  std::array<std::vector<Complex>, 3> alpha;
  for (int j = 0; j < 3; ++j) {
    auto& a = alpha[static_cast<std::size_t>(j)];
    a.resize(field.data().size());
    const auto& dj = grad[static_cast<std::size_t>(j)];
    for (std::size_t s = 0; s < field.sites(); ++s) {
      Eigen::Map<const Eigen::MatrixXcd> df(dj.data() + s * r * r, r, r);
      Eigen::Map<Eigen::MatrixXcd> out(a.data() + s * r * r, r, r);
      out.noalias() = field.at(s).adjoint() * df;
    }
  }
  return ConnectionForm(n, r, std::move(alpha));
}

// --- topological integrals -------------------------------------------------------

double degree(const SphereField& f) {
  const int n = f.grid.n;
  if (f.values.size() != f.grid.sites()) throw ShapeError("degree: sample count mismatch");
  std::vector<Complex> packed(f.values.size() * 4);
  for (std::size_t s = 0; s < f.values.size(); ++s) {
    if (std::abs(f.values[s].norm() - 1.0) > 1e-10) {
      throw DomainError("degree: samples must lie on the unit sphere");
    }
    for (int c = 0; c < 4; ++c) packed[s * 4 + c] = f.values[s][c];
  }
  const GridFFT fft(n, 4);
  const auto grad = spectral_gradient(fft, packed);
  CompensatedSum sum;
  Eigen::Matrix4d m;
  for (std::size_t s = 0; s < f.values.size(); ++s) {
    m.col(0) = f.values[s];
    for (int j = 0; j < 3; ++j) {
      for (int c = 0; c < 4; ++c) m(c, j + 1) = grad[static_cast<std::size_t>(j)][s * 4 + c].real();
    }
    sum.add(m.determinant());
  }
  return kDegreeOrientation * sum.value() / (static_cast<double>(f.values.size()) * 2.0 * kPi * kPi);
}

double winding_number(const UnitaryField& field) {
  const ConnectionForm alpha = maurer_cartan(field);
  CompensatedSum sum;
  for (std::size_t s = 0; s < field.sites(); ++s) {
    const Eigen::MatrixXcd a1 = alpha.at(0, s);
    const Eigen::MatrixXcd a2 = alpha.at(1, s);
    const Eigen::MatrixXcd a3 = alpha.at(2, s);
    // sum over eps^{ijk} tr(a_i a_j a_k) = 3 tr(a1 [a2, a3])
    sum.add(3.0 * (a1 * commutator(a2, a3)).trace().real());
  }
  return kWindingSign * sum.value() /
         (static_cast<double>(field.sites()) * 24.0 * kPi * kPi);
}

double mapping_torus_index(const UnitaryField& field) {
  const int n = field.n();
  const int r = field.rank();
  const ConnectionForm alpha = maurer_cartan(field);
  const GridFFT fft(n, r * r);
  // d_i alpha_j for all i, j
  std::array<std::array<std::vector<Complex>, 3>, 3> dalpha;
  for (int j = 0; j < 3; ++j) {
    auto g = spectral_gradient(fft, alpha.component(j));
    for (int i = 0; i < 3; ++i) {
      dalpha[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          std::move(g[static_cast<std::size_t>(i)]);
    }
  }
  auto d = [&](int i, int j, std::size_t s) {
    return Eigen::Map<const Eigen::MatrixXcd>(
        dalpha[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].data() + s * r * r, r, r);
  };
  constexpr int cyc[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
  CompensatedSum sum;
  for (std::size_t s = 0; s < field.sites(); ++s) {
    // Curvature of t*alpha on T^3 x [0,1]: F = dt ^ alpha + t d(alpha) + t^2 alpha ^ alpha.
    // tr(F ^ F) = 2 (t A + t^2 B) dt d^3x, integrated over t in closed form: A + 2B/3.
    double a_term = 0.0;
    double b_term = 0.0;
    for (const auto& c : cyc) {
      const Eigen::MatrixXcd ai = alpha.at(c[0], s);
      const Eigen::MatrixXcd aj = alpha.at(c[1], s);
      const Eigen::MatrixXcd al = alpha.at(c[2], s);
      const Eigen::MatrixXcd curl = d(c[1], c[2], s) - d(c[2], c[1], s);
      a_term += (ai * curl).trace().real();
      b_term += (ai * commutator(aj, al)).trace().real();
    }
    sum.add(a_term + 2.0 * b_term / 3.0);
  }
  // c_2 = (1 / 8 pi^2) int tr(F ^ F); index = int ch_2 in the calibrated orientation.
  return kIndexSign * sum.value() / (static_cast<double>(field.sites()) * 8.0 * kPi * kPi);
}

}  // namespace sflab

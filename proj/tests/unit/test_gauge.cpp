#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sflab/error.hpp"
#include "sflab/gauge.hpp"

using namespace sflab;

namespace {

const CollapseProfile kProfile{};

UnitaryField diagonal_phase_field(int n) {
  const TorusGrid grid{n};
  std::vector<Complex> v(grid.sites() * 4, Complex(0, 0));
  for (std::size_t s = 0; s < grid.sites(); ++s) {
    const double x1 = grid.point(s)(0);
    v[s * 4 + 0] = std::polar(1.0, 2 * std::numbers::pi * x1);
    v[s * 4 + 3] = 1.0;
  }
  return UnitaryField(n, 2, std::move(v));
}

UnitaryField left_multiply(const Eigen::MatrixXcd& u0, const UnitaryField& f) {
  std::vector<Complex> v(f.data().size());
  const int r = f.rank();
  for (std::size_t s = 0; s < f.sites(); ++s) {
    Eigen::Map<Eigen::MatrixXcd>(v.data() + s * r * r, r, r) = u0 * f.at(s);
  }
  return UnitaryField(f.n(), r, std::move(v), 1e-11);
}

UnitaryField constant_field(int n, const Eigen::MatrixXcd& u) {
  const TorusGrid grid{n};
  const auto r = u.rows();
  std::vector<Complex> v(grid.sites() * r * r);
  for (std::size_t s = 0; s < grid.sites(); ++s) {
    Eigen::Map<Eigen::MatrixXcd>(v.data() + s * r * r, r, r) = u;
  }
  return UnitaryField(n, static_cast<int>(r), std::move(v));
}

Vec4 random_unit_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vec4 q(g(rng), g(rng), g(rng), g(rng));
  return q.normalized();
}

}  // namespace

TEST_CASE("collapse profile shape") {
  const double r = kProfile.radius();
  CHECK(kProfile(0.0) == 0.0);
  CHECK(kProfile(r) == std::numbers::pi);
  CHECK(kProfile(0.49) == std::numbers::pi);
  CHECK(kProfile.derivative(0.0) > 0.0);
  double prev = -1.0;
  for (int i = 0; i <= 400; ++i) {
    const double s = r * i / 400.0;
    const double v = kProfile(s);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(kProfile.derivative(r * (1 - 1e-3)) < 1e-6);
  CHECK(kProfile.derivative(r) == 0.0);
  const double h = 1e-6;
  for (double s : {0.05, 0.2, 0.35}) {
    const double fd = (kProfile(s + h) - kProfile(s - h)) / (2 * h);
    CHECK(kProfile.derivative(s) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK_THROWS_AS(CollapseProfile(0.6, 0.25), DomainError);
  CHECK_THROWS_AS(CollapseProfile(0.0, 0.25), DomainError);
  CHECK_THROWS_AS(CollapseProfile(0.4, -1.0), DomainError);
}

TEST_CASE("collapse map") {
  const Vec3 c(0.5, 0.5, 0.5);
  CHECK((collapse_map(c, kProfile) - Vec4(0, 0, 0, 1)).norm() == 0.0);
  CHECK((collapse_map(Vec3(0, 0.3, 0.7), kProfile) - Vec4(0, 0, 0, -1)).norm() == 0.0);
  CHECK((collapse_map(Vec3(0.99, 0.5, 0.5), kProfile) - Vec4(0, 0, 0, -1)).norm() == 0.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const Vec3 x(u(rng), u(rng), u(rng));
    CHECK(std::abs(collapse_map(x, kProfile).norm() - 1.0) <= 1e-14);
  }
}

TEST_CASE("quaternion power") {
  CHECK((quaternion_power(Vec4(0, 1, 0, 0), 2) - Vec4(-1, 0, 0, 0)).norm() <= 1e-15);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Vec4 q = random_unit_quaternion(rng);
    CHECK((quaternion_power(q, 1) - q).norm() <= 1e-15);
    CHECK((quaternion_power(q, 0) - Vec4(1, 0, 0, 0)).norm() == 0.0);
    for (int k = -3; k <= 3; ++k) CHECK(std::abs(quaternion_power(q, k).norm() - 1.0) <= 1e-12);
    const Vec4 qi = quaternion_power(q, -1);
    CHECK((qi - Vec4(q(0), -q(1), -q(2), -q(3))).norm() <= 1e-14);
  }
  CHECK_THROWS_AS(quaternion_power(Vec4(1, 1, 0, 0), 2), DomainError);
}

TEST_CASE("su2 embedding") {
  CHECK((su2_embed(Vec4(1, 0, 0, 0), 3) - Eigen::MatrixXcd::Identity(3, 3)).norm() == 0.0);
  const Eigen::MatrixXcd u = su2_embed(Vec4(0, 0, 0, 1), 2);
  CHECK(std::abs(u.determinant() - Complex(1, 0)) <= 1e-15);
  CHECK((u * u + Eigen::MatrixXcd::Identity(2, 2)).norm() <= 1e-15);
  CHECK_THROWS_AS(su2_embed(Vec4(1, 0, 0, 0), 1), RankError);
  CHECK_THROWS_AS(su2_embed(Vec4(2, 0, 0, 0), 2), DomainError);

  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const Vec4 q = random_unit_quaternion(rng);
    const Eigen::MatrixXcd v = su2_embed(q, 4);
    CHECK((v.adjoint() * v - Eigen::MatrixXcd::Identity(4, 4)).norm() <= 1e-13);
    CHECK(std::abs(v.determinant() - Complex(1, 0)) <= 1e-12);
    CHECK(std::abs(v(3, 3) - Complex(1, 0)) == 0.0);
    for (int k : {-2, 2, 3}) {
      const Eigen::MatrixXcd lhs = su2_embed(quaternion_power(q, k), 2);
      Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Identity(2, 2);
      const Eigen::MatrixXcd base = k > 0 ? su2_embed(q, 2) : Eigen::MatrixXcd(su2_embed(q, 2).adjoint());
      for (int j = 0; j < std::abs(k); ++j) rhs = rhs * base;
      CHECK((lhs - rhs).norm() <= 1e-13);
    }
  }
}

TEST_CASE("gauge fields are special unitary") {
  const UnitaryField f = gauge_field(2, 8, 3, kProfile);
  CHECK(f.unitarity_defect() <= 1e-12);
  for (std::size_t s = 0; s < f.sites(); s += 7) {
    CHECK(std::abs(f.at(s).determinant() - Complex(1, 0)) <= 1e-12);
  }
  const UnitaryField c = gauge_field(0, 8, 2, kProfile);
  for (std::size_t s = 0; s < c.sites(); ++s) CHECK((c.at(s) - c.at(0)).norm() <= 1e-12);
  CHECK_THROWS_AS(gauge_field(1, 1, 2, kProfile), InvalidGridError);
  CHECK_THROWS_AS(gauge_field(1, 8, 1, kProfile), RankError);
  std::vector<Complex> bad(8 * 4, Complex(2, 0));
  CHECK_THROWS_AS(UnitaryField(2, 2, bad), DomainError);
  CHECK_THROWS_AS(UnitaryField(2, 2, std::vector<Complex>(5)), ShapeError);
}

TEST_CASE("maurer cartan form") {
  SUBCASE("constant field gives zero") {
    const ConnectionForm a = maurer_cartan(gauge_field(0, 8, 2, kProfile));
    for (int j = 0; j < 3; ++j) {
      for (const Complex& z : a.component(j)) CHECK(std::abs(z) <= 1e-12);
    }
  }
  SUBCASE("single Fourier mode is exact") {
    for (int n : {4, 6, 8}) {
      const ConnectionForm a = maurer_cartan(diagonal_phase_field(n));
      Eigen::Matrix2cd expect = Eigen::Matrix2cd::Zero();
      expect(0, 0) = Complex(0, 2 * std::numbers::pi);
      for (std::size_t s = 0; s < a.sites(); ++s) {
        CHECK((a.at(0, s) - expect).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(a.at(1, s).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(a.at(2, s).cwiseAbs().maxCoeff() <= 1e-12);
      }
      CHECK(a.anti_hermitian_defect() <= 1e-12);
    }
  }
  SUBCASE("zero connection") {
    const ConnectionForm z = ConnectionForm::zero(4, 2);
    CHECK(z.anti_hermitian_defect() == 0.0);
    CHECK(z.max_operator_norms()[1] == 0.0);
  }
}

TEST_CASE("maurer cartan defect at n=32 reaches 1e-8" * doctest::may_fail()) {
  const ConnectionForm a = maurer_cartan(gauge_field(1, 32, 2, kProfile));
  MESSAGE("anti-Hermitian defect at n=32: " << a.anti_hermitian_defect());
  CHECK(a.anti_hermitian_defect() <= 1e-8);
}

TEST_CASE("maurer cartan defect decays algebraically with the grid") {
  double prev = 1e300;
  const std::vector<int> grids{8, 16, 32};
  std::vector<double> d;
  for (int n : grids) {
    d.push_back(maurer_cartan(gauge_field(1, n, 2, kProfile)).anti_hermitian_defect());
    CHECK(d.back() < prev);
    prev = d.back();
  }
  // at least first-order decay over a fourfold refinement
  CHECK(d.back() <= d.front() * 8.0 / 32.0);
}

TEST_CASE("degree") {
  const TorusGrid grid{8};
  SphereField constant{grid, std::vector<Vec4>(grid.sites(), Vec4(0, 0, 1, 0))};
  CHECK(std::abs(degree(constant)) <= 1e-14);
  CHECK(degree(sphere_map(1, 32, kProfile)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(degree(sphere_map(3, 32, kProfile)) == doctest::Approx(3.0).epsilon(1e-4));
  SphereField off = constant;
  off.values[3] = Vec4(0, 0, 2, 0);
  CHECK_THROWS_AS(degree(off), DomainError);
}

TEST_CASE("degree composition law and grid stability") {
  const double d1 = degree(sphere_map(1, 32, kProfile));
  for (int k = -3; k <= 3; ++k) {
    const double dk32 = degree(sphere_map(k, 32, kProfile));
    CHECK(std::abs(dk32 - k * d1) <= 2e-4);
    CHECK(std::abs(dk32 - k) <= 1e-4);
    const double dk48 = degree(sphere_map(k, 48, kProfile));
    CHECK(std::lround(dk32) == std::lround(dk48));
  }
}

TEST_CASE("winding number and mapping torus index") {
  SUBCASE("constant and abelian fields wind zero times") {
    const UnitaryField c = gauge_field(0, 8, 2, kProfile);
    CHECK(std::abs(winding_number(c)) <= 1e-12);
    CHECK(std::abs(mapping_torus_index(c)) <= 1e-12);
    CHECK(std::abs(winding_number(diagonal_phase_field(8))) <= 1e-12);
  }
  SUBCASE("integer values at n=32") {
    for (int k = -2; k <= 3; ++k) {
      const UnitaryField f = gauge_field(k, 32, 2, kProfile);
      const double w = winding_number(f);
      const double idx = mapping_torus_index(f);
      INFO("k = " << k << " winding = " << w << " index = " << idx);
      CHECK(std::abs(w - k) <= 1e-5);
      CHECK(std::abs(idx - k) <= 1e-5);
      if (k == 1 || k == -2) CHECK(std::abs(w - k) <= 1e-6);
    }
  }
  SUBCASE("rank padding does not change the winding") {
    const double w2 = winding_number(gauge_field(1, 16, 2, kProfile));
    const double w3 = winding_number(gauge_field(1, 16, 3, kProfile));
    CHECK(std::abs(w2 - w3) <= 1e-12);
  }
}

TEST_CASE("winding multiplicativity improves with the grid") {
  auto defect = [](int n) {
    return std::abs(winding_number(gauge_field(2, n, 2, kProfile)) -
                    2 * winding_number(gauge_field(1, n, 2, kProfile)));
  };
  CHECK(defect(32) < defect(16));
}

TEST_CASE("winding is invariant under constant gauge rotations") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  const UnitaryField f = gauge_field(1, 16, 2, kProfile);
  const double w = winding_number(f);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::MatrixXcd m(2, 2);
    for (int i = 0; i < 4; ++i) m(i % 2, i / 2) = {g(rng), g(rng)};
    const Eigen::MatrixXcd u0 = Eigen::HouseholderQR<Eigen::MatrixXcd>(m).householderQ();
    CHECK(std::abs(winding_number(left_multiply(u0, f)) - w) <= 1e-10);
    CHECK(std::abs(winding_number(constant_field(16, u0))) <= 1e-12);
  }
}

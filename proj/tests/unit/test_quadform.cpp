#include "ufb/errors.hpp"
#include "ufb/quadform.hpp"
#include "ufb/sym_eigen3.hpp"

#include <doctest.h>

#include <random>

using namespace ufb;

namespace {

Eigen::Matrix3d random_symmetric(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) m(i, j) = m(j, i) = u(rng);
  return m;
}

}  // namespace

TEST_CASE("sym_eigen3 reconstructs random symmetric matrices") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Matrix3d a = random_symmetric(rng);
    const SymEigen3<double> e = sym_eigen3(a);
    const Eigen::Matrix3d back = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    CHECK((back - a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((e.vectors.transpose() * e.vectors - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(e.values(0) >= e.values(1));
    CHECK(e.values(1) >= e.values(2));
  }
}

TEST_CASE("sym_eigen3 handles repeated eigenvalues") {
  const Eigen::Matrix3d a = Eigen::Vector3d(2.0, 2.0, -1.0).asDiagonal();
  const SymEigen3<double> e = sym_eigen3(a);
  CHECK(e.values(0) == doctest::Approx(2.0));
  CHECK(e.values(2) == doctest::Approx(-1.0));
  CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).norm() < 1e-12);

  const SymEigen3<double> z = sym_eigen3(Eigen::Matrix3d::Zero().eval());
  CHECK(z.values.norm() == 0.0);
}

TEST_CASE("p_delta endpoints and sup norm") {
  CHECK(sup_norm(p_delta(0.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sup_norm(p_delta(0.5)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sup_norm(p_delta(0.3, -1)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((p_delta(0.5).matrix() - p_cross().matrix()).norm() < 1e-15);
  CHECK(p_delta(0.0).matrix().trace() == doctest::Approx(0.0));
}

TEST_CASE("canonicalize round-trips through rotations") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double delta = 0.5 * u(rng);
    const int sign = trial % 2 ? 1 : -1;
    const double tau = 0.1 + 10 * u(rng);
    const Eigen::Matrix3d q = axis_angle(Eigen::Vector3d(u(rng), u(rng), u(rng) + 0.1).normalized(), 6 * u(rng));
    const QuadraticForm p = tau * rotate(p_delta(delta, sign), q) + QuadraticForm::identity() * 0.3;
    const CanonicalForm c = canonicalize(p);
    CHECK(c.tau == doctest::Approx(tau).epsilon(1e-10));
    CHECK(c.delta == doctest::Approx(delta).epsilon(1e-9));
    CHECK(c.trace_part == doctest::Approx(0.9).epsilon(1e-10));
    CHECK((c.reconstruct().matrix() - p.matrix()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("canonicalize rejects pure trace") {
  CHECK_THROWS_AS(canonicalize(QuadraticForm::identity()), Error);
}

TEST_CASE("coefficient order is m11 m22 m33 m12 m13 m23") {
  const QuadraticForm p = QuadraticForm::from_coefficients({1, 2, 3, 4, 5, 6});
  CHECK(p.matrix()(0, 1) == 4.0);
  CHECK(p.matrix()(0, 2) == 5.0);
  CHECK(p.matrix()(1, 2) == 6.0);
  CHECK(p(Eigen::Vector3d(1, 1, 0)) == doctest::Approx(1 + 2 + 2 * 4));
}

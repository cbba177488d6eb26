#include "ufb/errors.hpp"
#include "ufb/zp.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ufb;

// Expected values come from tests/oracles/coefficients_oracle.py (adaptive
// scipy quadrature over the exact band edge).

TEST_CASE("coefficients at delta = 0") {
  const CoefficientTable t = a_coefficients(0.0);
  CHECK(t.A == doctest::Approx(-7.255197456936870).epsilon(1e-12));
  CHECK(t.A_z == doctest::Approx(-0.806133050770763).epsilon(1e-12));
  CHECK(t.A_x == doctest::Approx(-3.224532203083053).epsilon(1e-12));
  CHECK(t.A_y == doctest::Approx(-3.224532203083053).epsilon(1e-12));
}

TEST_CASE("coefficients at delta = 1/2") {
  const CoefficientTable t = a_coefficients(0.5);
  CHECK(t.A == doctest::Approx(-2 * std::numbers::pi).epsilon(1e-12));
  CHECK(t.A_y == doctest::Approx(-2.094395102393196).epsilon(1e-12));
  CHECK(t.A_x == doctest::Approx(-3.427728435726528).epsilon(1e-12));
  CHECK(t.A_z == doctest::Approx(-0.761061769059862).epsilon(1e-12));
  CHECK(t.A_x + t.A_y + t.A_z == doctest::Approx(t.A).epsilon(1e-13));
}

TEST_CASE("kappa oracle values") {
  const double deltas[] = {0.05, 0.1, 0.25, 0.45, 0.49};
  const double expected[] = {0.094834381086148, 0.178565104096262, 0.346202319311396, 0.224698612742071,
                             0.075395857210649};
  for (int i = 0; i < 5; ++i) {
    CAPTURE(deltas[i]);
    CHECK(kappa(deltas[i]) == doctest::Approx(expected[i]).epsilon(1e-10));
  }
  CHECK(std::abs(kappa(0.0)) < 1e-12);
  CHECK(std::abs(kappa(0.5)) < 1e-12);
}

TEST_CASE("log-resonant form of p0") {
  const QuadraticForm p0 = p_axisymmetric();
  const QuadraticForm l = log_form(p0);
  CHECK((l.matrix() + 5.0 / (3.0 * std::sqrt(3.0)) * p0.matrix()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection of Z at r = 1/2") {
  const QuadraticForm p0 = p_axisymmetric();
  const QuadraticForm p3 = p_cross();
  CHECK(sup_norm(pi_of_zp(p0, 0.5, 1.0) - std::log(2.0) / (3 * std::sqrt(3.0)) * p0) < 1e-10);
  CHECK(sup_norm(pi_of_zp(p3, 0.5, 1.0) - std::log(2.0) / (2 * std::numbers::pi) * p3) < 1e-10);
  CHECK(sup_norm(pi_of_zp(p0, 1.0, 1.0)) < 1e-12);
}

TEST_CASE("eta0 estimate") {
  CHECK(eta0_estimate(10.0, uniform_grid(0.0, 0.5, 0.01)) == doctest::Approx(0.110318).epsilon(1e-5));
}

TEST_CASE("Z is O(r^2 log r) at the origin") {
  const ZpField z = build_zp(p_axisymmetric(), 1.0);
  CHECK(zp_value(z, Eigen::Vector3d::Zero()) == 0.0);
  for (double t : {1e-2, 1e-3, 1e-4}) {
    const Eigen::Vector3d x = t * Eigen::Vector3d(1.0, 0.3, -0.7);
    const double r = x.norm();
    CHECK(std::abs(zp_value(z, x)) < r * r * std::abs(std::log(r)));
  }
}

TEST_CASE("Laplacian of Z is the negative indicator away from the cone") {
  const ZpField z = build_zp(p_axisymmetric(), 1.0, 80);
  // p0 > 0 near the equator, < 0 near the poles.
  const ZpValue in = eval_zp(z, Eigen::Vector3d(0.5, 0.1, 0.05), 2);
  const ZpValue out = eval_zp(z, Eigen::Vector3d(0.05, -0.1, 0.5), 2);
  CHECK(in.hessian.trace() == doctest::Approx(-1.0).epsilon(0.05));
  CHECK(std::abs(out.hessian.trace()) < 0.05);
}

TEST_CASE("Z is rotation equivariant") {
  const Eigen::Matrix3d q = axis_angle(Eigen::Vector3d(1, 2, 3).normalized(), 0.7);
  const QuadraticForm p = p_delta(0.2);
  const ZpField z = build_zp(p, 1.0, 30);
  const ZpField zr = build_zp(rotate(p, q), 1.0, 30);
  const Eigen::Vector3d x(0.3, -0.2, 0.4);
  CHECK(zp_value(zr, x) == doctest::Approx(zp_value(z, q * x)).epsilon(1e-8));
}

TEST_CASE("uniform grid is inclusive and rejects empty ranges") {
  const std::vector<double> g = uniform_grid(0.0, 0.5, 0.01);
  CHECK(g.size() == 51);
  CHECK(g.back() == doctest::Approx(0.5));
  CHECK(uniform_grid(0.4, 0.1, 0.1).empty());
}

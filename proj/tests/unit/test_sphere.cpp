#include "ufb/errors.hpp"
#include "ufb/sphere.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ufb;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(8, x, w);
  double s0 = 0, s2 = 0, s14 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += w[i];
    s2 += w[i] * x[i] * x[i];
    s14 += w[i] * std::pow(x[i], 14);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(s14 == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("real harmonics are orthonormal under the product rule") {
  const int lmax = 10;
  const SphereQuadrature q = build_quadrature(16);
  const int n = (lmax + 1) * (lmax + 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const std::vector<double> y = real_harmonics(lmax, q.nodes[i]);
    const Eigen::Map<const Eigen::VectorXd> v(y.data(), n);
    gram += q.weights[i] * v * v.transpose();
  }
  CHECK((gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("expansion of a quadratic recovers its trace-free part") {
  const QuadraticForm p = QuadraticForm::from_coefficients({0.7, -0.2, 0.4, 0.3, -0.1, 0.25});
  const SphereQuadrature q = build_quadrature(12);
  const HarmonicExpansion e = expand([&](const Eigen::Vector3d& x) { return p(x); }, 6, q);
  const Eigen::Matrix3d tf = p.matrix() - p.matrix().trace() / 3.0 * Eigen::Matrix3d::Identity();
  CHECK((degree2_form(e).matrix() - tf).cwiseAbs().maxCoeff() < 1e-13);
  const Eigen::Vector3d x = Eigen::Vector3d(0.3, -0.5, 0.8).normalized();
  CHECK(eval_expansion(e, x) == doctest::Approx(p(x)).epsilon(1e-13));
  CHECK_THROWS_AS(eval_expansion(e, Eigen::Vector3d(1, 1, 0)), Error);
}

TEST_CASE("indicator expansion has the expected mean") {
  // The l = 0 coefficient is (∫σ)/√(4π); for p0 the positive band has area 4π/√3.
  const HarmonicExpansion e = expand_indicator(p_axisymmetric(), 8);
  const double mean = -4 * std::numbers::pi / std::sqrt(3.0);
  CHECK(e(0, 0) == doctest::Approx(mean / std::sqrt(4 * std::numbers::pi)).epsilon(1e-12));
  // Axisymmetric: no m ≠ 0 content.
  for (int l = 1; l <= 8; ++l)
    for (int m = -l; m <= l; ++m)
      if (m != 0) CHECK(std::abs(e(l, m)) < 1e-13);
}

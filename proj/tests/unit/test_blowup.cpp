#include "ufb/errors.hpp"
#include "ufb/blowup.hpp"
#include "ufb/pde.hpp"

#include <doctest.h>

#include <cmath>

using namespace ufb;
using Vec = Eigen::Vector3d;

namespace {

ScalarGrid sampled(const std::function<double(const Vec&)>& f, int n) {
  ScalarGrid g = ScalarGrid::cube(Vec::Zero(), 1.0, n);
  g.fill(f);
  return g;
}

BlowupRecord record(int j, double tau, double delta, int sign = 1) {
  BlowupRecord r;
  r.j = j;
  r.r = 0.5 / std::pow(2.0, j);
  r.canonical.tau = tau;
  r.canonical.delta = delta;
  r.canonical.sign = sign;
  r.sup_u = tau;
  return r;
}

}  // namespace

TEST_CASE("projection reproduces quadratics and ignores affine parts") {
  const QuadraticForm p = QuadraticForm::from_coefficients({0.5, -1.0, 0.3, 0.2, -0.4, 0.1});
  const ScalarGrid g = sampled([&](const Vec& x) { return p(x) + 2.0 * x(0) - 0.5; }, 33);
  const QuadraticForm pi = project(g, 0.5, Vec::Zero());
  CHECK(sup_norm(pi - p) < 1e-10);
}

TEST_CASE("projection laws") {
  const ProjectionLawsReport r = projection_laws_check();
  CHECK(r.idempotence_defect < 1e-10);
  CHECK(r.harmonic_r_defect < 1e-8);
  CHECK(r.quadratic_defect < 1e-10);
}

TEST_CASE("marching cubes recovers a plane") {
  const ScalarGrid u = sampled([](const Vec& x) { return x(0) + 0.5 * x(1) - 0.2 * x(2) - 0.1; }, 17);
  ScalarGrid zero = u;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  const Mesh m = free_boundary(u, zero);
  CHECK(!m.triangles.empty());
  for (const Vec& v : m.vertices) CHECK(std::abs(v(0) + 0.5 * v(1) - 0.2 * v(2) - 0.1) < 1e-12);
  double area = 0.0;
  for (double a : vertex_areas(m)) area += a;
  CHECK(area > 0.0);
}

TEST_CASE("marching cubes reports an empty surface") {
  const ScalarGrid u = sampled([](const Vec& x) { return 1.0 + x.squaredNorm(); }, 9);
  ScalarGrid zero = u;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  CHECK_THROWS_AS(free_boundary(u, zero), Error);
}

TEST_CASE("cone fit recovers a tilted exact cone") {
  const Eigen::Matrix3d q = axis_angle(Vec(1, 1, 0).normalized(), 0.3);
  const QuadraticForm p = rotate(p_axisymmetric(), q);
  const ScalarGrid u = sampled([&](const Vec& x) { return p(x); }, 65);
  ScalarGrid zero = u;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  const ConeFit fit = cone_fit(free_boundary(u, zero), Vec::Zero(), FitMode::Cone);
  const Vec axis = q.row(2).transpose();
  CHECK(std::abs(std::abs(fit.axis.dot(axis)) - 1.0) < 1e-4);
  CHECK(fit.residual_rms < 0.1 * u.h);
}

TEST_CASE("blow-up of a pure cone profile") {
  const ScalarGrid u = sampled([](const Vec& x) { return 10.0 * p_axisymmetric()(x); }, 65);
  const BlowupResult b = blowup_sequence(u, Vec::Zero(), 0.5, 3);
  REQUIRE(!b.records.empty());
  for (const auto& r : b.records) {
    CHECK(r.canonical.tau == doctest::Approx(10.0).epsilon(1e-8));
    CHECK(r.canonical.delta < 1e-8);
    CHECK(r.residue < 1e-8);
  }
}

TEST_CASE("blow-up refuses radii below the grid resolution") {
  const ScalarGrid u = sampled([](const Vec& x) { return x.squaredNorm(); }, 9);
  CHECK_THROWS_AS(blowup_sequence(u, Vec::Zero(), 0.5, 2), Error);
}

TEST_CASE("classifier labels synthetic sequences") {
  const ClassifyOptions opts;
  CHECK(classify({record(0, 30, 0.1), record(1, 30.13, 0.08), record(2, 30.26, 0.06)}, opts).label == "S1_plus");
  CHECK(classify({record(0, 30, 0.1, -1), record(1, 30.13, 0.08, -1), record(2, 30.26, 0.06, -1)}, opts).label ==
        "S1_minus");
  CHECK(classify({record(0, 30, 0.5), record(1, 30.11, 0.5), record(2, 30.22, 0.5)}, opts).label == "S2");
  CHECK(classify({record(0, 3, 0.3), record(1, 3, 0.3), record(2, 3, 0.3)}, opts).label == "regular");
}

TEST_CASE("sublevel measure of a slab") {
  const SublevelEstimate e = sublevel_measure(QuadraticForm::diagonal(1, 0, 0), 0.01, 200000, 3);
  CHECK(std::abs(e.measure - 0.1) < 4 * e.standard_error);
  CHECK(cube_sup(p_axisymmetric(), 0.5) == doctest::Approx(0.25).epsilon(1e-12));
}

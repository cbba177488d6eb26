#include "ufb/errors.hpp"
#include "ufb/multigrid.hpp"
#include "ufb/pde.hpp"

#include <doctest.h>

#include <cmath>

using namespace ufb;
using Vec = Eigen::Vector3d;

TEST_CASE("multigrid solves a Poisson problem with a quadratic solution") {
  const std::array<int, 3> dims{33, 33, 33};
  const double h = 1.0 / 32.0;
  const PoissonSolver solver(dims, h, box_free_mask(dims));
  ScalarGrid exact(Vec::Zero(), h, dims);
  for (int k = 0; k < 33; ++k)
    for (int j = 0; j < 33; ++j)
      for (int i = 0; i < 33; ++i) {
        const Vec x = exact.point(i, j, k);
        exact(i, j, k) = x(0) * x(0) + 2 * x(1) * x(1) - x(2) * x(2) + x(0) * x(2);
      }
  std::vector<double> u(exact.size(), 0.0);
  const auto& mask = solver.free_mask();
  for (std::size_t n = 0; n < u.size(); ++n)
    if (!mask[n]) u[n] = exact.values[n];
  const std::vector<double> rhs(u.size(), 4.0);
  const LinearReport r = solver.solve(u, rhs, 1e-11);
  CHECK(r.converged);
  double err = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) err = std::max(err, std::abs(u[n] - exact.values[n]));
  CHECK(err < 1e-9);
}

TEST_CASE("negative boundary data gives u = boundary everywhere") {
  ProblemSpec s;
  s.origin = Vec::Zero();
  s.h = 1.0 / 16.0;
  s.dims = {17, 17, 17};
  s.boundary = FieldDescriptor::constant(-1.0);
  const SolveResult res = solve(s);
  CHECK(res.report.converged);
  CHECK(res.report.positive_nodes == 0);
  for (double v : res.u.values) CHECK(v == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("manufactured boundary data is reproduced in the interior") {
  ProblemSpec s;
  s.domain = Domain::Ball;
  s.set_cube(Vec::Zero(), 1.0, 33);
  s.boundary = FieldDescriptor::manufactured(30.0, 0.0, Eigen::Matrix3d::Identity(), 1.0, 20);
  const SolveResult res = solve(s);
  const ScalarGrid ref = sample(s.boundary, s.layout());
  double err = 0.0, scale = 0.0;
  for (int k = 0; k < 33; ++k)
    for (int j = 0; j < 33; ++j)
      for (int i = 0; i < 33; ++i) {
        if (ref.point(i, j, k).norm() > 0.8) continue;
        err = std::max(err, std::abs(res.u(i, j, k) - ref(i, j, k)));
        scale = std::max(scale, std::abs(ref(i, j, k)));
      }
  CHECK(err / scale < 0.02);
  CHECK(res.report.max_principle_ok);
}

TEST_CASE("iteration cap raises SolverError with the partial state") {
  ProblemSpec s;
  s.domain = Domain::Ball;
  s.set_cube(Vec::Zero(), 1.0, 17);
  s.boundary = FieldDescriptor::manufactured(30.0, 0.0, Eigen::Matrix3d::Identity(), 1.0, 12);
  s.max_outer = 1;
  try {
    solve(s);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.code() == ErrorCode::MaxIterations);
    CHECK(e.partial().u.size() == 17u * 17u * 17u);
  }
}

TEST_CASE("validate rejects inconsistent specs") {
  ProblemSpec s;
  s.theta = 0.0;
  CHECK_THROWS_AS(validate(s), Error);
  s = ProblemSpec{};
  s.h = -1.0;
  CHECK_THROWS_AS(validate(s), Error);
}

TEST_CASE("field descriptors") {
  const Vec x(0.3, -0.4, 0.5);
  CHECK(FieldDescriptor::constant(2.5)(x) == 2.5);
  CHECK(FieldDescriptor::affine(1.0, Vec(1, 2, 3))(x) == doctest::Approx(1.0 + 0.3 - 0.8 + 1.5));
  CHECK(FieldDescriptor::radial(1.0, 2.0, 2.0)(x) == doctest::Approx(1.0 + 2.0 * x.squaredNorm()));
  // Hölder profile is two-homogeneous.
  const FieldDescriptor hold = FieldDescriptor::holder(1.0, 0.5);
  CHECK(hold(2.0 * x) == doctest::Approx(4.0 * hold(x)));
  CHECK_THROWS_AS(FieldDescriptor::manufactured(3.0, 0.0, Eigen::Matrix3d::Identity(), 1.0), Error);
}

TEST_CASE("residual potential of a pure quadratic is flat") {
  ProblemSpec s;
  s.f = FieldDescriptor::constant(-1.0);
  const FieldDescriptor q = FieldDescriptor::quadratic(30.0 * p_axisymmetric());
  const ResidualPotential rp = residual_potential(q, 0.5, s, 33);
  CHECK(rp.d2g_l2 < 1e-8);
}

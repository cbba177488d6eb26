#include "ufb/pde.hpp"

#include "ufb/blowup.hpp"
#include "ufb/format.hpp"
#include "ufb/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ufb {

FieldDescriptor FieldDescriptor::constant(double v) {
  FieldDescriptor d;
  d.kind = Kind::Constant;
  d.value = v;
  return d;
}

FieldDescriptor FieldDescriptor::affine(double c, const Eigen::Vector3d& g) {
  FieldDescriptor d;
  d.kind = Kind::Affine;
  d.value = c;
  d.gradient = g;
  return d;
}

FieldDescriptor FieldDescriptor::quadratic(const QuadraticForm& q, const Eigen::Vector3d& g, double c) {
  FieldDescriptor d;
  d.kind = Kind::Quadratic;
  d.form = q;
  d.gradient = g;
  d.value = c;
  return d;
}

FieldDescriptor FieldDescriptor::radial(double c0, double c1, double beta, const Eigen::Vector3d& center) {
  FieldDescriptor d;
  d.kind = Kind::Radial;
  d.value = c0;
  d.coefficient = c1;
  d.exponent = beta;
  d.center = center;
  return d;
}

FieldDescriptor FieldDescriptor::holder(double c, double alpha) {
  FieldDescriptor d;
  d.kind = Kind::Holder;
  d.value = c;
  d.exponent = alpha;
  return d;
}

FieldDescriptor FieldDescriptor::manufactured(double tau, double delta, const Eigen::Matrix3d& q, double a,
                                              int lmax) {
  if (!(tau >= 10.0 * a)) throw Error(ErrorCode::InvalidArgument, "manufactured field needs tau >= 10a");
  FieldDescriptor d;
  d.kind = Kind::Manufactured;
  d.tau = tau;
  d.delta = delta;
  d.rotation = q;
  d.amplitude = a;
  d.lmax = lmax;
  d.zp = std::make_shared<const ZpField>(build_zp(p_delta(delta), a, lmax));
  return d;
}

FieldDescriptor FieldDescriptor::from_grid(std::shared_ptr<const ScalarGrid> g) {
  FieldDescriptor d;
  d.kind = Kind::Grid;
  d.grid = std::move(g);
  return d;
}

double FieldDescriptor::operator()(const Eigen::Vector3d& x) const {
  switch (kind) {
    case Kind::Constant:
      return value;
    case Kind::Affine:
      return value + gradient.dot(x);
    case Kind::Quadratic:
      return value + gradient.dot(x) + form(x);
    case Kind::Radial: {
      const double r = (x - center).norm();
      return value + (r > 0.0 ? coefficient * std::pow(r, exponent) : 0.0);
    }
    case Kind::Holder: {
      const double r = x.norm();
      if (r == 0.0) return 0.0;
      return value * x.x() * std::pow(std::abs(x.x()), exponent) * std::pow(r, 1.0 - exponent);
    }
    case Kind::Manufactured: {
      const Eigen::Vector3d y = rotation * x;
      return tau * p_delta(delta)(y) + zp_value(*zp, y);
    }
    case Kind::Grid:
      return grid->interpolate(x);
  }
  return 0.0;
}

std::string FieldDescriptor::describe() const {
  switch (kind) {
    case Kind::Constant:
      return "constant(" + format_short(value) + ")";
    case Kind::Affine:
      return "affine";
    case Kind::Quadratic:
      return "quadratic";
    case Kind::Radial:
      return "radial(beta=" + format_short(exponent) + ")";
    case Kind::Holder:
      return "holder(alpha=" + format_short(exponent) + ")";
    case Kind::Manufactured:
      return "manufactured(tau=" + format_short(tau) + ",delta=" + format_short(delta) + ")";
    case Kind::Grid:
      return "grid";
  }
  return "?";
}

void ProblemSpec::set_cube(const Eigen::Vector3d& center, double half_width, int n) {
  origin = center - Eigen::Vector3d::Constant(half_width);
  h = 2.0 * half_width / double(n - 1);
  dims = {n, n, n};
}

ScalarGrid ProblemSpec::layout() const { return ScalarGrid(origin, h, dims); }

std::vector<std::uint8_t> ProblemSpec::free_mask() const {
  auto mask = box_free_mask(dims, periodic());
  if (domain == Domain::Ball) {
    const ScalarGrid g = layout();
    for (int k = 0; k < dims[2]; ++k)
      for (int j = 0; j < dims[1]; ++j)
        for (int i = 0; i < dims[0]; ++i)
          if ((g.point(i, j, k) - ball_center).norm() >= ball_radius) mask[g.index(i, j, k)] = 0;
  }
  return mask;
}

double psi_scaling_bound(const FieldDescriptor& psi, const Eigen::Vector3d& x0) {
  double bound = 0.0;
  const int n = 9;
  for (int e = 2; e <= 8; ++e) {
    const double r = std::ldexp(1.0, -e);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const Eigen::Vector3d x(-1.0 + 2.0 * i / (n - 1), -1.0 + 2.0 * j / (n - 1), -1.0 + 2.0 * k / (n - 1));
          if (x.norm() > 1.0) continue;
          bound = std::max(bound, std::abs(psi(x0 + r * x)) / (r * r));
        }
  }
  return bound;
}

void validate(const ProblemSpec& s) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::Config, m); };
  for (int a = 0; a < 3; ++a)
    if (s.dims[a] < 2) fail("grid dims must be >= 2 per axis");
  if (!(s.h > 0.0)) fail("grid spacing must be positive");
  if (!(s.theta > 0.0 && s.theta <= 1.0)) fail("damping theta must lie in (0, 1]");
  if (!(s.tol_outer > 0.0) || !(s.tol_inner > 0.0)) fail("tolerances must be positive");
  if (s.max_outer < 1 || s.max_inner < 1) fail("iteration limits must be >= 1");
  if (s.domain == Domain::Ball) {
    if (!(s.ball_radius > 0.0)) fail("ball radius must be positive");
    const Eigen::Vector3d hi = s.origin + s.h * Eigen::Vector3d(s.dims[0] - 1, s.dims[1] - 1, s.dims[2] - 1);
    for (int a = 0; a < 3; ++a) {
      if (s.ball_center(a) - s.ball_radius < s.origin(a) - 1e-12 || s.ball_center(a) + s.ball_radius > hi(a) + 1e-12) {
        fail("ball does not fit inside the grid box");
      }
    }
  }
  if (s.singular_analysis) {
    if (!(s.f(s.study_point) < 0.0)) fail("f must be negative at the study point");
    const double b = psi_scaling_bound(s.psi, s.study_point);
    if (!(b <= s.c_psi)) fail("psi violates |psi_r| <= C_psi: measured " + format_short(b));
  }
}

ScalarGrid sample(const FieldDescriptor& field, const ScalarGrid& layout) {
  ScalarGrid g = layout;
  g.fill([&](const Eigen::Vector3d& x) { return field(x); });
  return g;
}

namespace {

struct Residuals {
  double all = 0.0;
  double interior = 0.0;
  std::size_t positive = 0;
};

Residuals fixed_point_residual(const ProblemSpec& spec, const PoissonSolver& solver, const ScalarGrid& u,
                               const std::vector<double>& f, const std::vector<double>& psi) {
  Residuals r;
  std::vector<double> lap;
  solver.laplacian(u.values, lap);
  const auto& mask = solver.free_mask();
  const auto& d = u.dims;
  std::vector<std::uint8_t> near(u.size(), 0);
  std::vector<std::uint8_t> pos(u.size(), 0);
  for (std::size_t n = 0; n < u.size(); ++n) {
    pos[n] = u.values[n] > psi[n];
    r.positive += pos[n];
  }
  // Nodes adjacent to a sign change of u − ψ, dilated by two layers.
  const auto per = spec.periodic();
  auto wrap = [&](int c, int a, bool& ok) {
    if (c >= 0 && c < d[a]) return c;
    if (per[a]) return (c + d[a]) % d[a];
    ok = false;
    return 0;
  };
  std::vector<std::uint8_t> iface(u.size(), 0);
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) {
        const std::size_t n = u.index(i, j, k);
        const int c[3] = {i, j, k};
        for (int a = 0; a < 3 && !iface[n]; ++a) {
          for (int s : {-1, 1}) {
            int cc[3] = {c[0], c[1], c[2]};
            bool ok = true;
            cc[a] = wrap(c[a] + s, a, ok);
            if (ok && pos[u.index(cc[0], cc[1], cc[2])] != pos[n]) iface[n] = 1;
          }
        }
      }
  for (int k = 0; k < d[2]; ++k)
    for (int j = 0; j < d[1]; ++j)
      for (int i = 0; i < d[0]; ++i) {
        if (!iface[u.index(i, j, k)]) continue;
        for (int dk = -2; dk <= 2; ++dk)
          for (int dj = -2; dj <= 2; ++dj)
            for (int di = -2; di <= 2; ++di) {
              bool ok = true;
              const int a = wrap(i + di, 0, ok), b = wrap(j + dj, 1, ok), c = wrap(k + dk, 2, ok);
              if (ok) near[u.index(a, b, c)] = 1;
            }
      }
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (!mask[n]) continue;
    const double res = std::abs(lap[n] - (pos[n] ? f[n] : 0.0));
    r.all = std::max(r.all, res);
    if (!near[n]) r.interior = std::max(r.interior, res);
  }
  return r;
}

}  // namespace

SolveResult solve(const ProblemSpec& spec) {
  validate(spec);
  const ScalarGrid layout = spec.layout();
  const auto mask = spec.free_mask();
  PoissonSolver solver(spec.dims, spec.h, mask, spec.periodic());
  const auto& free = solver.free_mask();

  std::vector<double> f(layout.size()), psi(layout.size());
  for (int k = 0; k < layout.dims[2]; ++k)
    for (int j = 0; j < layout.dims[1]; ++j)
      for (int i = 0; i < layout.dims[0]; ++i) {
        const std::size_t n = layout.index(i, j, k);
        const Eigen::Vector3d x = layout.point(i, j, k);
        f[n] = spec.f(x);
        psi[n] = spec.psi(x);
      }

  SolveResult res;
  res.u = layout;
  ScalarGrid& u = res.u;
  for (int k = 0; k < layout.dims[2]; ++k)
    for (int j = 0; j < layout.dims[1]; ++j)
      for (int i = 0; i < layout.dims[0]; ++i) {
        const std::size_t n = layout.index(i, j, k);
        const Eigen::Vector3d x = layout.point(i, j, k);
        if (!free[n]) {
          u.values[n] = spec.boundary(x);
        } else if (spec.initial) {
          u.values[n] = (*spec.initial)(x);
        }
      }
  SolveReport& rep = res.report;
  if (!spec.initial) {
    const std::vector<double> zero(layout.size(), 0.0);
    const auto lin = solver.solve(u.values, zero, spec.tol_inner, spec.max_inner);
    rep.inner_iterations += lin.iterations;
    if (!lin.converged) throw SolverError(ErrorCode::InnerDivergence, "harmonic initialization did not converge", res);
  }

  std::vector<double> w = u.values;
  std::vector<double> rhs(layout.size(), 0.0);
  for (int m = 1; m <= spec.max_outer; ++m) {
    double rhs_norm = 0.0;
    for (std::size_t n = 0; n < rhs.size(); ++n) {
      rhs[n] = u.values[n] > psi[n] ? f[n] : 0.0;
      rhs_norm = std::max(rhs_norm, std::abs(rhs[n]));
    }
    const auto lin = solver.solve(w, rhs, spec.tol_inner * std::max(1.0, rhs_norm), spec.max_inner);
    rep.inner_iterations += lin.iterations;
    rep.outer_iterations = m;
    if (!lin.converged) {
      throw SolverError(ErrorCode::InnerDivergence,
                        "inner solve stalled at residual " + format_short(lin.residual), res);
    }
    double change = 0.0;
    for (std::size_t n = 0; n < rhs.size(); ++n) {
      const double next = (1.0 - spec.theta) * u.values[n] + spec.theta * w[n];
      change = std::max(change, std::abs(next - u.values[n]));
      u.values[n] = next;
    }
    rep.final_change = change;
    rep.change_history.push_back(change);
    if (change <= spec.tol_outer) {
      u.values = w;
      rep.converged = true;
      break;
    }
  }

  const Residuals r = fixed_point_residual(spec, solver, u, f, psi);
  rep.residual_inf = r.all;
  rep.residual_interior = r.interior;
  rep.positive_nodes = r.positive;
  if (*std::max_element(f.begin(), f.end()) <= 0.0) {
    // Δu ≤ 0 makes u superharmonic, so its minimum sits on the boundary.
    double min_free = std::numeric_limits<double>::infinity();
    double min_fixed = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < u.size(); ++n) {
      double& slot = free[n] ? min_free : min_fixed;
      slot = std::min(slot, u.values[n]);
    }
    rep.max_principle_checked = std::isfinite(min_fixed);
    rep.max_principle_ok =
        !rep.max_principle_checked || min_free >= min_fixed - 1e-9 * std::max(1.0, std::abs(min_fixed));
  }
  if (!rep.converged) {
    throw SolverError(ErrorCode::MaxIterations,
                      "fixed point not reached after " + std::to_string(spec.max_outer) +
                          " iterations (last change " + format_short(rep.final_change) + ")",
                      res);
  }
  return res;
}

ScalarGrid manufactured(double tau, double delta, const Eigen::Matrix3d& q, double a, int lmax, int n,
                        double radius) {
  const FieldDescriptor field = FieldDescriptor::manufactured(tau, delta, q, a, lmax);
  return sample(field, ScalarGrid::cube(Eigen::Vector3d::Zero(), radius, n));
}

std::vector<double> discrete_laplacian(const ScalarGrid& u) {
  std::vector<double> out(u.size(), 0.0);
  const double inv_h2 = 1.0 / (u.h * u.h);
  const auto& d = u.dims;
  for (int k = 1; k + 1 < d[2]; ++k)
    for (int j = 1; j + 1 < d[1]; ++j)
      for (int i = 1; i + 1 < d[0]; ++i) {
        out[u.index(i, j, k)] = (u(i + 1, j, k) + u(i - 1, j, k) + u(i, j + 1, k) + u(i, j - 1, k) +
                                 u(i, j, k + 1) + u(i, j, k - 1) - 6.0 * u(i, j, k)) *
                                inv_h2;
      }
  return out;
}

double hessian_l2(const ScalarGrid& g, const Eigen::Vector3d& center, double radius) {
  double sum = 0.0;
  const double cell = g.h * g.h * g.h;
  const auto& d = g.dims;
  for (int k = 1; k + 1 < d[2]; ++k)
    for (int j = 1; j + 1 < d[1]; ++j)
      for (int i = 1; i + 1 < d[0]; ++i) {
        if ((g.point(i, j, k) - center).norm() >= radius) continue;
        sum += cell * node_hessian(g, i, j, k).squaredNorm();
      }
  return std::sqrt(sum);
}

namespace {

// Fraction of a node's dual cell where φ > 0 under the first-order model
// φ + ∇φ·d. Resolves interfaces that move by less than one cell.
double cell_fraction(double phi, const Eigen::Vector3d& grad, double h) {
  const double w = h * grad.lpNorm<1>();
  if (!(w > 0.0)) return phi > 0.0 ? 1.0 : 0.0;
  return std::clamp(0.5 + phi / w, 0.0, 1.0);
}

}  // namespace

ResidualPotential residual_potential(const ScalarGrid& u, double r, const ProblemSpec& spec, int n) {
  const Eigen::Vector3d& x0 = spec.study_point;
  ResidualPotential out;
  out.pi = project(u, r, x0);
  ProblemSpec unit;
  unit.domain = Domain::Ball;
  unit.set_cube(Eigen::Vector3d::Zero(), 1.0, n);
  unit.ball_radius = 1.0;
  const auto mask = unit.free_mask();
  PoissonSolver solver(unit.dims, unit.h, mask);
  out.g = unit.layout();
  std::vector<double> rhs(out.g.size(), 0.0);
  const double f0 = spec.f(x0);
  const double inv_r2 = 1.0 / (r * r);
  const double hu = unit.h;
  auto phi = [&](const Eigen::Vector3d& x) {
    const Eigen::Vector3d y = x0 + r * x;
    return (u.interpolate(y) - spec.psi(y)) * inv_r2;
  };
  for (int k = 0; k < unit.dims[2]; ++k)
    for (int j = 0; j < unit.dims[1]; ++j)
      for (int i = 0; i < unit.dims[0]; ++i) {
        const std::size_t idx = out.g.index(i, j, k);
        if (!mask[idx]) continue;
        const Eigen::Vector3d x = out.g.point(i, j, k);
        Eigen::Vector3d grad;
        for (int a = 0; a < 3; ++a) {
          const Eigen::Vector3d e = hu * Eigen::Vector3d::Unit(a);
          grad(a) = (phi(x + e) - phi(x - e)) / (2.0 * hu);
        }
        const double inside_pi = cell_fraction(out.pi(x), 2.0 * (out.pi.matrix() * x), hu);
        const double inside_u = cell_fraction(phi(x), grad, hu);
        rhs[idx] = f0 * inside_pi - spec.f(x0 + r * x) * inside_u;
      }
  double scale = 0.0;
  for (double v : rhs) scale = std::max(scale, std::abs(v));
  if (scale > 0.0) {
    const auto lin = solver.solve(out.g.values, rhs, spec.tol_inner * scale, spec.max_inner);
    if (!lin.converged) throw Error(ErrorCode::InnerDivergence, "residual potential solve stalled");
  }
  out.d2g_l2 = hessian_l2(out.g, Eigen::Vector3d::Zero(), 1.0);
  return out;
}

ResidualPotential residual_potential(const FieldDescriptor& u, double r, const ProblemSpec& spec, int n) {
  const ScalarGrid g = sample(u, ScalarGrid::cube(spec.study_point, r, n));
  return residual_potential(g, r, spec, n);
}

ReducedProblem reduce_source(const FieldDescriptor& f, const FieldDescriptor& g, const ProblemSpec& spec) {
  validate(spec);
  ReducedProblem out;
  out.spec = spec;
  out.spec.f = f;
  out.psi_tilde = spec.layout();
  if (g.is_zero()) return out;
  const auto mask = spec.free_mask();
  PoissonSolver solver(spec.dims, spec.h, mask, spec.periodic());
  std::vector<double> rhs(out.psi_tilde.size(), 0.0);
  double scale = 0.0;
  for (int k = 0; k < spec.dims[2]; ++k)
    for (int j = 0; j < spec.dims[1]; ++j)
      for (int i = 0; i < spec.dims[0]; ++i) {
        const std::size_t n = out.psi_tilde.index(i, j, k);
        rhs[n] = -g(out.psi_tilde.point(i, j, k));
        scale = std::max(scale, std::abs(rhs[n]));
      }
  const auto lin = solver.solve(out.psi_tilde.values, rhs, spec.tol_inner * std::max(1.0, scale), spec.max_inner);
  if (!lin.converged) throw Error(ErrorCode::InnerDivergence, "source reduction solve stalled");
  auto shifted = std::make_shared<ScalarGrid>(sample(spec.psi, spec.layout()));
  for (std::size_t n = 0; n < shifted->size(); ++n) shifted->values[n] += out.psi_tilde.values[n];
  out.spec.psi = FieldDescriptor::from_grid(shifted);
  // ψ̃ vanishes on the Dirichlet nodes, so the boundary data carry over.
  return out;
}

}  // namespace ufb

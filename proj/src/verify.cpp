#include "ufb/verify.hpp"

#include "ufb/blowup.hpp"
#include "ufb/errors.hpp"
#include "ufb/format.hpp"
#include "ufb/pde.hpp"
#include "ufb/quadform.hpp"
#include "ufb/renorm.hpp"
#include "ufb/sphere.hpp"
#include "ufb/zp.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

namespace ufb {

namespace {

using Vec = Eigen::Vector3d;
using std::numbers::pi;

double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  const double u1 = unit(rng), u2 = unit(rng), u3 = unit(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  Eigen::Quaterniond q(a * std::sin(2 * pi * u2), a * std::cos(2 * pi * u2), b * std::sin(2 * pi * u3),
                       b * std::cos(2 * pi * u3));
  return q.normalized().toRotationMatrix();
}

Vec random_point(std::mt19937_64& rng, double radius) {
  while (true) {
    const Vec x(2 * unit(rng) - 1, 2 * unit(rng) - 1, 2 * unit(rng) - 1);
    if (x.squaredNorm() <= 1.0) return radius * x;
  }
}

CheckResult upper(const std::string& name, double measured, double tol, const VerifyOptions& o,
                  std::string detail = {}) {
  CheckResult r;
  r.name = name;
  r.measured = measured;
  r.relation = "<=";
  r.bound = tol * o.tolerance_scale;
  r.pass = measured <= r.bound;
  r.detail = std::move(detail);
  return r;
}

CheckResult lower(const std::string& name, double measured, double bound, std::string detail = {}) {
  CheckResult r;
  r.name = name;
  r.measured = measured;
  r.relation = ">=";
  r.bound = bound;
  r.pass = measured >= bound;
  r.detail = std::move(detail);
  return r;
}

double form_distance(const QuadraticForm& a, const QuadraticForm& b) { return sup_norm(a - b); }

double axis_angle_deg(const Vec& a, const Vec& b) {
  const double c = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return std::acos(c) * 180.0 / pi;
}

// sign·τ·p_δ(Qx) + Z_{sign·p_δ}(Qx), the exact solution near a singular point.
struct Manufactured {
  double tau;
  QuadraticForm p;
  Eigen::Matrix3d q;
  ZpField z;

  Manufactured(double tau_, double delta, int sign, const Eigen::Matrix3d& q_, int lmax)
      : tau(tau_), p(p_delta(delta, sign)), q(q_), z(build_zp(p_delta(delta, sign), 1.0, lmax)) {}

  double operator()(const Vec& x) const {
    const Vec y = q * x;
    return tau * p(y) + zp_value(z, y);
  }
};

template <typename F>
ScalarGrid sample_cube(const F& f, double half_width, int n) {
  ScalarGrid g = ScalarGrid::cube(Vec::Zero(), half_width, n);
  g.fill([&](const Vec& x) { return f(x); });
  return g;
}

// Blow-up records of an analytic field, each scale sampled on its own grid so
// every level is equally resolved.
std::vector<BlowupRecord> analytic_records(const Manufactured& u, double r0, int levels, int n) {
  std::vector<BlowupRecord> out;
  for (int j = 0; j <= levels; ++j) {
    const double r = r0 * std::ldexp(1.0, -j);
    const ScalarGrid g = sample_cube(u, r, n);
    BlowupRecord rec;
    rec.j = j;
    rec.r = r;
    rec.pi = project(g, r, Vec::Zero());
    rec.canonical = canonicalize(rec.pi);
    for (std::size_t i = 0; i < g.values.size(); ++i) rec.sup_u = std::max(rec.sup_u, std::abs(g.values[i]) / (r * r));
    out.push_back(rec);
  }
  return out;
}

std::vector<double> kappa_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 99; ++i) g.push_back(0.005 * i);
  return g;
}

// ---------------------------------------------------------------- quadform

CheckResult check_canonical_roundtrip(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed);
  double worst = 0.0;
  int sign_errors = 0;
  for (int i = 0; i < 10000; ++i) {
    const int sign = unit(rng) < 0.5 ? 1 : -1;
    const double delta = 0.5 * unit(rng);
    const double tau = 0.1 + 100.0 * unit(rng);
    const Eigen::Matrix3d q = random_rotation(rng);
    const QuadraticForm p = tau * rotate(p_delta(delta, sign), q) + (unit(rng) - 0.5) * QuadraticForm::identity();
    const CanonicalForm c = canonicalize(p);
    worst = std::max({worst, std::abs(c.delta - delta), std::abs(c.tau - tau) / tau});
    if (c.sign != sign && delta < 0.5 - 1e-6) ++sign_errors;
  }
  return upper("quadform.canonical_roundtrip", worst + sign_errors, 1e-10, o,
               "10^4 random forms; sign errors " + std::to_string(sign_errors));
}

CheckResult check_sup_norm_sampling(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 1);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    std::array<double, 6> c;
    for (double& v : c) v = 2 * unit(rng) - 1;
    const QuadraticForm p = QuadraticForm::from_coefficients(c);
    // |p| is 2-homogeneous, so its max over B1 sits on the unit sphere.
    double m = 0.0;
    for (int i = 0; i < 100000; ++i) m = std::max(m, std::abs(p(random_point(rng, 1.0).normalized())));
    worst = std::max(worst, std::abs(sup_norm(p) - m));
  }
  return upper("quadform.sup_norm_sampling", worst, 1e-3, o, "gap to the max over 10^5 samples of the unit sphere");
}

CheckResult check_rotation_invariance(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 2);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::array<double, 6> c;
    for (double& v : c) v = 2 * unit(rng) - 1;
    const QuadraticForm p = QuadraticForm::from_coefficients(c);
    worst = std::max(worst, std::abs(canonicalize(rotate(p, random_rotation(rng))).delta - canonicalize(p).delta));
  }
  return upper("quadform.rotation_invariance", worst, 1e-10, o, "delta under 1000 random rotations");
}

// ---------------------------------------------------------------- sphere

CheckResult check_orthonormality(const VerifyOptions& o) {
  const int lmax = 12;
  const SphereQuadrature q = build_quadrature(16);
  const int n = (lmax + 1) * (lmax + 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < q.weights.size(); ++i) {
    const std::vector<double> y = real_harmonics(lmax, q.nodes[i]);
    const Eigen::Map<const Eigen::VectorXd> v(y.data(), n);
    gram += q.weights[i] * v * v.transpose();
  }
  const double defect = (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  return upper("sphere.orthonormality", defect, 1e-12, o, "l <= 12 at level 16");
}

CheckResult check_round_trip(const VerifyOptions& o) {
  auto f = [](const Vec& x) {
    return 1.0 + x.x() - 2.0 * x.y() * x.z() + 3.0 * std::pow(x.z(), 4) - x.x() * x.x() * x.y() * std::pow(x.z(), 3);
  };
  const HarmonicExpansion e = expand(f, 6, build_quadrature(8));
  std::mt19937_64 rng(o.seed + 3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vec x = random_point(rng, 1.0).normalized();
    worst = std::max(worst, std::abs(eval_expansion(e, x) - f(x)));
  }
  return upper("sphere.round_trip", worst, 1e-8, o, "degree-6 polynomial at 100 points");
}

CheckResult check_parity(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 4);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    std::array<double, 6> c;
    for (double& v : c) v = 2 * unit(rng) - 1;
    const HarmonicExpansion e = expand_indicator(QuadraticForm::from_coefficients(c), 16);
    for (int l = 1; l <= 16; l += 2) {
      for (int m = -l; m <= l; ++m) worst = std::max(worst, std::abs(e(l, m)));
    }
  }
  return upper("sphere.indicator_parity", worst, 1e-10, o, "odd-l coefficients, 5 random forms");
}

// ---------------------------------------------------------------- coefficients

CheckResult check_a0(const VerifyOptions& o) {
  const CoefficientTable t = a_coefficients(0.0);
  const double err = std::max(std::abs(t.A + 4 * pi / std::sqrt(3.0)), std::abs(t.A_z + 4 * pi / (9 * std::sqrt(3.0))));
  return upper("coefficients.delta0", err, 1e-6, o, "A=-4pi/sqrt3, A_z=-4pi/(9 sqrt3)");
}

CheckResult check_a_half(const VerifyOptions& o) {
  const CoefficientTable t = a_coefficients(0.5);
  const double err = std::max(std::abs(t.A + 2 * pi), std::abs(t.A_y + 2 * pi / 3));
  return upper("coefficients.delta_half", err, 1e-6, o, "A=-2pi, A_y=-2pi/3");
}

CheckResult check_a_sum(const VerifyOptions& o) {
  double worst = 0.0, sign = -std::numeric_limits<double>::infinity();
  for (double d : uniform_grid(0.0, 0.5, 0.01)) {
    const CoefficientTable t = a_coefficients(d);
    worst = std::max(worst, std::abs(t.A_x + t.A_y + t.A_z - t.A));
    sign = std::max(sign, 3 * t.A_x - t.A);
  }
  CheckResult r = upper("coefficients.sum_identity", worst, 1e-8, o);
  r.detail = "max(3A_x - A) = " + format_short(sign, 6);
  if (!(sign < 0.0)) r.pass = false;
  return r;
}

CheckResult check_kappa_endpoints(const VerifyOptions& o) {
  return upper("kappa.endpoints", std::max(std::abs(kappa(0.0)), std::abs(kappa(0.5))), 1e-10, o);
}

CheckResult check_kappa_upper(const VerifyOptions& o) {
  double worst = -std::numeric_limits<double>::infinity();
  for (double d : kappa_grid()) worst = std::max(worst, kappa(d) - 4 * d);
  return upper("kappa.upper_bound", worst, 1e-4, o, "max of kappa - 4 delta over 0.005:0.005:0.495");
}

CheckResult check_kappa_lower(const VerifyOptions&) {
  double c0 = 0.0;
  for (double d : kappa_grid()) {
    if (kappa(d) < 2 * d - 1e-4) break;
    c0 = d;
  }
  return lower("kappa.lower_bound_c0", c0, 0.05, "largest grid c0 with kappa >= 2 delta - 1e-4 on (0, c0]");
}

CheckResult check_eta0(const VerifyOptions&) {
  return lower("zp.eta0", eta0_estimate(10.0, uniform_grid(0.0, 0.5, 0.005)), 0.05, "C = 10");
}

// ---------------------------------------------------------------- zp

CheckResult check_pi_half(const VerifyOptions& o) {
  const double c0 = std::numbers::ln2 / (3 * std::sqrt(3.0));
  const double c3 = std::numbers::ln2 / (2 * pi);
  const double e0 = form_distance(pi_of_zp(p_axisymmetric(), 0.5, 1.0), c0 * p_axisymmetric());
  const double e3 = form_distance(pi_of_zp(p_cross(), 0.5, 1.0), c3 * p_cross());
  return upper("zp.pi_half", std::max(e0, e3), 1e-6, o, "p0 -> ln2/(3 sqrt3), p3 -> ln2/(2pi)");
}

CheckResult check_log_form_equivariance(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 5);
  double worst = 0.0;
  for (int t = 0; t < 5; ++t) {
    std::array<double, 6> c;
    for (double& v : c) v = 2 * unit(rng) - 1;
    const QuadraticForm p = QuadraticForm::from_coefficients(c);
    const Eigen::Matrix3d q = random_rotation(rng);
    worst = std::max(worst, form_distance(log_form(rotate(p, q)), rotate(log_form(p), q)));
  }
  return upper("zp.log_form_equivariance", worst, 1e-6, o);
}

CheckResult check_origin(const VerifyOptions& o) {
  const ZpField z = build_zp(p_delta(0.3), 1.0);
  const double h = 1e-4;
  double worst = std::abs(zp_value(z, Vec::Zero()));
  for (int a = 0; a < 3; ++a) {
    const Vec e = h * Vec::Unit(a);
    worst = std::max(worst, std::abs(zp_value(z, e) - zp_value(z, -e)) / (2 * h));
    worst = std::max(worst, std::abs(zp_value(z, e)));
  }
  return upper("zp.origin_vanishing", worst, 1e-6, o, "value and central gradient at radius 1e-4");
}

// RMS of ΔZ + χ over sample points away from the cone.
double laplacian_rms(const QuadraticForm& p, int lmax, std::uint64_t seed) {
  const ZpField z = build_zp(p, 1.0, lmax);
  std::mt19937_64 rng(seed);
  double ss = 0.0;
  int n = 0;
  while (n < 200) {
    const Vec x = random_point(rng, 0.9);
    if (x.norm() < 0.2 || std::abs(p(x)) < 0.1 * x.squaredNorm()) continue;
    const ZpValue v = eval_zp(z, x, 2);
    const double e = v.hessian.trace() + (p(x) > 0.0 ? 1.0 : 0.0);
    ss += e * e;
    ++n;
  }
  return std::sqrt(ss / n);
}

CheckResult check_zp_laplacian(const VerifyOptions& o) {
  const QuadraticForm p = p_delta(0.2);
  const double e20 = laplacian_rms(p, 20, o.seed + 6);
  const double e40 = laplacian_rms(p, 40, o.seed + 6);
  const double e80 = laplacian_rms(p, 80, o.seed + 6);
  return upper("zp.laplacian_truncation", std::max(e40 / e20, e80 / e40), 1.0, o,
               "rms of Laplacian + indicator at lmax 20/40/80: " + format_short(e20, 4) + " " + format_short(e40, 4) +
                   " " + format_short(e80, 4));
}

// ---------------------------------------------------------------- renorm

CheckResult check_step_p0(const VerifyOptions& o) {
  const RenormState s = step(RenormState{30.0 * p_axisymmetric(), 0, 1.0});
  const double target = 30.0 + std::numbers::ln2 / (3 * std::sqrt(3.0));
  return upper("renorm.step_p0", form_distance(s.P, target * p_axisymmetric()), 1e-6, o);
}

CheckResult check_increment_bounds(const VerifyOptions&) {
  const IncrementBounds b = increment_bounds(1.0, uniform_grid(0.0, 0.5, 0.01));
  CheckResult r = lower("renorm.increment_bounds", b.min_inc, 0.05,
                        "min " + format_short(b.min_inc, 6) + " max " + format_short(b.max_inc, 6) + " (< 1)");
  if (!(b.max_inc < 1.0)) r.pass = false;
  return r;
}

CheckResult check_p3_ray(const VerifyOptions& o) {
  const Trajectory t = simulate(30.0 * p_cross(), 1.0, 100, NoiseModel::none(), o.seed);
  double worst = 0.0;
  for (const auto& r : t.records) worst = std::max(worst, std::abs(r.delta - 0.5));
  return upper("renorm.p3_ray", worst, 1e-10, o, "100 steps from 30 p3");
}

std::vector<double> delta0_grid() { return uniform_grid(0.05, 0.45, 0.05); }

CheckResult check_monotone_tau(const VerifyOptions&) {
  const IncrementBounds b = increment_bounds(1.0, uniform_grid(0.0, 0.5, 0.01));
  int violations = 0;
  for (double d : uniform_grid(0.0, 0.5, 0.05)) {
    const Trajectory t = simulate(30.0 * p_delta(d), 1.0, 1000, NoiseModel::none(), 0);
    violations += t.monotonicity_violations;
    const double tau0 = t.records.front().tau;
    for (const auto& r : t.records) {
      const double lo = r.k * b.min_inc * 0.9, hi = r.k * b.max_inc * 1.1;
      const double grown = r.tau - tau0;
      if (grown < lo - 1e-12 || grown > hi + 1e-12) ++violations;
    }
  }
  CheckResult r;
  r.name = "renorm.monotone_linear_growth";
  r.measured = violations;
  r.relation = "<=";
  r.bound = 0;
  r.pass = violations == 0;
  r.detail = "violations over 11 trajectories x 1000 steps";
  return r;
}

CheckResult check_delta_target(const VerifyOptions& o) {
  double worst = 0.0;
  for (double d : delta0_grid()) {
    const Trajectory t = simulate(30.0 * p_delta(d), 1.0, 5000, NoiseModel::none(), 0);
    worst = std::max(worst, t.records.back().delta);
  }
  return upper("renorm.delta_target", worst, 1e-3, o, "max final delta after 5000 steps, delta0 in 0.05:0.05:0.45");
}

CheckResult check_decay_envelope(const VerifyOptions&) {
  const IncrementBounds b = increment_bounds(1.0, uniform_grid(0.0, 0.5, 0.01));
  long violations = 0, checked = 0;
  for (double d : {0.05, 0.25, 0.45}) {
    const Trajectory t = simulate(30.0 * p_delta(d), 1.0, 200, NoiseModel::none(), 0);
    for (std::size_t i = 0; i + 1 < t.records.size(); ++i) {
      const auto& r = t.records[i];
      if (r.tau < 30.0) continue;
      ++checked;
      if (t.records[i + 1].delta > r.delta - 0.5 * kappa(r.delta) * b.min_inc / r.tau) ++violations;
    }
  }
  CheckResult r;
  r.name = "renorm.decay_envelope";
  r.measured = checked ? double(violations) / double(checked) : 1.0;
  r.relation = "<=";
  r.bound = 0.0;
  r.pass = violations == 0;
  r.detail = "fraction of steps above delta - 0.5 kappa min_inc / tau";
  return r;
}

CheckResult check_rate_fit(const VerifyOptions& o) {
  const Trajectory t = simulate(30.0 * p_delta(0.25), 1.0, 5000, NoiseModel::none(), 0);
  const RateFit f = rate_fit(t);
  CheckResult r = upper("renorm.rate_fit", f.residual, 0.1, o,
                        "c " + format_short(f.c, 6) + " (> 0), K " + format_short(f.K, 6));
  if (!(f.c > 0.0)) r.pass = false;
  return r;
}

CheckResult check_noise(const VerifyOptions& o) {
  double worst = 0.0;
  int i = 0;
  for (double d : delta0_grid()) {
    const Trajectory t = simulate(30.0 * p_delta(d), 1.0, 5000, NoiseModel::bounded(0.2, 1.0), o.seed + 100 + i++);
    worst = std::max(worst, t.records.back().delta);
  }
  return upper("renorm.noise_robustness", worst, 0.05, o, "bounded(0.2, 1), 5000 steps");
}

CheckResult check_renorm_equivariance(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 7);
  const Eigen::Matrix3d q = random_rotation(rng);
  const QuadraticForm p0 = 30.0 * p_delta(0.3);
  const Trajectory a = simulate(p0, 1.0, 200, NoiseModel::none(), 0);
  const Trajectory b = simulate(rotate(p0, q), 1.0, 200, NoiseModel::none(), 0);
  const auto& ra = a.records.back();
  const auto& rb = b.records.back();
  const QuadraticForm fa = rotate(rotate(p_delta(ra.delta, ra.sign), ra.rotation), q);
  const QuadraticForm fb = rotate(p_delta(rb.delta, rb.sign), rb.rotation);
  return upper("renorm.rotation_equivariance", form_distance(fa, fb), 1e-8, o, "final profiles after 200 steps");
}

// ---------------------------------------------------------------- pde

CheckResult check_pde_manufactured(const VerifyOptions& o) {
  const FieldDescriptor field = FieldDescriptor::manufactured(30.0, 0.0, Eigen::Matrix3d::Identity(), 1.0, 20);
  ProblemSpec s;
  s.domain = Domain::Ball;
  s.set_cube(Vec::Zero(), 1.0, 65);
  s.boundary = field;
  const SolveResult res = solve(s);
  const ScalarGrid ref = sample(field, s.layout());
  double num = 0.0, den = 0.0;
  for (int k = 0; k < s.dims[2]; ++k)
    for (int j = 0; j < s.dims[1]; ++j)
      for (int i = 0; i < s.dims[0]; ++i) {
        if (ref.point(i, j, k).norm() > 0.8) continue;
        num = std::max(num, std::abs(res.u(i, j, k) - ref(i, j, k)));
        den = std::max(den, std::abs(ref(i, j, k)));
      }
  CheckResult r = upper("pde.manufactured_65", num / den, 0.02, o,
                        "outer " + std::to_string(res.report.outer_iterations) + ", interior residual " +
                            format_short(res.report.residual_interior, 3));
  if (!res.report.max_principle_ok) r.pass = false;
  return r;
}

CheckResult check_pde_negative(const VerifyOptions& o) {
  ProblemSpec s;
  s.origin = Vec::Zero();
  s.h = 1.0 / 32.0;
  s.dims = {33, 33, 33};
  s.boundary = FieldDescriptor::constant(-1.0);
  const SolveResult res = solve(s);
  double worst = 0.0;
  for (double v : res.u.values) worst = std::max(worst, std::abs(v + 1.0));
  CheckResult r = upper("pde.negative_boundary", worst, 1e-8, o,
                        "positive nodes " + std::to_string(res.report.positive_nodes));
  if (res.report.positive_nodes != 0) r.pass = false;
  return r;
}

CheckResult check_pde_nonuniqueness(const VerifyOptions& o) {
  ProblemSpec s;
  s.origin = Vec::Zero();
  s.dims = {2, 2, 65};
  s.h = 1.0 / 64.0;
  s.periodic_xy = true;
  const FieldDescriptor parabola =
      FieldDescriptor::quadratic(QuadraticForm::diagonal(0.0, 0.0, -0.5), Vec(0.0, 0.0, 0.5));
  s.initial = parabola;
  const SolveResult a = solve(s);
  s.initial = FieldDescriptor::constant(0.0);
  const SolveResult b = solve(s);
  double ea = 0.0, eb = 0.0;
  for (int k = 0; k < s.dims[2]; ++k) {
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) {
        ea = std::max(ea, std::abs(a.u(i, j, k) - parabola(a.u.point(i, j, k))));
        eb = std::max(eb, std::abs(b.u(i, j, k)));
      }
  }
  return upper("pde.nonuniqueness_1d", std::max(ea, eb), 1e-6, o,
               "z(1-z)/2 error " + format_short(ea, 3) + ", zero error " + format_short(eb, 3));
}

CheckResult check_pde_order(const VerifyOptions& o) {
  // u = |x|⁴ has Δu = 20|x|² and a constant 7-point truncation error.
  std::vector<double> errors;
  std::vector<double> hs;
  for (int n : {17, 33, 65}) {
    ProblemSpec s;
    s.set_cube(Vec::Zero(), 1.0, n);
    s.f = FieldDescriptor::radial(0.0, 20.0, 2.0);
    s.psi = FieldDescriptor::constant(-100.0);
    s.boundary = FieldDescriptor::radial(0.0, 1.0, 4.0);
    s.theta = 1.0;
    s.tol_inner = 1e-10;
    const SolveResult res = solve(s);
    double e = 0.0;
    for (std::size_t i = 0; i < res.u.values.size(); ++i) {
      const Vec x = res.u.point(int(i % n), int((i / n) % n), int(i / (std::size_t(n) * n)));
      e = std::max(e, std::abs(res.u.values[i] - s.boundary(x)));
    }
    errors.push_back(e);
    hs.push_back(s.h);
  }
  const double slope = std::log(errors[1] / errors[2]) / std::log(hs[1] / hs[2]);
  return upper("pde.consistency_order", std::abs(slope - 2.0), 0.2, o,
               "slope " + format_short(slope, 5) + " on 17/33/65");
}

// ---------------------------------------------------------------- blowup

CheckResult check_projection_laws(const VerifyOptions& o) {
  const ProjectionLawsReport r = projection_laws_check();
  const double exact = std::max({r.idempotence_defect, r.quadratic_defect, r.radial_tracefree, r.radial_identity_defect});
  CheckResult c = upper("projection.idempotence", exact, 1e-10, o, "idempotence, quadratic reproduction, |x|^2 example");
  return c;
}

CheckResult check_projection_harmonic(const VerifyOptions& o) {
  const ProjectionLawsReport r = projection_laws_check();
  return upper("projection.harmonic_r_invariance", r.harmonic_r_defect, 1e-8, o,
               std::to_string(r.samples) + " samples, r in {1/4, 1/2, 1}");
}

CheckResult check_delta_extraction(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 8);
  double worst_delta = 0.0, worst_angle = 0.0;
  for (double d : {0.1, 0.25, 0.4}) {
    const Eigen::Matrix3d q = random_rotation(rng);
    const Manufactured u(30.0, d, 1, q, 20);
    const ScalarGrid g = sample_cube(u, 0.5, 41);
    const CanonicalForm c = canonicalize(project(g, 0.5, Vec::Zero()));
    worst_delta = std::max(worst_delta, std::abs(c.delta - d));
    for (int i = 0; i < 3; ++i) {
      worst_angle = std::max(worst_angle, axis_angle_deg(c.rotation.row(i).transpose(), q.row(i).transpose()));
    }
  }
  CheckResult r = upper("blowup.delta_extraction", worst_delta, 0.02, o,
                        "rotation error " + format_short(worst_angle, 4) + " deg (<= 2)");
  if (!(worst_angle <= 2.0)) r.pass = false;
  return r;
}

CheckResult check_classifier(const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 9);
  int confusion = 0, cases = 0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::Matrix3d q = random_rotation(rng);
    for (int sign : {1, -1}) {
      for (double d : {0.0, 0.5}) {
        const Manufactured u(30.0, d, sign, q, 12);
        const Classification c = classify(analytic_records(u, 0.5, 2, 25), ClassifyOptions{});
        const bool s1 = c.label == "S1_plus" || c.label == "S1_minus";
        if ((d == 0.0 && !s1) || (d == 0.5 && c.label != "S2")) ++confusion;
        ++cases;
      }
    }
  }
  CheckResult r;
  r.name = "blowup.classifier_separation";
  r.measured = confusion;
  r.relation = "<=";
  r.bound = 0;
  r.pass = confusion == 0;
  r.detail = std::to_string(cases) + " cases";
  return r;
}

CheckResult check_residue(const VerifyOptions& o) {
  // The growth model: ‖Π‖ grows by about one increment per halving while the
  // remainder u_r − Π stays bounded.
  const Manufactured u(30.0, 0.0, 1, Eigen::Matrix3d::Identity(), 20);
  const IncrementBounds b = increment_bounds(1.0, {0.0});
  double worst_ratio = 1.0, max_residue = 0.0;
  double pi0 = 0.0;
  for (int j = 0; j <= 3; ++j) {
    const double r = 0.5 * std::ldexp(1.0, -j);
    const ScalarGrid g = sample_cube(u, r, 33);
    const QuadraticForm p = project(g, r, Vec::Zero());
    double sup = 0.0, residue = 0.0;
    for (int k = 0; k < 33; ++k)
      for (int jj = 0; jj < 33; ++jj)
        for (int i = 0; i < 33; ++i) {
          const Vec x = g.point(i, jj, k);
          if (x.norm() > r) continue;
          const double v = g(i, jj, k) / (r * r);
          sup = std::max(sup, std::abs(v));
          residue = std::max(residue, std::abs(v - p(x / r)));
        }
    if (j == 0) pi0 = sup_norm(p);
    const double model = pi0 + j * b.max_inc;
    worst_ratio = std::max({worst_ratio, sup / model, model / sup});
    max_residue = std::max(max_residue, residue);
  }
  CheckResult c = upper("blowup.uniform_residue", max_residue, 1.0, o,
                        "growth ratio " + format_short(worst_ratio, 6) + " (<= 16)");
  if (!(worst_ratio <= 16.0)) c.pass = false;
  return c;
}

CheckResult check_cone_exact(const VerifyOptions& o) {
  const int n = 65;
  const ScalarGrid g = sample_cube([](const Vec& x) { return p_axisymmetric()(x); }, 1.0, n);
  ScalarGrid zero = g;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  const ConeFit f = cone_fit(free_boundary(g, zero), Vec::Zero(), FitMode::Cone);
  CheckResult r = upper("blowup.cone_fit_exact", f.residual_rms, g.h, o,
                        "axis error " + format_short(axis_angle_deg(f.axis, Vec::UnitZ()), 4) + " deg (<= 1)");
  if (!(axis_angle_deg(f.axis, Vec::UnitZ()) <= 1.0)) r.pass = false;
  return r;
}

CheckResult check_plane_exact(const VerifyOptions& o) {
  const ScalarGrid g = sample_cube([](const Vec& x) { return x.z(); }, 1.0, 33);
  ScalarGrid zero = g;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  double worst = 0.0;
  for (const auto& v : free_boundary(g, zero).vertices) worst = std::max(worst, std::abs(v.z()));
  return upper("blowup.free_boundary_plane", worst, 1e-14, o);
}

std::vector<QuadraticForm> sublevel_forms(std::uint64_t seed) {
  std::vector<QuadraticForm> ps{p_axisymmetric(), p_cross()};
  std::mt19937_64 rng(seed);
  for (int i = 0; i < 10; ++i) {
    std::array<double, 6> c;
    for (double& v : c) v = 2 * unit(rng) - 1;
    ps.push_back(QuadraticForm::from_coefficients(c));
  }
  return ps;
}

CheckResult check_sublevel_bound(const VerifyOptions&) {
  double c = 0.0;
  int monotone_violations = 0;
  std::uint64_t s = 0;
  for (const auto& p : sublevel_forms(0)) {
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const SublevelEstimate e = sublevel_measure(p, eps, 1000000, 11 + s);
      c = std::max(c, e.measure / std::pow(eps, 0.25));
      if (e.measure > prev) ++monotone_violations;
      prev = e.measure;
    }
    ++s;
  }
  CheckResult r;
  r.name = "sublevel.bound";
  r.measured = c;
  r.relation = "<=";
  r.bound = 10.0;
  r.pass = c <= 10.0 && monotone_violations == 0;
  r.detail = "C on [-1/2,1/2]^3 over p0, p3, 10 random forms, 10^6 samples";
  r.detail += "; monotonicity violations " + std::to_string(monotone_violations);
  return r;
}

CheckResult check_sublevel_slab(const VerifyOptions&) {
  const SublevelEstimate e = sublevel_measure(QuadraticForm::diagonal(1, 0, 0), 0.01, 1000000, 5);
  const double z = std::abs(e.measure - 0.1) / e.standard_error;
  CheckResult r;
  r.name = "sublevel.slab";
  r.measured = z;
  r.relation = "<=";
  r.bound = 3.0;
  r.pass = z <= 3.0;
  r.detail = "x^2, eps 0.01: " + format_short(e.measure, 6) + " vs 0.1 on [-1/2,1/2]^3, in standard errors";
  return r;
}

CheckResult check_residual_decay(const VerifyOptions&) {
  ProblemSpec s;
  const FieldDescriptor u = FieldDescriptor::manufactured(30.0, 0.0, Eigen::Matrix3d::Identity(), 1.0, 20);
  std::vector<double> d;
  for (double r : {0.5, 0.25, 0.125}) d.push_back(residual_potential(u, r, s, 33).d2g_l2);
  CheckResult c;
  c.name = "residual.decay";
  c.measured = std::max(d[1] - d[0], d[2] - d[1]);
  c.relation = "<=";
  c.bound = 0.0;
  c.pass = c.measured <= 0.0;
  c.detail = "d2g at r=1/2,1/4,1/8: " + format_short(d[0], 6) + " " + format_short(d[1], 6) + " " + format_short(d[2], 6);
  return c;
}

CheckResult check_residual_zero(const VerifyOptions& o) {
  ProblemSpec s;
  const FieldDescriptor u = FieldDescriptor::quadratic(30.0 * p_axisymmetric());
  return upper("residual.pure_quadratic", residual_potential(u, 0.5, s, 33).d2g_l2, 1e-12, o);
}

}  // namespace

const std::vector<Check>& verify_checks() {
  static const std::vector<Check> checks = {
      {"quadform.canonical_roundtrip", check_canonical_roundtrip},
      {"quadform.sup_norm_sampling", check_sup_norm_sampling},
      {"quadform.rotation_invariance", check_rotation_invariance},
      {"sphere.orthonormality", check_orthonormality},
      {"sphere.round_trip", check_round_trip},
      {"sphere.indicator_parity", check_parity},
      {"coefficients.delta0", check_a0},
      {"coefficients.delta_half", check_a_half},
      {"coefficients.sum_identity", check_a_sum},
      {"kappa.endpoints", check_kappa_endpoints},
      {"kappa.upper_bound", check_kappa_upper},
      {"kappa.lower_bound_c0", check_kappa_lower},
      {"zp.eta0", check_eta0},
      {"zp.pi_half", check_pi_half},
      {"zp.log_form_equivariance", check_log_form_equivariance},
      {"zp.origin_vanishing", check_origin},
      {"zp.laplacian_truncation", check_zp_laplacian},
      {"renorm.step_p0", check_step_p0},
      {"renorm.increment_bounds", check_increment_bounds},
      {"renorm.p3_ray", check_p3_ray},
      {"renorm.monotone_linear_growth", check_monotone_tau},
      {"renorm.delta_target", check_delta_target},
      {"renorm.decay_envelope", check_decay_envelope},
      {"renorm.rate_fit", check_rate_fit},
      {"renorm.noise_robustness", check_noise},
      {"renorm.rotation_equivariance", check_renorm_equivariance},
      {"pde.manufactured_65", check_pde_manufactured},
      {"pde.negative_boundary", check_pde_negative},
      {"pde.nonuniqueness_1d", check_pde_nonuniqueness},
      {"pde.consistency_order", check_pde_order},
      {"projection.idempotence", check_projection_laws},
      {"projection.harmonic_r_invariance", check_projection_harmonic},
      {"blowup.delta_extraction", check_delta_extraction},
      {"blowup.classifier_separation", check_classifier},
      {"blowup.uniform_residue", check_residue},
      {"blowup.cone_fit_exact", check_cone_exact},
      {"blowup.free_boundary_plane", check_plane_exact},
      {"sublevel.bound", check_sublevel_bound},
      {"sublevel.slab", check_sublevel_slab},
      {"residual.decay", check_residual_decay},
      {"residual.pure_quadratic", check_residual_zero},
  };
  return checks;
}

std::vector<CheckResult> run_verify(const VerifyOptions& opts) {
  std::vector<const Check*> selected;
  for (const auto& c : verify_checks()) {
    if (opts.filter.empty() || c.name.find(opts.filter) != std::string::npos) selected.push_back(&c);
  }
  std::vector<CheckResult> results(selected.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < selected.size(); i = next++) {
      try {
        results[i] = selected[i]->run(opts);
      } catch (const std::exception& e) {
        results[i].pass = false;
        results[i].measured = std::numeric_limits<double>::quiet_NaN();
        results[i].detail = std::string("threw ") + e.what();
      }
      results[i].name = selected[i]->name;
    }
  };
  const int n = std::max(1, std::min<int>(opts.workers, int(selected.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

std::string format_verify_report(const std::vector<CheckResult>& results) {
  std::string s;
  int passed = 0;
  for (const auto& r : results) {
    s += (r.pass ? "PASS " : "FAIL ") + r.name + "  measured=" + format_short(r.measured, 6) + " " + r.relation + " " +
         format_short(r.bound, 6);
    if (!r.detail.empty()) s += "  (" + r.detail + ")";
    s += '\n';
    passed += r.pass;
  }
  s += "verify: " + std::to_string(results.size()) + " checks, " + std::to_string(passed) + " passed, " +
       std::to_string(int(results.size()) - passed) + " failed\n";
  return s;
}

}  // namespace ufb

#pragma once

#include "ufb/jet.hpp"
#include "ufb/quadform.hpp"
#include "ufb/sphere.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ufb {

constexpr int kDefaultLevel = 64;
constexpr int kDefaultLmax = 40;

/// Surface integrals of −χ_{p_δ>0} against x², y², z² and 1.
struct CoefficientTable {
  double delta = 0.0;
  double A_x = 0.0;
  double A_y = 0.0;
  double A_z = 0.0;
  double A = 0.0;
  double kappa = 0.0;
};

/// ∫σ dS and ∫σ·x xᵀ dS for σ = −χ_{P>0}.
struct IndicatorMoments {
  double mass = 0.0;
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
};
IndicatorMoments indicator_moments(const QuadraticForm& p, int level = kDefaultLevel);

CoefficientTable a_coefficients(double delta, int level = kDefaultLevel);

/// (1+2δ)(3A_y−A)/(3A_x−A) − 1 + 2δ.
double kappa(double delta, int level = kDefaultLevel);
double kappa_from(const CoefficientTable& t);

/// The 2-homogeneous extension S₂ of the degree-2 harmonic part of −χ_{P>0}.
QuadraticForm log_form(const QuadraticForm& p, int level = kDefaultLevel);

/// Z = a·[ (1/5)·S₂(x)·(ln|x| − 1/5) + |x|²·Σ_{l≠2} c_lm·Y_lm(x/|x|)/((2−l)(3+l)) ]
/// with c_lm the harmonic coefficients of −χ_{P>0}. Solves ΔZ = −a·χ_{P>0},
/// vanishes to first order at 0, and the trace-free part of its projection
/// at radius one is zero.
struct ZpField {
  QuadraticForm source_form;
  QuadraticForm log_form;
  HarmonicExpansion tail;  // already divided by (2−l)(3+l); l = 2 entries are zero
  double amplitude = 1.0;
  int lmax = kDefaultLmax;
};

ZpField build_zp(const QuadraticForm& p, double amplitude, int lmax = kDefaultLmax,
                 int level = kDefaultLevel);

template <typename T>
T zp_eval(const ZpField& z, const T& x, const T& y, const T& w) {
  const T r2 = x * x + y * y + w * w;
  const T log_r = 0.5 * log(r2);
  T value = 0.2 * z.log_form(x, y, w) * (log_r - 0.2);
  const T inv = pow(r2, -0.5);
  value += r2 * harmonic_sum(z.lmax, z.tail.coeffs(), x * inv, y * inv, w * inv, T(1.0));
  return z.amplitude * value;
}

struct ZpValue {
  double value = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();
};

/// Value (order 0), plus gradient (1) and Hessian (2). Z(0) = 0; derivatives
/// at the origin throw OriginDerivative.
ZpValue eval_zp(const ZpField& z, const Eigen::Vector3d& x, int derivative_order = 0);
double zp_value(const ZpField& z, const Eigen::Vector3d& x);

/// Π(Z_P, r) = a·(ln r / 5)·S₂ for 0 < r ≤ 1.
QuadraticForm pi_of_zp(const QuadraticForm& p, double r, double amplitude, int level = kDefaultLevel);

/// min over the grid of sup_norm(C·p_δ + Π(Z_{p_δ}, 1/2)) − C.
double eta0_estimate(double c, const std::vector<double>& delta_grid, int level = kDefaultLevel);

/// 0, step, 2·step, … up to and including `last` (within rounding).
std::vector<double> uniform_grid(double first, double last, double step);

std::string format_coefficients_csv_row(const CoefficientTable& t);

}  // namespace ufb

#include "ufb/zp.hpp"

#include "ufb/errors.hpp"
#include "ufb/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ufb {

namespace {

// Polar Gauss points for the moment integrals; degree 2 integrands need 2.
constexpr int kMomentPolarPoints = 4;

}  // namespace

IndicatorMoments indicator_moments(const QuadraticForm& p, int level) {
  const auto split = split_indicator(p, level, kMomentPolarPoints);
  IndicatorMoments m;
  m.mass = split.offset * 4.0 * std::numbers::pi;
  m.second = split.offset * (4.0 * std::numbers::pi / 3.0) * Eigen::Matrix3d::Identity();
  double mass = 0.0;
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < split.band.nodes.size(); ++i) {
    const double w = split.band.weights[i];
    const Eigen::Vector3d& n = split.band.nodes[i];
    mass += w;
    second += w * n * n.transpose();
  }
  m.mass += split.band_sign * mass;
  m.second += split.band_sign * second;
  return m;
}

double kappa_from(const CoefficientTable& t) {
  return (1.0 + 2.0 * t.delta) * (3.0 * t.A_y - t.A) / (3.0 * t.A_x - t.A) - 1.0 + 2.0 * t.delta;
}

CoefficientTable a_coefficients(double delta, int level) {
  if (!(delta >= 0.0 && delta <= 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "delta outside [0, 1/2]: " + format_short(delta));
  }
  const auto m = indicator_moments(p_delta(delta), level);
  CoefficientTable t;
  t.delta = delta;
  t.A = m.mass;
  t.A_x = m.second(0, 0);
  t.A_y = m.second(1, 1);
  t.A_z = m.second(2, 2);
  t.kappa = kappa_from(t);
  return t;
}

double kappa(double delta, int level) { return a_coefficients(delta, level).kappa; }

QuadraticForm log_form(const QuadraticForm& p, int level) {
  const auto m = indicator_moments(p, level);
  return (15.0 / (8.0 * std::numbers::pi)) * QuadraticForm(m.second).trace_free();
}

ZpField build_zp(const QuadraticForm& p, double amplitude, int lmax, int level) {
  if (!(sup_norm(p) > 0.0)) throw Error(ErrorCode::ZeroForm, "Z_p of the zero form");
  if (!(amplitude > 0.0)) throw Error(ErrorCode::InvalidArgument, "amplitude must be positive");
  if (lmax < 2) throw Error(ErrorCode::InvalidArgument, "lmax must be >= 2");
  ZpField z;
  z.source_form = p;
  z.amplitude = amplitude;
  z.lmax = lmax;
  HarmonicExpansion e = expand_indicator(p, lmax, level);
  z.log_form = degree2_form(e);
  for (int l = 0; l <= lmax; ++l) {
    for (int m = -l; m <= l; ++m) {
      e(l, m) = l == 2 ? 0.0 : e(l, m) / double((2 - l) * (3 + l));
    }
  }
  z.tail = std::move(e);
  return z;
}

ZpValue eval_zp(const ZpField& z, const Eigen::Vector3d& x, int derivative_order) {
  ZpValue out;
  if (x.squaredNorm() == 0.0) {
    if (derivative_order >= 1) {
      throw Error(ErrorCode::OriginDerivative, "derivatives of Z_p at the origin");
    }
    return out;
  }
  if (derivative_order == 0) {
    out.value = zp_eval<double>(z, x.x(), x.y(), x.z());
    return out;
  }
  const Jet2 j = zp_eval<Jet2>(z, Jet2::variable(x.x(), 0), Jet2::variable(x.y(), 1),
                               Jet2::variable(x.z(), 2));
  out.value = j.v;
  out.gradient = j.g;
  if (derivative_order >= 2) out.hessian = j.h;
  return out;
}

double zp_value(const ZpField& z, const Eigen::Vector3d& x) {
  if (x.squaredNorm() == 0.0) return 0.0;
  return zp_eval<double>(z, x.x(), x.y(), x.z());
}

QuadraticForm pi_of_zp(const QuadraticForm& p, double r, double amplitude, int level) {
  if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorCode::InvalidArgument, "r outside (0, 1]");
  if (!(sup_norm(p) > 0.0)) throw Error(ErrorCode::ZeroForm, "Z_p of the zero form");
  return (amplitude * std::log(r) / 5.0) * log_form(p, level);
}

double eta0_estimate(double c, const std::vector<double>& delta_grid, int level) {
  double best = std::numeric_limits<double>::infinity();
  for (double d : delta_grid) {
    const QuadraticForm p = p_delta(d);
    best = std::min(best, sup_norm(c * p + pi_of_zp(p, 0.5, 1.0, level)) - c);
  }
  return best;
}

std::vector<double> uniform_grid(double first, double last, double step) {
  std::vector<double> g;
  if (!(step > 0.0)) return g;
  const long n = std::lround(std::floor((last - first) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(first + step * double(i));
  return g;
}

std::string format_coefficients_csv_row(const CoefficientTable& t) {
  return format_double(t.delta) + ',' + format_double(t.A_x) + ',' + format_double(t.A_y) + ',' +
         format_double(t.A_z) + ',' + format_double(t.A) + ',' + format_double(t.kappa);
}

}  // namespace ufb

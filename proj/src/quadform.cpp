#include "ufb/quadform.hpp"

#include "ufb/errors.hpp"
#include "ufb/format.hpp"
#include "ufb/sym_eigen3.hpp"

#include <algorithm>
#include <cmath>

namespace ufb {

QuadraticForm QuadraticForm::diagonal(double a, double b, double c) {
  return QuadraticForm(Eigen::Vector3d(a, b, c).asDiagonal().toDenseMatrix());
}

QuadraticForm QuadraticForm::from_coefficients(const std::array<double, 6>& c) {
  Eigen::Matrix3d m;
  m << c[0], c[3], c[4],  //
      c[3], c[1], c[5],   //
      c[4], c[5], c[2];
  return QuadraticForm(m);
}

std::array<double, 6> QuadraticForm::coefficients() const {
  return {m_(0, 0), m_(1, 1), m_(2, 2), m_(0, 1), m_(0, 2), m_(1, 2)};
}

QuadraticForm p_delta(double delta, int sign) {
  const double s = sign >= 0 ? 1.0 : -1.0;
  return QuadraticForm::diagonal(s * (0.5 + delta), s * (0.5 - delta), -s);
}

double evaluate(const QuadraticForm& p, const Eigen::Vector3d& x) { return p(x); }

double sup_norm(const QuadraticForm& p) {
  const auto eig = sym_eigen3<double>(p.matrix());
  return std::max(std::abs(eig.values(0)), std::abs(eig.values(2)));
}

QuadraticForm rotate(const QuadraticForm& p, const Eigen::Matrix3d& q) {
  const double defect = (q.transpose() * q - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(defect <= 1e-10)) {
    throw Error(ErrorCode::NotOrthogonal, "rotation defect " + format_short(defect));
  }
  return QuadraticForm(q.transpose() * p.matrix() * q);
}

QuadraticForm CanonicalForm::profile() const {
  return rotate(p_delta(delta, sign), rotation);
}

QuadraticForm CanonicalForm::reconstruct() const {
  return tau * profile() + (trace_part / 3.0) * QuadraticForm::identity();
}

double default_tolerance(const QuadraticForm& p) {
  return 1e-10 * std::max(1.0, p.matrix().cwiseAbs().maxCoeff());
}

namespace {

// Relative width of the band in which |λ3| and λ1 count as equal.
constexpr double kSignTie = 1e-12;

Eigen::Matrix3d proper_rows(const Eigen::Vector3d& r0, const Eigen::Vector3d& r1,
                            const Eigen::Vector3d& r2) {
  Eigen::Matrix3d q;
  q.row(0) = r0.transpose();
  q.row(1) = r1.transpose();
  q.row(2) = r2.transpose();
  // p_delta is even in y, so flipping the second row keeps the profile.
  if (q.determinant() < 0.0) q.row(1) *= -1.0;
  return q;
}

}  // namespace

CanonicalForm canonicalize(const QuadraticForm& p, std::optional<double> tol) {
  const double zero_tol = tol.value_or(default_tolerance(p));
  CanonicalForm out;
  out.trace_part = p.trace();
  const Eigen::Matrix3d t = p.matrix() - (out.trace_part / 3.0) * Eigen::Matrix3d::Identity();
  const auto eig = sym_eigen3<double>(t);
  const double l1 = eig.values(0);
  const double l2 = eig.values(1);
  const double l3 = eig.values(2);
  const double spread = std::max(std::abs(l1), std::abs(l3));
  if (!(spread >= zero_tol)) {
    throw Error(ErrorCode::ZeroForm, "trace-free part below tolerance " + format_short(zero_tol));
  }
  if (std::abs(l3) >= l1 - kSignTie * spread) {
    out.sign = 1;
    out.tau = std::abs(l3);
    out.delta = (l1 - l2) / (2.0 * out.tau);
    out.rotation = proper_rows(eig.vectors.col(0), eig.vectors.col(1), eig.vectors.col(2));
  } else {
    out.sign = -1;
    out.tau = l1;
    out.delta = (l2 - l3) / (2.0 * out.tau);
    out.rotation = proper_rows(eig.vectors.col(2), eig.vectors.col(1), eig.vectors.col(0));
  }
  out.delta = std::clamp(out.delta, 0.0, 0.5);
  return out;
}

Eigen::Matrix3d rotation_with_third_row(const Eigen::Vector3d& axis) {
  const Eigen::Vector3d a = axis.normalized();
  const Eigen::Vector3d u = detail::any_orthogonal<double>(a);
  const Eigen::Vector3d v = a.cross(u);
  Eigen::Matrix3d q;
  q.row(0) = u.transpose();
  q.row(1) = v.transpose();
  q.row(2) = a.transpose();
  return q;
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

std::string format_form_csv(const QuadraticForm& p) {
  const auto c = p.coefficients();
  std::string s;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ',';
    s += format_double(c[i]);
  }
  return s;
}

std::string format_canonical_csv(const CanonicalForm& c) {
  std::string s = std::to_string(c.sign) + ',' + format_double(c.delta) + ',' + format_double(c.tau);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += ',' + format_double(c.rotation(i, j));
  return s;
}

}  // namespace ufb

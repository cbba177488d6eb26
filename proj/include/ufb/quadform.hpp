#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>

namespace ufb {

/// Homogeneous quadratic polynomial p(x) = x^T M x on R^3 with M symmetric.
class QuadraticForm {
 public:
  QuadraticForm() : m_(Eigen::Matrix3d::Zero()) {}
  /// The matrix is symmetrized on entry.
  explicit QuadraticForm(const Eigen::Matrix3d& m) : m_(0.5 * (m + m.transpose())) {}

  static QuadraticForm diagonal(double a, double b, double c);
  /// Coefficients in the serialization order m11, m22, m33, m12, m13, m23.
  static QuadraticForm from_coefficients(const std::array<double, 6>& c);
  static QuadraticForm identity() { return QuadraticForm(Eigen::Matrix3d::Identity()); }

  const Eigen::Matrix3d& matrix() const { return m_; }
  std::array<double, 6> coefficients() const;

  double operator()(const Eigen::Vector3d& x) const { return x.dot(m_ * x); }

  /// Evaluation for arbitrary scalar-like types (dual numbers, jets).
  template <typename T>
  T operator()(const T& x, const T& y, const T& z) const {
    return m_(0, 0) * x * x + m_(1, 1) * y * y + m_(2, 2) * z * z +
           2.0 * (m_(0, 1) * x * y + m_(0, 2) * x * z + m_(1, 2) * y * z);
  }

  double trace() const { return m_.trace(); }
  QuadraticForm trace_free() const {
    return QuadraticForm(m_ - (m_.trace() / 3.0) * Eigen::Matrix3d::Identity());
  }

  QuadraticForm& operator+=(const QuadraticForm& o) {
    m_ += o.m_;
    return *this;
  }
  QuadraticForm& operator-=(const QuadraticForm& o) {
    m_ -= o.m_;
    return *this;
  }
  QuadraticForm& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend QuadraticForm operator+(QuadraticForm a, const QuadraticForm& b) { return a += b; }
  friend QuadraticForm operator-(QuadraticForm a, const QuadraticForm& b) { return a -= b; }
  friend QuadraticForm operator*(double s, QuadraticForm a) { return a *= s; }
  friend QuadraticForm operator*(QuadraticForm a, double s) { return a *= s; }
  friend QuadraticForm operator-(const QuadraticForm& a) { return QuadraticForm(-a.m_); }

 private:
  Eigen::Matrix3d m_;
};

/// ±[(1/2+δ)x² + (1/2−δ)y² − z²]; sup-norm one on the unit ball.
QuadraticForm p_delta(double delta, int sign = 1);
/// (x² + y²)/2 − z², the axisymmetric profile.
inline QuadraticForm p_axisymmetric() { return p_delta(0.0); }
/// x² − z², the cross profile.
inline QuadraticForm p_cross() { return QuadraticForm::diagonal(1.0, 0.0, -1.0); }

double evaluate(const QuadraticForm& p, const Eigen::Vector3d& x);

/// max over the closed unit ball of |p|, i.e. the spectral radius of M.
double sup_norm(const QuadraticForm& p);

/// Returns p(Q·), the form with matrix Q^T M Q. Throws NotOrthogonal unless
/// Q^T Q = I to 1e-10.
QuadraticForm rotate(const QuadraticForm& p, const Eigen::Matrix3d& q);

/// Decomposition p = sign·tau·p_delta(Q·) + (trace_part/3)|x|².
struct CanonicalForm {
  int sign = 1;
  double delta = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double tau = 0.0;
  double trace_part = 0.0;

  QuadraticForm reconstruct() const;
  /// The normalized trace-free profile sign·p_delta(Q·).
  QuadraticForm profile() const;
};

/// 1e-10 times the largest matrix entry magnitude, floored at 1e-10.
double default_tolerance(const QuadraticForm& p);

/// Splits off the trace, eigen-decomposes the rest and reads off the
/// (sign, δ, Q, τ) parametrization. Ties between the two candidate signs
/// (the δ = 1/2 ray) resolve to +1. Throws ZeroForm when τ < tol.
CanonicalForm canonicalize(const QuadraticForm& p, std::optional<double> tol = std::nullopt);

/// Rotation with `axis` as its third row, completed deterministically.
Eigen::Matrix3d rotation_with_third_row(const Eigen::Vector3d& axis);

/// Rotation about a unit axis by an angle (radians).
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle);

std::string format_form_csv(const QuadraticForm& p);
std::string format_canonical_csv(const CanonicalForm& c);

}  // namespace ufb

#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace ufb {

/// Second-order forward-mode jet in three variables: value, gradient and
/// Hessian propagated through arithmetic by the chain rule. Lets the scalar
/// templates used for harmonic evaluation produce exact derivatives.
struct Jet2 {
  double v = 0.0;
  Eigen::Vector3d g = Eigen::Vector3d::Zero();
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();

  Jet2() = default;
  Jet2(double value) : v(value) {}  // NOLINT(google-explicit-constructor)

  static Jet2 variable(double value, int axis) {
    Jet2 j(value);
    j.g(axis) = 1.0;
    return j;
  }

  Jet2& operator+=(const Jet2& o) {
    v += o.v;
    g += o.g;
    h += o.h;
    return *this;
  }
  Jet2& operator-=(const Jet2& o) {
    v -= o.v;
    g -= o.g;
    h -= o.h;
    return *this;
  }
  Jet2& operator*=(double s) {
    v *= s;
    g *= s;
    h *= s;
    return *this;
  }
  Jet2& operator*=(const Jet2& o) {
    h = v * o.h + o.v * h + g * o.g.transpose() + o.g * g.transpose();
    g = v * o.g + o.v * g;
    v *= o.v;
    return *this;
  }
};

inline Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
inline Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
inline Jet2 operator*(Jet2 a, const Jet2& b) { return a *= b; }
inline Jet2 operator*(Jet2 a, double s) { return a *= s; }
inline Jet2 operator*(double s, Jet2 a) { return a *= s; }
inline Jet2 operator-(Jet2 a) { return a *= -1.0; }

/// Applies a scalar function with known first and second derivative.
inline Jet2 chain(const Jet2& x, double f, double df, double d2f) {
  Jet2 out(f);
  out.g = df * x.g;
  out.h = df * x.h + d2f * x.g * x.g.transpose();
  return out;
}

inline Jet2 log(const Jet2& x) { return chain(x, std::log(x.v), 1.0 / x.v, -1.0 / (x.v * x.v)); }

inline Jet2 pow(const Jet2& x, double e) {
  const double p = std::pow(x.v, e);
  return chain(x, p, e * p / x.v, e * (e - 1.0) * p / (x.v * x.v));
}

// Plain-double overloads so templates written against Jet2 resolve here too.
inline double log(double x) { return std::log(x); }
inline double pow(double x, double e) { return std::pow(x, e); }

inline double value_of(double x) { return x; }
inline double value_of(const Jet2& x) { return x.v; }

}  // namespace ufb

#pragma once

#include "ufb/quadform.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace ufb {

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

struct SphereQuadrature {
  std::vector<Eigen::Vector3d> nodes;
  std::vector<double> weights;
  int exact_degree = 0;
};

/// Product rule: Gauss-Legendre in z = cos(polar angle) with `level` points
/// times 2·level uniform azimuths. Exact for polynomials of degree 2·level−1.
SphereQuadrature build_quadrature(int level);

/// Nodes and weights integrating exactly over the band
/// {μa·ya² + μb·yb² > ν·yc²} of the unit sphere, where y = R·x. Azimuths in
/// the (ya, yb) plane use per-quadrant Gauss-Legendre mirrored into all four
/// quadrants, so everything odd in a band coordinate cancels to rounding; for
/// each azimuth the polar coordinate yc runs over its exact band interval.
SphereQuadrature band_quadrature(const Eigen::Matrix3d& rows, double mu_a, double mu_b, double nu,
                                 int azimuth_points, int polar_points);

inline int harmonic_index(int l, int m) { return l * l + l + m; }

/// Real orthonormal spherical harmonics without Condon-Shortley phase,
/// evaluated as solid harmonics H_lm(x) = |x|^l Y_lm(x/|x|). Appends
/// (lmax+1)² values in harmonic_index order. With `r2` given, the |x|²
/// factor in the Legendre recurrence is replaced by it, which lets callers
/// evaluate Y_lm(x/|x|) for unit-valued inputs by passing r2 = 1.
template <typename T>
void solid_harmonics(int lmax, const T& x, const T& y, const T& z, const T& r2, std::vector<T>& out) {
  const int n = (lmax + 1) * (lmax + 1);
  out.assign(n, T(0.0));
  const double inv_sqrt4pi = 0.5 / std::sqrt(std::numbers::pi);
  T cm(1.0);  // Re (x+iy)^m
  T sm(0.0);  // Im (x+iy)^m
  double pmm = inv_sqrt4pi;
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) {
      pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      const T c_next = x * cm - y * sm;
      const T s_next = x * sm + y * cm;
      cm = c_next;
      sm = s_next;
    }
    const double root2 = m == 0 ? 1.0 : std::sqrt(2.0);
    // Column recurrence in l for fixed m; p_prev = P_{l-1,m}, p_prev2 = P_{l-2,m}.
    T p_prev2(0.0);
    T p_prev(pmm);
    for (int l = m; l <= lmax; ++l) {
      T p;
      if (l == m) {
        p = p_prev;
      } else if (l == m + 1) {
        p = std::sqrt(2.0 * m + 3.0) * z * p_prev;
      } else {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                                   (4.0 * double(l - 1) * (l - 1) - 1.0));
        p = a * (z * p_prev - b * r2 * p_prev2);
      }
      if (l > m) {
        p_prev2 = p_prev;
        p_prev = p;
      }
      if (m == 0) {
        out[harmonic_index(l, 0)] = p;
      } else {
        const T rp = root2 * p;
        out[harmonic_index(l, m)] = rp * cm;
        out[harmonic_index(l, -m)] = rp * sm;
      }
    }
  }
}

/// Σ coeffs[harmonic_index(l,m)]·H_lm(x) without materializing the basis.
/// Same recurrence and r2 convention as solid_harmonics.
template <typename T>
T harmonic_sum(int lmax, const std::vector<double>& coeffs, const T& x, const T& y, const T& z,
               const T& r2) {
  T total(0.0);
  T cm(1.0);
  T sm(0.0);
  double pmm = 0.5 / std::sqrt(std::numbers::pi);
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) {
      pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      const T c_next = x * cm - y * sm;
      const T s_next = x * sm + y * cm;
      cm = c_next;
      sm = s_next;
    }
    bool any = false;
    for (int l = m; l <= lmax && !any; ++l) {
      any = coeffs[harmonic_index(l, m)] != 0.0 || coeffs[harmonic_index(l, -m)] != 0.0;
    }
    if (!any) continue;
    T col_c(0.0);
    T col_s(0.0);
    T p_prev2(0.0);
    T p_prev(pmm);
    for (int l = m; l <= lmax; ++l) {
      T p;
      if (l == m) {
        p = p_prev;
      } else if (l == m + 1) {
        p = std::sqrt(2.0 * m + 3.0) * z * p_prev;
      } else {
        const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
        const double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                                   (4.0 * double(l - 1) * (l - 1) - 1.0));
        p = a * (z * p_prev - b * r2 * p_prev2);
      }
      if (l > m) {
        p_prev2 = p_prev;
        p_prev = p;
      }
      const double cc = coeffs[harmonic_index(l, m)];
      const double cs = m == 0 ? 0.0 : coeffs[harmonic_index(l, -m)];
      if (cc != 0.0) col_c += cc * p;
      if (cs != 0.0) col_s += cs * p;
    }
    if (m == 0) {
      total += col_c;
    } else {
      total += std::sqrt(2.0) * (col_c * cm + col_s * sm);
    }
  }
  return total;
}

template <typename T>
void solid_harmonics(int lmax, const T& x, const T& y, const T& z, std::vector<T>& out) {
  solid_harmonics(lmax, x, y, z, x * x + y * y + z * z, out);
}

/// Values of Y_lm at a unit vector.
std::vector<double> real_harmonics(int lmax, const Eigen::Vector3d& unit);

class HarmonicExpansion {
 public:
  HarmonicExpansion() = default;
  explicit HarmonicExpansion(int lmax) : lmax_(lmax), coeffs_((lmax + 1) * (lmax + 1), 0.0) {}

  int lmax() const { return lmax_; }
  double& operator()(int l, int m) { return coeffs_[harmonic_index(l, m)]; }
  double operator()(int l, int m) const { return coeffs_[harmonic_index(l, m)]; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  std::vector<double>& coeffs() { return coeffs_; }

  double squared_norm() const;

 private:
  int lmax_ = 0;
  std::vector<double> coeffs_;
};

using SphereFunction = std::function<double(const Eigen::Vector3d&)>;

/// c_lm = Σ w_i f(n_i) Y_lm(n_i), each sum compensated and in node order.
HarmonicExpansion expand(const SphereFunction& f, int lmax, const SphereQuadrature& q);

/// Expansion of σ = −χ_{P>0}. The positive set is integrated as a band in the
/// eigenframe of P (or as the complement of the band of −P), so the result
/// is exact in the polar direction and spectrally accurate in azimuth.
HarmonicExpansion expand_indicator(const QuadraticForm& p, int lmax, int level = 64);

/// Throws NotUnit unless |x| = 1 within 1e-10.
double eval_expansion(const HarmonicExpansion& e, const Eigen::Vector3d& x);

/// The trace-free form whose restriction to S² is the l = 2 part of e.
QuadraticForm degree2_form(const HarmonicExpansion& e);

/// Quadrature nodes covering σ = −χ_{P>0} split as constant + band:
/// σ = offset + sign·χ_band with the returned band nodes. Shared by the
/// indicator expansion and the coefficient integrals.
struct IndicatorSplit {
  double offset = 0.0;
  double band_sign = 0.0;
  SphereQuadrature band;
};
IndicatorSplit split_indicator(const QuadraticForm& p, int azimuth_points, int polar_points);

std::string format_expansion_csv(const HarmonicExpansion& e);

}  // namespace ufb

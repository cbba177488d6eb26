#include "ufb/sphere.hpp"

#include "ufb/errors.hpp"
#include "ufb/format.hpp"
#include "ufb/sym_eigen3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ufb {

namespace {

// Neumaier's variant of Kahan summation.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

SphereQuadrature build_quadrature(int level) {
  if (level < 1) throw Error(ErrorCode::InvalidArgument, "quadrature level must be >= 1");
  std::vector<double> t, w;
  gauss_legendre(level, t, w);
  const int naz = 2 * level;
  SphereQuadrature q;
  q.exact_degree = 2 * level - 1;
  q.nodes.reserve(static_cast<std::size_t>(level) * naz);
  q.weights.reserve(static_cast<std::size_t>(level) * naz);
  const double dphi = 2.0 * std::numbers::pi / naz;
  for (int i = 0; i < level; ++i) {
    const double s = std::sqrt(std::max(0.0, 1.0 - t[i] * t[i]));
    for (int j = 0; j < naz; ++j) {
      const double phi = (j + 0.5) * dphi;
      q.nodes.emplace_back(s * std::cos(phi), s * std::sin(phi), t[i]);
      q.weights.push_back(w[i] * dphi);
    }
  }
  return q;
}

SphereQuadrature band_quadrature(const Eigen::Matrix3d& rows, double mu_a, double mu_b, double nu,
                                 int azimuth_points, int polar_points) {
  std::vector<double> ta, wa, tz, wz;
  gauss_legendre(azimuth_points, ta, wa);
  gauss_legendre(polar_points, tz, wz);
  const Eigen::Vector3d ea = rows.row(0).transpose();
  const Eigen::Vector3d eb = rows.row(1).transpose();
  const Eigen::Vector3d ec = rows.row(2).transpose();
  const double quarter = 0.25 * std::numbers::pi;
  SphereQuadrature q;
  q.exact_degree = 2 * polar_points - 1;
  for (int i = 0; i < azimuth_points; ++i) {
    const double phi0 = quarter * (ta[i] + 1.0);
    const double wphi = quarter * wa[i];
    const double c = std::cos(phi0);
    const double s = std::sin(phi0);
    const double g = mu_a * c * c + mu_b * s * s;
    if (!(g > 0.0)) continue;
    const double zs = std::sqrt(g / (g + nu));
    const double cs[4][2] = {{c, s}, {-c, s}, {-c, -s}, {c, -s}};
    for (const auto& quadrant : cs) {
      const Eigen::Vector3d dir = quadrant[0] * ea + quadrant[1] * eb;
      for (int j = 0; j < polar_points; ++j) {
        const double z = zs * tz[j];
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        q.nodes.push_back(rho * dir + z * ec);
        q.weights.push_back(wphi * zs * wz[j]);
      }
    }
  }
  return q;
}

IndicatorSplit split_indicator(const QuadraticForm& p, int azimuth_points, int polar_points) {
  const auto eig = sym_eigen3<double>(p.matrix());
  const double scale = std::max(std::abs(eig.values(0)), std::abs(eig.values(2)));
  if (!(scale > 0.0)) throw Error(ErrorCode::ZeroForm, "indicator of the zero form");
  const Eigen::Vector3d lam = eig.values / scale;
  IndicatorSplit out;
  if (lam(0) <= 0.0) return out;  // {P>0} is empty
  if (lam(2) >= 0.0) {            // {P>0} is the full sphere up to a null set
    out.offset = -1.0;
    return out;
  }
  Eigen::Matrix3d rows;
  if (lam(1) >= 0.0) {
    rows.row(0) = eig.vectors.col(0).transpose();
    rows.row(1) = eig.vectors.col(1).transpose();
    rows.row(2) = eig.vectors.col(2).transpose();
    out.band_sign = -1.0;
    out.band = band_quadrature(rows, lam(0), lam(1), -lam(2), azimuth_points, polar_points);
  } else {
    rows.row(0) = eig.vectors.col(2).transpose();
    rows.row(1) = eig.vectors.col(1).transpose();
    rows.row(2) = eig.vectors.col(0).transpose();
    out.offset = -1.0;
    out.band_sign = 1.0;
    out.band = band_quadrature(rows, -lam(2), -lam(1), lam(0), azimuth_points, polar_points);
  }
  return out;
}

std::vector<double> real_harmonics(int lmax, const Eigen::Vector3d& unit) {
  std::vector<double> y;
  solid_harmonics<double>(lmax, unit.x(), unit.y(), unit.z(), 1.0, y);
  return y;
}

double HarmonicExpansion::squared_norm() const {
  CompensatedSum s;
  for (double c : coeffs_) s.add(c * c);
  return s.value();
}

namespace {

HarmonicExpansion weighted_expansion(int lmax, const std::vector<Eigen::Vector3d>& nodes,
                                     const std::vector<double>& values) {
  HarmonicExpansion e(lmax);
  const int n = (lmax + 1) * (lmax + 1);
  std::vector<CompensatedSum> acc(n);
  std::vector<double> y;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (values[i] == 0.0) continue;
    const Eigen::Vector3d u = nodes[i].normalized();
    solid_harmonics<double>(lmax, u.x(), u.y(), u.z(), 1.0, y);
    for (int k = 0; k < n; ++k) acc[k].add(values[i] * y[k]);
  }
  for (int k = 0; k < n; ++k) e.coeffs()[k] = acc[k].value();
  return e;
}

}  // namespace

HarmonicExpansion expand(const SphereFunction& f, int lmax, const SphereQuadrature& q) {
  std::vector<double> values(q.nodes.size());
  for (std::size_t i = 0; i < q.nodes.size(); ++i) values[i] = q.weights[i] * f(q.nodes[i]);
  return weighted_expansion(lmax, q.nodes, values);
}

HarmonicExpansion expand_indicator(const QuadraticForm& p, int lmax, int level) {
  const auto split = split_indicator(p, level, lmax / 2 + 2);
  std::vector<double> values(split.band.nodes.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = split.band_sign * split.band.weights[i];
  HarmonicExpansion e = weighted_expansion(lmax, split.band.nodes, values);
  e(0, 0) += split.offset * 2.0 * std::sqrt(std::numbers::pi);
  return e;
}

double eval_expansion(const HarmonicExpansion& e, const Eigen::Vector3d& x) {
  const double defect = std::abs(x.norm() - 1.0);
  if (!(defect <= 1e-10)) throw Error(ErrorCode::NotUnit, "|x| - 1 = " + format_short(defect));
  const auto y = real_harmonics(e.lmax(), x);
  CompensatedSum s;
  for (std::size_t k = 0; k < y.size(); ++k) s.add(e.coeffs()[k] * y[k]);
  return s.value();
}

QuadraticForm degree2_form(const HarmonicExpansion& e) {
  if (e.lmax() < 2) throw Error(ErrorCode::InvalidArgument, "degree2_form needs lmax >= 2");
  auto h = [&](const Eigen::Vector3d& x) {
    std::vector<double> v;
    solid_harmonics<double>(2, x.x(), x.y(), x.z(), v);
    double s = 0.0;
    for (int m = -2; m <= 2; ++m) s += e(2, m) * v[harmonic_index(2, m)];
    return s;
  };
  Eigen::Matrix3d m;
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  for (int i = 0; i < 3; ++i) m(i, i) = h(id.col(i));
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      m(i, j) = 0.5 * (h(id.col(i) + id.col(j)) - m(i, i) - m(j, j));
      m(j, i) = m(i, j);
    }
  }
  return QuadraticForm(m);
}

std::string format_expansion_csv(const HarmonicExpansion& e) {
  std::string s = "l,m,coeff\n";
  for (int l = 0; l <= e.lmax(); ++l) {
    for (int m = -l; m <= l; ++m) {
      s += std::to_string(l) + ',' + std::to_string(m) + ',' + format_double(e(l, m)) + '\n';
    }
  }
  return s;
}

}  // namespace ufb

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ufb {

template <typename Scalar>
struct SymEigen3 {
  Eigen::Matrix<Scalar, 3, 1> values;   // descending
  Eigen::Matrix<Scalar, 3, 3> vectors;  // column i belongs to values(i)
};

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> any_orthogonal(const Eigen::Matrix<Scalar, 3, 1>& v) {
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  Eigen::Index least = 0;
  v.cwiseAbs().minCoeff(&least);
  Vec axis = Vec::Zero();
  axis(least) = Scalar(1);
  return v.cross(axis).normalized();
}

// Eigenvector of B for an eigenvalue separated from the other two, built from
// the best-conditioned cross product of two rows of (B - lambda I).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> isolated_vector(const Eigen::Matrix<Scalar, 3, 3>& b, Scalar lambda) {
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  const Eigen::Matrix<Scalar, 3, 3> m = b - lambda * Eigen::Matrix<Scalar, 3, 3>::Identity();
  const Vec r0 = m.row(0).transpose();
  const Vec r1 = m.row(1).transpose();
  const Vec r2 = m.row(2).transpose();
  Vec candidates[3] = {r0.cross(r1), r0.cross(r2), r1.cross(r2)};
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (candidates[i].squaredNorm() > candidates[best].squaredNorm()) best = i;
  }
  if (candidates[best].squaredNorm() == Scalar(0)) return Vec::UnitZ();
  return candidates[best].normalized();
}

// One guarded Newton step on det(B - x I) = 0.
template <typename Scalar>
Scalar polish_root(const Eigen::Matrix<Scalar, 3, 3>& b, Scalar x) {
  const Scalar c2 = b.trace();
  const Scalar c1 = b(0, 0) * b(1, 1) + b(0, 0) * b(2, 2) + b(1, 1) * b(2, 2) - b(0, 1) * b(0, 1) -
                    b(0, 2) * b(0, 2) - b(1, 2) * b(1, 2);
  const Scalar c0 = b.determinant();
  const Scalar f = ((-x + c2) * x - c1) * x + c0;
  const Scalar df = (Scalar(-3) * x + Scalar(2) * c2) * x - c1;
  if (std::abs(df) < Scalar(1e-6)) return x;
  const Scalar step = f / df;
  if (std::abs(step) > Scalar(1e-6)) return x;
  return x - step;
}

}  // namespace detail

/// Closed-form eigendecomposition of a symmetric 3x3 matrix.
///
/// Eigenvalues come from the trigonometric solution of the characteristic
/// cubic followed by one Newton step each. The eigenvector of the most
/// isolated eigenvalue is taken from a cross product of rows; the remaining
/// pair is resolved exactly as a 2x2 problem in its orthogonal complement, so
/// repeated eigenvalues still yield an orthonormal basis.
template <typename Scalar>
SymEigen3<Scalar> sym_eigen3(const Eigen::Matrix<Scalar, 3, 3>& a) {
  using Mat = Eigen::Matrix<Scalar, 3, 3>;
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  SymEigen3<Scalar> out;
  const Scalar scale = a.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) {
    out.values.setZero();
    out.vectors.setIdentity();
    return out;
  }
  const Mat b = a / scale;
  const Scalar q = b.trace() / Scalar(3);
  const Mat c = b - q * Mat::Identity();
  const Scalar p = std::sqrt(c.squaredNorm() / Scalar(6));
  if (p == Scalar(0)) {
    out.values.setConstant(q * scale);
    out.vectors.setIdentity();
    return out;
  }
  const Scalar r = std::clamp((c / p).determinant() / Scalar(2), Scalar(-1), Scalar(1));
  const Scalar phi = std::acos(r) / Scalar(3);
  const Scalar third = Scalar(2) * std::numbers::pi_v<Scalar> / Scalar(3);
  Scalar mu0 = q + Scalar(2) * p * std::cos(phi);
  Scalar mu2 = q + Scalar(2) * p * std::cos(phi + third);
  Scalar mu1 = Scalar(3) * q - mu0 - mu2;
  mu0 = detail::polish_root(b, mu0);
  mu1 = detail::polish_root(b, mu1);
  mu2 = detail::polish_root(b, mu2);
  Scalar mu[3] = {mu0, mu1, mu2};
  std::sort(mu, mu + 3, [](Scalar x, Scalar y) { return x > y; });

  const bool top_isolated = (mu[0] - mu[1]) >= (mu[1] - mu[2]);
  const Scalar iso_value = top_isolated ? mu[0] : mu[2];
  const Vec v = detail::isolated_vector(b, iso_value);
  const Vec u = detail::any_orthogonal(v);
  const Vec w = v.cross(u);
  const Scalar uu = u.dot(b * u);
  const Scalar uw = u.dot(b * w);
  const Scalar ww = w.dot(b * w);
  const Scalar theta = Scalar(0.5) * std::atan2(Scalar(2) * uw, uu - ww);
  const Vec e_hi = std::cos(theta) * u + std::sin(theta) * w;
  const Vec e_lo = -std::sin(theta) * u + std::cos(theta) * w;

  Vec vecs[3];
  if (top_isolated) {
    vecs[0] = v;
    vecs[1] = e_hi;
    vecs[2] = e_lo;
  } else {
    vecs[0] = e_hi;
    vecs[1] = e_lo;
    vecs[2] = v;
  }
  Scalar vals[3];
  for (int i = 0; i < 3; ++i) vals[i] = vecs[i].dot(b * vecs[i]);
  int order[3] = {0, 1, 2};
  std::sort(order, order + 3, [&](int i, int j) { return vals[i] > vals[j]; });
  for (int i = 0; i < 3; ++i) {
    out.values(i) = vals[order[i]] * scale;
    out.vectors.col(i) = vecs[order[i]];
  }
  return out;
}

}  // namespace ufb

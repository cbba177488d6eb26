#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace ufb {

/// Uniform-node field on an axis-aligned box; node (i,j,k) sits at
/// origin + h·(i,j,k). Storage is x-fastest.
template <typename Scalar>
struct Grid3 {
  using Point = Eigen::Matrix<Scalar, 3, 1>;

  Point origin = Point::Zero();
  Scalar h = Scalar(1);
  std::array<int, 3> dims{2, 2, 2};
  std::vector<Scalar> values;

  Grid3() = default;
  Grid3(const Point& o, Scalar spacing, std::array<int, 3> n, Scalar fill = Scalar(0))
      : origin(o), h(spacing), dims(n), values(std::size_t(n[0]) * n[1] * n[2], fill) {}

  /// n nodes per axis spanning [center − R, center + R]³.
  static Grid3 cube(const Point& center, Scalar half_width, int n) {
    return Grid3(center - Point::Constant(half_width), Scalar(2) * half_width / Scalar(n - 1),
                 {n, n, n});
  }

  std::size_t size() const { return values.size(); }
  std::size_t index(int i, int j, int k) const {
    return std::size_t(i) + std::size_t(dims[0]) * (std::size_t(j) + std::size_t(dims[1]) * k);
  }
  Scalar& operator()(int i, int j, int k) { return values[index(i, j, k)]; }
  Scalar operator()(int i, int j, int k) const { return values[index(i, j, k)]; }
  Point point(int i, int j, int k) const { return origin + h * Point(Scalar(i), Scalar(j), Scalar(k)); }
  Point upper() const {
    return origin + h * Point(Scalar(dims[0] - 1), Scalar(dims[1] - 1), Scalar(dims[2] - 1));
  }

  bool same_layout(const Grid3& o) const {
    return dims == o.dims && std::abs(h - o.h) <= Scalar(1e-12) * h &&
           (origin - o.origin).cwiseAbs().maxCoeff() <= Scalar(1e-12) * std::max(Scalar(1), h);
  }

  template <typename F>
  void fill(F&& f) {
    for (int k = 0; k < dims[2]; ++k)
      for (int j = 0; j < dims[1]; ++j)
        for (int i = 0; i < dims[0]; ++i) (*this)(i, j, k) = f(point(i, j, k));
  }

  /// Trilinear interpolation; points outside the box are clamped to it.
  Scalar interpolate(const Point& x) const {
    Scalar t[3];
    int c[3];
    for (int a = 0; a < 3; ++a) {
      const Scalar s = std::clamp((x(a) - origin(a)) / h, Scalar(0), Scalar(dims[a] - 1));
      c[a] = std::min(int(std::floor(s)), dims[a] - 2);
      t[a] = s - Scalar(c[a]);
    }
    Scalar v(0);
    for (int dk = 0; dk < 2; ++dk)
      for (int dj = 0; dj < 2; ++dj)
        for (int di = 0; di < 2; ++di) {
          const Scalar w = (di ? t[0] : 1 - t[0]) * (dj ? t[1] : 1 - t[1]) * (dk ? t[2] : 1 - t[2]);
          if (w != Scalar(0)) v += w * (*this)(c[0] + di, c[1] + dj, c[2] + dk);
        }
    return v;
  }

  bool contains(const Point& x) const {
    const Point hi = upper();
    for (int a = 0; a < 3; ++a)
      if (x(a) < origin(a) || x(a) > hi(a)) return false;
    return true;
  }
};

using ScalarGrid = Grid3<double>;

}  // namespace ufb

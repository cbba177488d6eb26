#include "ufb/blowup.hpp"

#include "ufb/errors.hpp"
#include "ufb/format.hpp"
#include "ufb/sym_eigen3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <unordered_map>

namespace ufb {

namespace {

#include "marching_cubes_tables.inc"

// The 18 non-central points of the Hessian stencil, in units of h.
const std::array<Eigen::Vector3i, 18>& stencil_offsets() {
  static const std::array<Eigen::Vector3i, 18> offsets = [] {
    std::array<Eigen::Vector3i, 18> o;
    int n = 0;
    for (int a = 0; a < 3; ++a) {
      for (int s : {-1, 1}) {
        Eigen::Vector3i v = Eigen::Vector3i::Zero();
        v(a) = s;
        o[n++] = v;
      }
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        for (int sa : {-1, 1}) {
          for (int sb : {-1, 1}) {
            Eigen::Vector3i v = Eigen::Vector3i::Zero();
            v(a) = sa;
            v(b) = sb;
            o[n++] = v;
          }
        }
      }
    }
    return o;
  }();
  return offsets;
}

// Index box of nodes within distance r of x0, clipped to the grid.
void node_range(const ScalarGrid& u, const Eigen::Vector3d& x0, double r, int lo[3], int hi[3]) {
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, int(std::ceil((x0(a) - r - u.origin(a)) / u.h - 1e-9)));
    hi[a] = std::min(u.dims[a] - 1, int(std::floor((x0(a) + r - u.origin(a)) / u.h + 1e-9)));
  }
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

double angle_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double c = std::clamp(std::abs(a.normalized().dot(b.normalized())), 0.0, 1.0);
  return std::acos(c);
}

Eigen::Vector3d oriented(Eigen::Vector3d v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return v(k) < 0.0 ? Eigen::Vector3d(-v) : v;
}

}  // namespace

Eigen::Matrix3d node_hessian(const ScalarGrid& u, int i, int j, int k) {
  const double inv_h2 = 1.0 / (u.h * u.h);
  const int c[3] = {i, j, k};
  auto at = [&](int di, int dj, int dk) { return u(c[0] + di, c[1] + dj, c[2] + dk); };
  Eigen::Matrix3d hm;
  const double u0 = at(0, 0, 0);
  hm(0, 0) = (at(1, 0, 0) - 2.0 * u0 + at(-1, 0, 0)) * inv_h2;
  hm(1, 1) = (at(0, 1, 0) - 2.0 * u0 + at(0, -1, 0)) * inv_h2;
  hm(2, 2) = (at(0, 0, 1) - 2.0 * u0 + at(0, 0, -1)) * inv_h2;
  hm(0, 1) = hm(1, 0) = 0.25 * (at(1, 1, 0) - at(1, -1, 0) - at(-1, 1, 0) + at(-1, -1, 0)) * inv_h2;
  hm(0, 2) = hm(2, 0) = 0.25 * (at(1, 0, 1) - at(1, 0, -1) - at(-1, 0, 1) + at(-1, 0, -1)) * inv_h2;
  hm(1, 2) = hm(2, 1) = 0.25 * (at(0, 1, 1) - at(0, 1, -1) - at(0, -1, 1) + at(0, -1, -1)) * inv_h2;
  return hm;
}

QuadraticForm project(const ScalarGrid& u, double r, const Eigen::Vector3d& x0) {
  if (!(r >= kMinNodesPerRadius * u.h * (1.0 - 1e-12))) {
    throw Error(ErrorCode::TooCoarse, "radius " + format_short(r) + " spans " + format_short(r / u.h, 4) +
                                          " grid spacings, need " + format_short(kMinNodesPerRadius, 3));
  }
  const Eigen::Vector3d lo_pt = u.origin;
  const Eigen::Vector3d hi_pt = u.upper();
  for (int a = 0; a < 3; ++a) {
    if (x0(a) - r < lo_pt(a) - 1e-12 || x0(a) + r > hi_pt(a) + 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "projection ball leaves the grid");
    }
  }
  int lo[3], hi[3];
  node_range(u, x0, r, lo, hi);
  const double r2 = r * r * (1.0 + 1e-12);
  Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
  long count = 0;
  for (int k = std::max(lo[2], 1); k <= std::min(hi[2], u.dims[2] - 2); ++k) {
    for (int j = std::max(lo[1], 1); j <= std::min(hi[1], u.dims[1] - 2); ++j) {
      for (int i = std::max(lo[0], 1); i <= std::min(hi[0], u.dims[0] - 2); ++i) {
        const Eigen::Vector3d d = u.point(i, j, k) - x0;
        bool inside = true;
        for (const auto& s : stencil_offsets()) {
          if ((d + u.h * s.cast<double>()).squaredNorm() > r2) {
            inside = false;
            break;
          }
        }
        if (!inside) continue;
        sum += node_hessian(u, i, j, k);
        ++count;
      }
    }
  }
  if (count == 0) throw Error(ErrorCode::TooCoarse, "no node has its stencil inside the ball");
  return QuadraticForm((0.5 / double(count)) * sum);
}

std::vector<std::pair<std::string, double (*)(const Eigen::Vector3d&)>> harmonic_samples() {
  using V = const Eigen::Vector3d&;
  return {
      {"3z^2-|x|^2", [](V x) { return 3 * x.z() * x.z() - x.squaredNorm(); }},
      {"xy", [](V x) { return x.x() * x.y(); }},
      {"x^3-3xz^2", [](V x) { return x.x() * x.x() * x.x() - 3 * x.x() * x.z() * x.z(); }},
      {"xyz", [](V x) { return x.x() * x.y() * x.z(); }},
      {"Re(x+iy)^4", [](V x) {
         const double a = x.x() * x.x(), b = x.y() * x.y();
         return a * a - 6 * a * b + b * b;
       }},
      {"35z^4-30z^2r^2+3r^4", [](V x) {
         const double z2 = x.z() * x.z(), r2 = x.squaredNorm();
         return 35 * z2 * z2 - 30 * z2 * r2 + 3 * r2 * r2;
       }},
      {"xy(x^2-y^2)+z(x^3-3xy^2)", [](V x) {
         const double a = x.x(), b = x.y();
         return a * b * (a * a - b * b) + x.z() * (a * a * a - 3 * a * b * b);
       }},
      {"yz(3x^2-y^2)+x^2-z^2", [](V x) {
         const double a = x.x(), b = x.y();
         return x.z() * b * (3 * a * a - b * b) + a * a - x.z() * x.z();
       }},
  };
}

ProjectionLawsReport projection_laws_check(int n) {
  ProjectionLawsReport rep;
  const ScalarGrid layout = ScalarGrid::cube(Eigen::Vector3d::Zero(), 1.1, n);
  const double radii[3] = {0.25, 0.5, 1.0};
  const Eigen::Vector3d x0 = Eigen::Vector3d::Zero();
  auto max_diff = [](const QuadraticForm& a, const QuadraticForm& b) {
    return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
  };
  auto idempotence = [&](const QuadraticForm& p, double r) {
    ScalarGrid q = layout;
    q.fill([&](const Eigen::Vector3d& x) { return p(x); });
    rep.idempotence_defect = std::max(rep.idempotence_defect, max_diff(project(q, r, x0), p));
  };
  for (const auto& [name, h] : harmonic_samples()) {
    ScalarGrid g = layout;
    g.fill(h);
    QuadraticForm ref;
    for (int i = 0; i < 3; ++i) {
      const QuadraticForm p = project(g, radii[i], x0);
      if (i == 0) ref = p;
      rep.harmonic_r_defect = std::max(rep.harmonic_r_defect, max_diff(p, ref));
      idempotence(p, radii[i]);
    }
    ++rep.samples;
  }
  // A non-harmonic, non-polynomial input for idempotence.
  {
    ScalarGrid g = layout;
    g.fill([](const Eigen::Vector3d& x) { return std::exp(x.x()) * std::cos(2 * x.y()) + x.z() * x.z() * x.z() * x.z(); });
    for (double r : radii) idempotence(project(g, r, x0), r);
    ++rep.samples;
  }
  {
    const QuadraticForm q = QuadraticForm::from_coefficients({0.3, -1.2, 0.7, 0.45, -0.25, 0.9});
    ScalarGrid g = layout;
    g.fill([&](const Eigen::Vector3d& x) { return q(x) + 0.5 * x.x() - 2.0; });
    for (double r : radii) rep.quadratic_defect = std::max(rep.quadratic_defect, max_diff(project(g, r, x0), q));
    ++rep.samples;
  }
  {
    ScalarGrid g = layout;
    g.fill([](const Eigen::Vector3d& x) { return x.squaredNorm(); });
    for (double r : radii) {
      const QuadraticForm p = project(g, r, x0);
      rep.radial_tracefree = std::max(rep.radial_tracefree, p.trace_free().matrix().cwiseAbs().maxCoeff());
      rep.radial_identity_defect = std::max(rep.radial_identity_defect, max_diff(p, QuadraticForm::identity()));
    }
    ++rep.samples;
  }
  return rep;
}

ScalarGrid affine_normalize(const ScalarGrid& u, const Eigen::Vector3d& x0, double* value,
                            Eigen::Vector3d* gradient) {
  const double radius = 4.0 * u.h;
  int lo[3], hi[3];
  node_range(u, x0, radius, lo, hi);
  std::vector<Eigen::Matrix<double, 10, 1>> rows;
  std::vector<double> rhs;
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        const Eigen::Vector3d d = u.point(i, j, k) - x0;
        if (d.norm() > radius * (1.0 + 1e-12)) continue;
        Eigen::Matrix<double, 10, 1> row;
        row << 1.0, d(0), d(1), d(2), d(0) * d(0), d(1) * d(1), d(2) * d(2), d(0) * d(1), d(0) * d(2),
            d(1) * d(2);
        rows.push_back(row);
        rhs.push_back(u(i, j, k));
      }
  if (rows.size() < 10) throw Error(ErrorCode::TooCoarse, "too few nodes for the affine fit");
  Eigen::MatrixXd a(rows.size(), 10);
  Eigen::VectorXd b(rows.size());
  for (std::size_t n = 0; n < rows.size(); ++n) {
    a.row(n) = rows[n].transpose();
    b(n) = rhs[n];
  }
  // Scale the columns so the quadratic block is not dwarfed.
  Eigen::VectorXd scale(10);
  scale << 1.0, radius, radius, radius, radius * radius, radius * radius, radius * radius, radius * radius,
      radius * radius, radius * radius;
  const Eigen::VectorXd c = (a * scale.cwiseInverse().asDiagonal()).colPivHouseholderQr().solve(b);
  const double v0 = c(0);
  const Eigen::Vector3d g0 = c.segment<3>(1) / radius;
  if (value) *value = v0;
  if (gradient) *gradient = g0;
  ScalarGrid out = u;
  for (int k = 0; k < u.dims[2]; ++k)
    for (int j = 0; j < u.dims[1]; ++j)
      for (int i = 0; i < u.dims[0]; ++i) out(i, j, k) -= v0 + g0.dot(u.point(i, j, k) - x0);
  return out;
}

Classification classify(const std::vector<BlowupRecord>& records, const ClassifyOptions& opts) {
  Classification c;
  c.thresholds = opts;
  if (records.empty()) return c;
  std::vector<double> js, taus, deltas;
  for (const auto& rec : records) {
    c.max_sup_u = std::max(c.max_sup_u, rec.sup_u);
    if (!rec.canonical_defined) continue;
    js.push_back(rec.j);
    taus.push_back(rec.canonical.tau);
    deltas.push_back(rec.canonical.delta);
  }
  c.growth_slope = slope(js, taus);
  c.delta_slope = slope(js, deltas);
  if (c.max_sup_u <= opts.k_threshold && c.growth_slope < opts.growth_min) {
    c.label = "regular";
  }
  const BlowupRecord& last = records.back();
  if (!last.canonical_defined) {
    if (c.label != "regular") c.label = "undetermined";
    c.final_delta = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  c.final_delta = last.canonical.delta;
  c.final_sign = c.final_delta > 0.45 ? "n/a" : (last.canonical.sign > 0 ? "+" : "-");
  if (c.label == "regular") return c;
  if (c.final_delta <= opts.delta_s1) {
    c.label = last.canonical.sign > 0 ? "S1_plus" : "S1_minus";
  } else if (c.final_delta >= opts.delta_s2) {
    c.label = "S2";
  } else {
    c.label = "undetermined";
  }
  return c;
}

BlowupResult blowup_sequence(const ScalarGrid& u, const Eigen::Vector3d& x0, double r0, int levels,
                             const ClassifyOptions& opts) {
  BlowupResult out;
  const ScalarGrid un = affine_normalize(u, x0, &out.removed_value, &out.removed_gradient);
  for (int j = 0; j <= levels; ++j) {
    const double r = r0 * std::ldexp(1.0, -j);
    BlowupRecord rec;
    rec.j = j;
    rec.r = r;
    try {
      rec.pi = project(un, r, x0);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooCoarse || j == 0) throw;
      out.truncated = true;
      break;
    }
    try {
      rec.canonical = canonicalize(rec.pi);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroForm) throw;
      rec.canonical_defined = false;
    }
    int lo[3], hi[3];
    node_range(un, x0, r, lo, hi);
    const double inv_r2 = 1.0 / (r * r);
    for (int k = lo[2]; k <= hi[2]; ++k)
      for (int jj = lo[1]; jj <= hi[1]; ++jj)
        for (int i = lo[0]; i <= hi[0]; ++i) {
          const Eigen::Vector3d d = un.point(i, jj, k) - x0;
          if (d.squaredNorm() > r * r * (1.0 + 1e-12)) continue;
          const double v = un(i, jj, k);
          rec.sup_u = std::max(rec.sup_u, std::abs(v) * inv_r2);
          rec.residue = std::max(rec.residue, std::abs(v - rec.pi(d)) * inv_r2);
        }
    out.records.push_back(rec);
  }
  out.classification = classify(out.records, opts);
  return out;
}

Mesh free_boundary(const ScalarGrid& u, const ScalarGrid& psi) {
  if (!u.same_layout(psi)) throw Error(ErrorCode::InvalidArgument, "u and psi grids differ in layout");
  std::vector<double> v(u.size());
  for (std::size_t n = 0; n < v.size(); ++n) v[n] = u.values[n] - psi.values[n];
  Mesh mesh;
  std::unordered_map<std::uint64_t, int> edge_vertex;
  const auto& d = u.dims;
  for (int k = 0; k + 1 < d[2]; ++k) {
    for (int j = 0; j + 1 < d[1]; ++j) {
      for (int i = 0; i + 1 < d[0]; ++i) {
        double vals[8];
        std::size_t ids[8];
        int cube_index = 0;
        for (int c = 0; c < 8; ++c) {
          ids[c] = u.index(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]);
          vals[c] = v[ids[c]];
          if (vals[c] < 0.0) cube_index |= 1 << c;
        }
        const int edges = kEdgeTable[cube_index];
        if (edges == 0) continue;
        int vert[12];
        for (int e = 0; e < 12; ++e) {
          if (!(edges & (1 << e))) continue;
          int a = kEdge[e][0];
          int b = kEdge[e][1];
          if (ids[a] > ids[b]) std::swap(a, b);
          int axis = 0;
          for (int t = 0; t < 3; ++t)
            if (kCorner[a][t] != kCorner[b][t]) axis = t;
          const std::uint64_t key = std::uint64_t(ids[a]) * 3 + std::uint64_t(axis);
          auto it = edge_vertex.find(key);
          if (it == edge_vertex.end()) {
            const double t = vals[a] / (vals[a] - vals[b]);
            const Eigen::Vector3d pa = u.point(i + kCorner[a][0], j + kCorner[a][1], k + kCorner[a][2]);
            const Eigen::Vector3d pb = u.point(i + kCorner[b][0], j + kCorner[b][1], k + kCorner[b][2]);
            it = edge_vertex.emplace(key, int(mesh.vertices.size())).first;
            mesh.vertices.push_back(pa + t * (pb - pa));
          }
          vert[e] = it->second;
        }
        for (int t = 0; kTriTable[cube_index][t] != -1; t += 3) {
          const std::array<int, 3> tri{vert[kTriTable[cube_index][t]], vert[kTriTable[cube_index][t + 1]],
                                       vert[kTriTable[cube_index][t + 2]]};
          const Eigen::Vector3d n =
              (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]).cross(mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
          if (n.norm() <= 1e-14 * u.h * u.h) continue;
          mesh.triangles.push_back(tri);
        }
      }
    }
  }
  if (mesh.triangles.empty()) throw Error(ErrorCode::EmptySurface, "u - psi has no sign change");
  return mesh;
}

std::vector<double> vertex_areas(const Mesh& m) {
  std::vector<double> w(m.vertices.size(), 0.0);
  for (const auto& t : m.triangles) {
    const double area =
        0.5 * (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]).norm();
    for (int c = 0; c < 3; ++c) w[t[c]] += area / 3.0;
  }
  return w;
}

namespace {

// Trace-free symmetric matrix T minimizing Σ w (x̂ᵀ T x̂)² with |T| = 1.
Eigen::Matrix3d tracefree_quadric_fit(const std::vector<Eigen::Vector3d>& dirs, const std::vector<double>& w) {
  const double s2 = std::sqrt(0.5), s6 = 1.0 / std::sqrt(6.0);
  auto features = [&](const Eigen::Vector3d& x) {
    Eigen::Matrix<double, 5, 1> f;
    f << s2 * (x(0) * x(0) - x(1) * x(1)), s6 * (x(0) * x(0) + x(1) * x(1) - 2 * x(2) * x(2)),
        2 * s2 * x(0) * x(1), 2 * s2 * x(0) * x(2), 2 * s2 * x(1) * x(2);
    return f;
  };
  Eigen::Matrix<double, 5, 5> m = Eigen::Matrix<double, 5, 5>::Zero();
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const auto f = features(dirs[i]);
    m += w[i] * f * f.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 5, 5>> es(m);
  const Eigen::Matrix<double, 5, 1> c = es.eigenvectors().col(0);
  Eigen::Matrix3d t;
  t << s2 * c(0) + s6 * c(1), s2 * c(2), s2 * c(3),  //
      s2 * c(2), -s2 * c(0) + s6 * c(1), s2 * c(4),  //
      s2 * c(3), s2 * c(4), -2 * s6 * c(1);
  return t;
}

struct Sample {
  Eigen::Vector3d x;
  double w;
};

struct Facet {
  Eigen::Vector3d centroid;
  Eigen::Vector3d area;  // normal scaled by area
};

std::vector<Facet> facets(const Mesh& m, const Eigen::Vector3d& apex) {
  std::vector<Facet> out;
  out.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    const Eigen::Vector3d& a = m.vertices[t[0]];
    const Eigen::Vector3d& b = m.vertices[t[1]];
    const Eigen::Vector3d& c = m.vertices[t[2]];
    out.push_back({(a + b + c) / 3.0 - apex, 0.5 * (b - a).cross(c - a)});
  }
  return out;
}

// Graph slope of the surface |t| = m·s in the meridian plane, from the summed
// area vectors of the facets in one shell; returns |atan m − atan(1/√2)|.
// Summing area vectors lets the staircase noise of the triangulation cancel.
double shell_slope_defect(const std::vector<Facet>& shell, const Eigen::Vector3d& axis) {
  double as = 0.0, at = 0.0;
  for (const auto& f : shell) {
    const double t = f.centroid.dot(axis);
    const Eigen::Vector3d radial = f.centroid - t * axis;
    const double rn = radial.norm();
    if (rn == 0.0 || t == 0.0) continue;
    as += f.area.dot(radial / rn);
    at += f.area.dot((t > 0.0 ? 1.0 : -1.0) * axis);
  }
  if (shell.size() < 6 || at == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(std::atan(-as / at) - std::atan(std::sqrt(0.5)));
}

Eigen::Vector3d plane_normal(const std::vector<Sample>& pts, bool through_origin) {
  double sw = 0.0;
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  if (!through_origin) {
    for (const auto& p : pts) {
      sw += p.w;
      c += p.w * p.x;
    }
    if (sw > 0) c /= sw;
  }
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) m += p.w * (p.x - c) * (p.x - c).transpose();
  return oriented(sym_eigen3<double>(m).vectors.col(2));
}

}  // namespace

ConeFit cone_fit(const Mesh& mesh, const Eigen::Vector3d& apex, FitMode mode, const FitOptions& opts) {
  const std::vector<double> area = vertex_areas(mesh);
  std::vector<Sample> all;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (area[i] > 0.0) all.push_back({mesh.vertices[i] - apex, area[i]});
  }
  std::vector<Sample> annulus;
  std::vector<Eigen::Vector3d> dirs;
  std::vector<double> weights;
  for (const auto& s : all) {
    const double rho = s.x.norm();
    if (rho < opts.r_min || rho > opts.r_max) continue;
    annulus.push_back(s);
    dirs.push_back(s.x / rho);
    weights.push_back(s.w);
  }
  if (annulus.size() < 12) throw Error(ErrorCode::DegenerateFit, "fewer than 12 vertices in the fit annulus");
  const auto quadric = sym_eigen3<double>(tracefree_quadric_fit(dirs, weights));
  ConeFit fit;

  if (mode == FitMode::Cone) {
    // The isolated eigenvalue of 3aaᵀ − I belongs to the axis.
    const Eigen::Vector3d lam = quadric.values;
    const int iso = std::abs(lam(0) - 0.5 * (lam(1) + lam(2))) >= std::abs(lam(2) - 0.5 * (lam(0) + lam(1))) ? 0 : 2;
    Eigen::Vector3d a = quadric.vectors.col(iso);
    for (int it = 0; it < 50; ++it) {
      const Eigen::Vector3d u = detail::any_orthogonal<double>(a);
      const Eigen::Vector3d v = a.cross(u);
      Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
      Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        const double t = dirs[i].dot(a);
        const double r = 3.0 * t * t - 1.0;
        const Eigen::Vector2d jrow(6.0 * t * dirs[i].dot(u), 6.0 * t * dirs[i].dot(v));
        jtj += weights[i] * jrow * jrow.transpose();
        jtr += weights[i] * jrow * r;
      }
      const Eigen::Vector2d step = jtj.ldlt().solve(-jtr);
      if (!step.allFinite()) throw Error(ErrorCode::DegenerateFit, "singular cone normal equations");
      a = (a + step(0) * u + step(1) * v).normalized();
      if (step.norm() < 1e-14) break;
    }
    a = oriented(a);
    if (a.z() < 0.0 && std::abs(a.z()) >= 0.5) a = -a;
    fit.axis = a;
    fit.rotation = rotation_with_third_row(a);
    const double sin_a = std::sqrt(2.0 / 3.0), cos_a = std::sqrt(1.0 / 3.0);
    double num = 0.0, den = 0.0;
    for (const auto& s : annulus) {
      const double t = std::abs(s.x.dot(a));
      const double rad = std::sqrt(std::max(0.0, s.x.squaredNorm() - t * t));
      const double dist = rad * cos_a - t * sin_a;
      num += s.w * dist * dist;
      den += s.w;
    }
    fit.residual_rms = std::sqrt(num / den);
    fit.used_vertices = int(annulus.size());
    const std::vector<Facet> tris = facets(mesh, apex);
    for (double rho : opts.rho_ladder) {
      std::vector<Facet> shell;
      for (const auto& f : tris) {
        if (std::abs(f.centroid.norm() - rho) <= opts.shell_half_width * rho) shell.push_back(f);
      }
      fit.rung_defects.push_back(shell_slope_defect(shell, a));
    }
  } else {
    const Eigen::Vector3d ex = quadric.vectors.col(0);
    const Eigen::Vector3d ey = quadric.vectors.col(1);
    const Eigen::Vector3d ez = quadric.vectors.col(2);
    auto in_kc = [&](const Eigen::Vector3d& x) {
      const double y = x.dot(ey), xx = x.dot(ex), z = x.dot(ez);
      return y * y < opts.cross_c * (xx * xx + z * z);
    };
    std::vector<Sample> region;
    for (const auto& s : annulus)
      if (in_kc(s.x)) region.push_back(s);
    if (region.size() < 12) throw Error(ErrorCode::DegenerateFit, "fewer than 12 vertices inside K_c");
    Eigen::Vector3d na = oriented((ex - ez).normalized());
    Eigen::Vector3d nb = oriented((ex + ez).normalized());
    for (int it = 0; it < 20; ++it) {
      std::vector<Sample> pa, pb;
      for (const auto& s : region) (std::abs(s.x.dot(na)) <= std::abs(s.x.dot(nb)) ? pa : pb).push_back(s);
      if (pa.size() < 6 || pb.size() < 6) throw Error(ErrorCode::DegenerateFit, "a cross plane lost its vertices");
      const Eigen::Vector3d na_next = plane_normal(pa, true);
      const Eigen::Vector3d nb_next = plane_normal(pb, true);
      const bool done = (na_next - na).norm() < 1e-13 && (nb_next - nb).norm() < 1e-13;
      na = na_next;
      nb = nb_next;
      if (done) break;
    }
    fit.normal_a = na;
    fit.normal_b = nb;
    fit.dihedral_deg = std::acos(std::clamp(std::abs(na.dot(nb)), 0.0, 1.0)) * 180.0 / std::numbers::pi;
    const Eigen::Vector3d nb_aligned = na.dot(nb) < 0.0 ? Eigen::Vector3d(-nb) : nb;
    const Eigen::Vector3d rx = (na + nb_aligned).normalized();
    Eigen::Vector3d rz = (nb_aligned - na);
    rz = (rz - rz.dot(rx) * rx).normalized();
    fit.rotation.row(0) = rx.transpose();
    fit.rotation.row(1) = rz.cross(rx).transpose();
    fit.rotation.row(2) = rz.transpose();
    fit.axis = rz.cross(rx);
    double num = 0.0, den = 0.0;
    for (const auto& s : region) {
      const double dist = std::min(std::abs(s.x.dot(na)), std::abs(s.x.dot(nb)));
      num += s.w * dist * dist;
      den += s.w;
    }
    fit.residual_rms = std::sqrt(num / den);
    fit.used_vertices = int(region.size());
    for (double rho : opts.rho_ladder) {
      std::vector<Sample> sa, sb;
      for (const auto& s : all) {
        if (std::abs(s.x.norm() - rho) > opts.shell_half_width * rho || !in_kc(s.x)) continue;
        (std::abs(s.x.dot(na)) <= std::abs(s.x.dot(nb)) ? sa : sb).push_back(s);
      }
      if (sa.size() < 6 || sb.size() < 6) {
        fit.rung_defects.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      fit.rung_defects.push_back(
          std::max(angle_between(plane_normal(sa, false), na), angle_between(plane_normal(sb, false), nb)));
    }
  }
  fit.graph_c1_defect = 0.0;
  for (double d : fit.rung_defects) {
    fit.graph_c1_defect = std::isnan(d) ? d : std::max(fit.graph_c1_defect, d);
    if (std::isnan(d)) break;
  }
  return fit;
}

double plane_pair_error_deg(const ConeFit& fit, const Eigen::Vector3d& n1, const Eigen::Vector3d& n2) {
  const double direct = std::max(angle_between(fit.normal_a, n1), angle_between(fit.normal_b, n2));
  const double swapped = std::max(angle_between(fit.normal_a, n2), angle_between(fit.normal_b, n1));
  return std::min(direct, swapped) * 180.0 / std::numbers::pi;
}

double cube_sup(const QuadraticForm& p, double s) {
  const Eigen::Matrix3d& m = p.matrix();
  double best = 0.0;
  auto consider = [&](const Eigen::Vector3d& x) { best = std::max(best, std::abs(p(x))); };
  const double signs[2] = {-s, s};
  for (double a : signs)
    for (double b : signs)
      for (double c : signs) consider(Eigen::Vector3d(a, b, c));
  // Edges: one free coordinate.
  for (int f = 0; f < 3; ++f) {
    const int g1 = (f + 1) % 3, g2 = (f + 2) % 3;
    if (m(f, f) == 0.0) continue;
    for (double a : signs)
      for (double b : signs) {
        Eigen::Vector3d x;
        x(g1) = a;
        x(g2) = b;
        const double t = -(m(f, g1) * a + m(f, g2) * b) / m(f, f);
        if (std::abs(t) > s) continue;
        x(f) = t;
        consider(x);
      }
  }
  // Faces: two free coordinates.
  for (int c = 0; c < 3; ++c) {
    const int f1 = (c + 1) % 3, f2 = (c + 2) % 3;
    Eigen::Matrix2d a;
    a << m(f1, f1), m(f1, f2), m(f2, f1), m(f2, f2);
    if (std::abs(a.determinant()) <= 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff() * a.cwiseAbs().maxCoeff())) continue;
    for (double v : signs) {
      const Eigen::Vector2d t = a.fullPivLu().solve(Eigen::Vector2d(-m(f1, c) * v, -m(f2, c) * v));
      if (std::abs(t(0)) > s || std::abs(t(1)) > s) continue;
      Eigen::Vector3d x;
      x(c) = v;
      x(f1) = t(0);
      x(f2) = t(1);
      consider(x);
    }
  }
  return best;
}

SublevelEstimate sublevel_measure(const QuadraticForm& p, double eps, long samples, std::uint64_t seed,
                                  CubeConvention convention) {
  SublevelEstimate est;
  est.convention = convention;
  const double s = convention == CubeConvention::Half ? 0.5 : 1.0;
  const double volume = std::pow(2.0 * s, 3);
  est.sup = cube_sup(p, s);
  if (!(est.sup > 0.0)) {
    est.measure = volume;
    return est;
  }
  if (samples <= 0) throw Error(ErrorCode::InvalidArgument, "sample count must be positive");
  std::mt19937_64 rng(seed);
  const double inv_sup = 1.0 / est.sup;
  auto unit = [&]() { return double(rng() >> 11) * 0x1.0p-53; };
  long hits = 0;
  for (long n = 0; n < samples; ++n) {
    const Eigen::Vector3d x(s * (2.0 * unit() - 1.0), s * (2.0 * unit() - 1.0), s * (2.0 * unit() - 1.0));
    if (std::abs(p(x)) * inv_sup <= eps) ++hits;
  }
  const double frac = double(hits) / double(samples);
  est.measure = volume * frac;
  est.standard_error = volume * std::sqrt(frac * (1.0 - frac) / double(samples));
  return est;
}

std::string to_string(CubeConvention c) { return c == CubeConvention::Half ? "[-1/2,1/2]^3" : "[-1,1]^3"; }

}  // namespace ufb

#include "ufb/multigrid.hpp"

#include "ufb/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ufb {

namespace {

constexpr std::size_t kCoarseNodes = 4096;
constexpr int kDenseLimit = 4000;
constexpr int kSmoothingSweeps = 2;

struct Level {
  std::array<int, 3> dims{};
  Eigen::Vector3d inv_h2 = Eigen::Vector3d::Zero();
  std::vector<std::uint8_t> free;
  std::array<std::vector<int>, 3> plus, minus;  // per-axis neighbor coordinates
  std::array<bool, 3> coarsened{false, false, false};  // toward the next level
  double diag = 0.0;
  std::size_t size() const { return free.size(); }
  std::size_t index(int i, int j, int k) const {
    return std::size_t(i) + std::size_t(dims[0]) * (std::size_t(j) + std::size_t(dims[1]) * k);
  }
};

void build_neighbors(Level& lv, const std::array<bool, 3>& periodic) {
  for (int a = 0; a < 3; ++a) {
    const int n = lv.dims[a];
    lv.plus[a].resize(n);
    lv.minus[a].resize(n);
    for (int i = 0; i < n; ++i) {
      lv.plus[a][i] = periodic[a] ? (i + 1) % n : std::min(i + 1, n - 1);
      lv.minus[a][i] = periodic[a] ? (i - 1 + n) % n : std::max(i - 1, 0);
    }
  }
  lv.diag = 2.0 * lv.inv_h2.sum();
}

// y = A x with A = −Δ_h on free nodes, 0 on the rest.
void apply_a(const Level& lv, const std::vector<double>& x, std::vector<double>& y) {
  y.assign(lv.size(), 0.0);
  const auto& d = lv.dims;
  for (int k = 0; k < d[2]; ++k) {
    for (int j = 0; j < d[1]; ++j) {
      for (int i = 0; i < d[0]; ++i) {
        const std::size_t n = lv.index(i, j, k);
        if (!lv.free[n]) continue;
        const double sx = x[lv.index(lv.plus[0][i], j, k)] + x[lv.index(lv.minus[0][i], j, k)];
        const double sy = x[lv.index(i, lv.plus[1][j], k)] + x[lv.index(i, lv.minus[1][j], k)];
        const double sz = x[lv.index(i, j, lv.plus[2][k])] + x[lv.index(i, j, lv.minus[2][k])];
        y[n] = lv.diag * x[n] - lv.inv_h2(0) * sx - lv.inv_h2(1) * sy - lv.inv_h2(2) * sz;
      }
    }
  }
}

// One colored Gauss-Seidel half sweep for A x = b.
void relax_color(const Level& lv, std::vector<double>& x, const std::vector<double>& b, int color) {
  const auto& d = lv.dims;
  const double inv_diag = 1.0 / lv.diag;
  for (int k = 0; k < d[2]; ++k) {
    for (int j = 0; j < d[1]; ++j) {
      for (int i = (color + j + k) & 1; i < d[0]; i += 2) {
        const std::size_t n = lv.index(i, j, k);
        if (!lv.free[n]) continue;
        const double sx = x[lv.index(lv.plus[0][i], j, k)] + x[lv.index(lv.minus[0][i], j, k)];
        const double sy = x[lv.index(i, lv.plus[1][j], k)] + x[lv.index(i, lv.minus[1][j], k)];
        const double sz = x[lv.index(i, j, lv.plus[2][k])] + x[lv.index(i, j, lv.minus[2][k])];
        x[n] = (b[n] + lv.inv_h2(0) * sx + lv.inv_h2(1) * sy + lv.inv_h2(2) * sz) * inv_diag;
      }
    }
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

std::vector<std::uint8_t> box_free_mask(std::array<int, 3> dims, std::array<bool, 3> periodic) {
  std::vector<std::uint8_t> mask(std::size_t(dims[0]) * dims[1] * dims[2], 0);
  std::size_t n = 0;
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i, ++n) {
        const int c[3] = {i, j, k};
        bool inner = true;
        for (int a = 0; a < 3; ++a)
          if (!periodic[a] && (c[a] == 0 || c[a] == dims[a] - 1)) inner = false;
        mask[n] = inner ? 1 : 0;
      }
  return mask;
}

struct PoissonSolver::Impl {
  std::vector<Level> levels;
  std::array<bool, 3> periodic{};
  // Coarsest level: dense Cholesky over its free nodes, or symmetric
  // Gauss-Seidel sweeps when it is too large for that.
  std::vector<std::size_t> coarse_nodes;
  Eigen::LLT<Eigen::MatrixXd> coarse_llt;
  bool coarse_dense = false;

  void restrict_to(int l, const std::vector<double>& fine, std::vector<double>& coarse) const;
  void prolong_add(int l, const std::vector<double>& coarse, std::vector<double>& fine) const;
  void coarse_solve(const std::vector<double>& b, std::vector<double>& x) const;
  void vcycle(int l, const std::vector<double>& b, std::vector<double>& x) const;
};

void PoissonSolver::Impl::restrict_to(int l, const std::vector<double>& fine,
                                      std::vector<double>& coarse) const {
  const Level& f = levels[l];
  const Level& c = levels[l + 1];
  coarse.assign(c.size(), 0.0);
  static const double w[3] = {0.25, 0.5, 0.25};
  for (int k = 0; k < c.dims[2]; ++k) {
    for (int j = 0; j < c.dims[1]; ++j) {
      for (int i = 0; i < c.dims[0]; ++i) {
        const std::size_t cn = c.index(i, j, k);
        if (!c.free[cn]) continue;
        const int ci[3] = {i, j, k};
        int lo[3], hi[3], base[3];
        for (int a = 0; a < 3; ++a) {
          base[a] = f.coarsened[a] ? 2 * ci[a] : ci[a];
          lo[a] = f.coarsened[a] ? -1 : 0;
          hi[a] = f.coarsened[a] ? 1 : 0;
        }
        double s = 0.0;
        for (int dk = lo[2]; dk <= hi[2]; ++dk)
          for (int dj = lo[1]; dj <= hi[1]; ++dj)
            for (int di = lo[0]; di <= hi[0]; ++di) {
              const double wt = (f.coarsened[0] ? w[di + 1] : 1.0) * (f.coarsened[1] ? w[dj + 1] : 1.0) *
                                (f.coarsened[2] ? w[dk + 1] : 1.0);
              s += wt * fine[f.index(base[0] + di, base[1] + dj, base[2] + dk)];
            }
        coarse[cn] = s;
      }
    }
  }
}

void PoissonSolver::Impl::prolong_add(int l, const std::vector<double>& coarse,
                                      std::vector<double>& fine) const {
  const Level& f = levels[l];
  const Level& c = levels[l + 1];
  for (int k = 0; k < f.dims[2]; ++k) {
    for (int j = 0; j < f.dims[1]; ++j) {
      for (int i = 0; i < f.dims[0]; ++i) {
        const std::size_t fn = f.index(i, j, k);
        if (!f.free[fn]) continue;
        const int fi[3] = {i, j, k};
        int c0[3], c1[3];
        for (int a = 0; a < 3; ++a) {
          if (f.coarsened[a]) {
            c0[a] = fi[a] / 2;
            c1[a] = (fi[a] + 1) / 2;
          } else {
            c0[a] = c1[a] = fi[a];
          }
        }
        const double v = 0.125 * (coarse[c.index(c0[0], c0[1], c0[2])] + coarse[c.index(c1[0], c0[1], c0[2])] +
                                  coarse[c.index(c0[0], c1[1], c0[2])] + coarse[c.index(c1[0], c1[1], c0[2])] +
                                  coarse[c.index(c0[0], c0[1], c1[2])] + coarse[c.index(c1[0], c0[1], c1[2])] +
                                  coarse[c.index(c0[0], c1[1], c1[2])] + coarse[c.index(c1[0], c1[1], c1[2])]);
        fine[fn] += v;
      }
    }
  }
}

void PoissonSolver::Impl::coarse_solve(const std::vector<double>& b, std::vector<double>& x) const {
  const Level& lv = levels.back();
  x.assign(lv.size(), 0.0);
  if (coarse_dense) {
    Eigen::VectorXd rhs(coarse_nodes.size());
    for (std::size_t i = 0; i < coarse_nodes.size(); ++i) rhs(i) = b[coarse_nodes[i]];
    const Eigen::VectorXd sol = coarse_llt.solve(rhs);
    for (std::size_t i = 0; i < coarse_nodes.size(); ++i) x[coarse_nodes[i]] = sol(i);
    return;
  }
  for (int s = 0; s < 50; ++s) {
    relax_color(lv, x, b, 0);
    relax_color(lv, x, b, 1);
    relax_color(lv, x, b, 1);
    relax_color(lv, x, b, 0);
  }
}

void PoissonSolver::Impl::vcycle(int l, const std::vector<double>& b, std::vector<double>& x) const {
  if (l + 1 == int(levels.size())) {
    coarse_solve(b, x);
    return;
  }
  const Level& lv = levels[l];
  x.assign(lv.size(), 0.0);
  for (int s = 0; s < kSmoothingSweeps; ++s) {
    relax_color(lv, x, b, 0);
    relax_color(lv, x, b, 1);
  }
  std::vector<double> ax;
  apply_a(lv, x, ax);
  for (std::size_t n = 0; n < ax.size(); ++n) ax[n] = lv.free[n] ? b[n] - ax[n] : 0.0;
  std::vector<double> bc, xc;
  restrict_to(l, ax, bc);
  vcycle(l + 1, bc, xc);
  prolong_add(l, xc, x);
  for (int s = 0; s < kSmoothingSweeps; ++s) {
    relax_color(lv, x, b, 1);
    relax_color(lv, x, b, 0);
  }
}

PoissonSolver::PoissonSolver(std::array<int, 3> dims, double h, std::vector<std::uint8_t> free_mask,
                             std::array<bool, 3> periodic)
    : impl_(std::make_unique<Impl>()) {
  if (free_mask.size() != std::size_t(dims[0]) * dims[1] * dims[2]) {
    throw Error(ErrorCode::InvalidArgument, "mask size does not match grid");
  }
  impl_->periodic = periodic;
  Level fine;
  fine.dims = dims;
  fine.inv_h2 = Eigen::Vector3d::Constant(1.0 / (h * h));
  fine.free = std::move(free_mask);
  for (int k = 0; k < dims[2]; ++k)
    for (int j = 0; j < dims[1]; ++j)
      for (int i = 0; i < dims[0]; ++i) {
        const int c[3] = {i, j, k};
        for (int a = 0; a < 3; ++a)
          if (!periodic[a] && (c[a] == 0 || c[a] == dims[a] - 1)) fine.free[fine.index(i, j, k)] = 0;
      }
  build_neighbors(fine, periodic);
  impl_->levels.push_back(std::move(fine));

  while (impl_->levels.back().size() > kCoarseNodes) {
    Level& f = impl_->levels.back();
    Level c;
    bool any = false;
    for (int a = 0; a < 3; ++a) {
      f.coarsened[a] = !periodic[a] && f.dims[a] >= 5 && (f.dims[a] - 1) % 2 == 0;
      any = any || f.coarsened[a];
      c.dims[a] = f.coarsened[a] ? (f.dims[a] - 1) / 2 + 1 : f.dims[a];
      c.inv_h2(a) = f.coarsened[a] ? 0.25 * f.inv_h2(a) : f.inv_h2(a);
    }
    if (!any) break;
    c.free.assign(std::size_t(c.dims[0]) * c.dims[1] * c.dims[2], 0);
    for (int k = 0; k < c.dims[2]; ++k)
      for (int j = 0; j < c.dims[1]; ++j)
        for (int i = 0; i < c.dims[0]; ++i) {
          const int ci[3] = {i, j, k};
          bool ok = true;
          int fi[3];
          for (int a = 0; a < 3; ++a) {
            fi[a] = f.coarsened[a] ? 2 * ci[a] : ci[a];
            if (!periodic[a] && (ci[a] == 0 || ci[a] == c.dims[a] - 1)) ok = false;
          }
          c.free[c.index(i, j, k)] = ok && f.free[f.index(fi[0], fi[1], fi[2])];
        }
    build_neighbors(c, periodic);
    impl_->levels.push_back(std::move(c));
  }

  const Level& last = impl_->levels.back();
  for (std::size_t n = 0; n < last.size(); ++n)
    if (last.free[n]) impl_->coarse_nodes.push_back(n);
  const int m = int(impl_->coarse_nodes.size());
  if (m > 0 && m <= kDenseLimit) {
    std::vector<int> slot(last.size(), -1);
    for (int i = 0; i < m; ++i) slot[impl_->coarse_nodes[i]] = i;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    std::vector<double> e(last.size(), 0.0), col;
    for (int i = 0; i < m; ++i) {
      e[impl_->coarse_nodes[i]] = 1.0;
      apply_a(last, e, col);
      e[impl_->coarse_nodes[i]] = 0.0;
      for (int r = 0; r < m; ++r) a(r, i) = col[impl_->coarse_nodes[r]];
    }
    impl_->coarse_llt.compute(a);
    impl_->coarse_dense = impl_->coarse_llt.info() == Eigen::Success;
  }
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

int PoissonSolver::levels() const { return int(impl_->levels.size()); }
const std::vector<std::uint8_t>& PoissonSolver::free_mask() const { return impl_->levels.front().free; }

void PoissonSolver::laplacian(const std::vector<double>& u, std::vector<double>& out) const {
  apply_a(impl_->levels.front(), u, out);
  for (double& v : out) v = -v;
}

LinearReport PoissonSolver::solve(std::vector<double>& u, const std::vector<double>& rhs, double tol,
                                  int max_iterations) const {
  const Level& lv = impl_->levels.front();
  LinearReport rep;
  // Residual of A u = −rhs, i.e. r = Δ_h u − rhs on free nodes.
  std::vector<double> r, z, p, q;
  apply_a(lv, u, r);
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = lv.free[n] ? -rhs[n] - r[n] : 0.0;
  rep.residual = max_abs(r);
  if (rep.residual <= tol) {
    rep.converged = true;
    return rep;
  }
  impl_->vcycle(0, r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iterations; ++it) {
    apply_a(lv, p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0) || !std::isfinite(pq)) {
      rep.iterations = it;
      return rep;
    }
    const double alpha = rz / pq;
    for (std::size_t n = 0; n < u.size(); ++n) {
      u[n] += alpha * p[n];
      r[n] -= alpha * q[n];
    }
    rep.iterations = it;
    rep.residual = max_abs(r);
    if (!std::isfinite(rep.residual)) return rep;
    if (rep.residual <= tol) {
      rep.converged = true;
      break;
    }
    impl_->vcycle(0, r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t n = 0; n < p.size(); ++n) p[n] = z[n] + beta * p[n];
  }
  // The recursively updated residual drifts; report the true one.
  std::vector<double> lap;
  laplacian(u, lap);
  double true_res = 0.0;
  for (std::size_t n = 0; n < lap.size(); ++n)
    if (lv.free[n]) true_res = std::max(true_res, std::abs(lap[n] - rhs[n]));
  rep.residual = true_res;
  rep.converged = rep.converged && true_res <= 2.0 * tol;
  return rep;
}

}  // namespace ufb

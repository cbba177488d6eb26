#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace ufb {

/// Result of one linear solve.
struct LinearReport {
  int iterations = 0;
  double residual = 0.0;  // max-norm of Δ_h u − rhs over free nodes
  bool converged = false;
};

/// 7-point Laplacian on a node grid with a free-node mask, solved by conjugate
/// gradients preconditioned with one symmetric multigrid V-cycle (red-black
/// Gauss-Seidel, full weighting, trilinear prolongation, rediscretized coarse
/// operators). Axes coarsen independently, so thin or periodic directions are
/// left alone. Non-free nodes hold Dirichlet values.
class PoissonSolver {
 public:
  PoissonSolver(std::array<int, 3> dims, double h, std::vector<std::uint8_t> free_mask,
                std::array<bool, 3> periodic = {false, false, false});
  ~PoissonSolver();
  PoissonSolver(PoissonSolver&&) noexcept;
  PoissonSolver& operator=(PoissonSolver&&) noexcept;

  /// Solves Δ_h u = rhs on free nodes; u enters as initial guess with the
  /// boundary values already placed on non-free nodes.
  LinearReport solve(std::vector<double>& u, const std::vector<double>& rhs, double tol,
                     int max_iterations = 200) const;

  /// (Δ_h u)(node) for every free node, 0 elsewhere.
  void laplacian(const std::vector<double>& u, std::vector<double>& out) const;

  int levels() const;
  const std::vector<std::uint8_t>& free_mask() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Free-node mask for a box with Dirichlet faces (periodic axes excepted).
std::vector<std::uint8_t> box_free_mask(std::array<int, 3> dims,
                                        std::array<bool, 3> periodic = {false, false, false});

}  // namespace ufb

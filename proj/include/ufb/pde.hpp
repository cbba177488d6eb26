#pragma once

#include "ufb/errors.hpp"
#include "ufb/grid.hpp"
#include "ufb/quadform.hpp"
#include "ufb/zp.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ufb {

/// Catalog of closed-form fields used for f, ψ, boundary data and initial
/// guesses.
struct FieldDescriptor {
  enum class Kind { Constant, Affine, Quadratic, Radial, Holder, Manufactured, Grid };

  Kind kind = Kind::Constant;
  double value = 0.0;                                  // constant term; Hölder scale c
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();  // affine and quadratic linear part
  QuadraticForm form;                                  // quadratic part
  Eigen::Vector3d center = Eigen::Vector3d::Zero();    // radial center
  double coefficient = 0.0;                            // radial: value + coefficient·|x−center|^exponent
  double exponent = 1.0;                               // radial power; Hölder α
  // manufactured: tau·p_δ(Qx) + a·Z_{p_δ}(Qx)
  double tau = 0.0;
  double delta = 0.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double amplitude = 1.0;
  int lmax = kDefaultLmax;
  std::shared_ptr<const ZpField> zp;
  std::shared_ptr<const ScalarGrid> grid;

  double operator()(const Eigen::Vector3d& x) const;

  static FieldDescriptor constant(double v);
  static FieldDescriptor affine(double c, const Eigen::Vector3d& g);
  static FieldDescriptor quadratic(const QuadraticForm& q, const Eigen::Vector3d& g = Eigen::Vector3d::Zero(),
                                   double c = 0.0);
  static FieldDescriptor radial(double c0, double c1, double beta,
                                const Eigen::Vector3d& center = Eigen::Vector3d::Zero());
  /// c·x₁|x₁|^α|x|^{1−α}: two-homogeneous, C^{1,α} and not C².
  static FieldDescriptor holder(double c, double alpha);
  static FieldDescriptor manufactured(double tau, double delta, const Eigen::Matrix3d& q, double a,
                                      int lmax = kDefaultLmax);
  static FieldDescriptor from_grid(std::shared_ptr<const ScalarGrid> g);

  bool is_zero() const { return kind == Kind::Constant && value == 0.0; }
  std::string describe() const;
};

enum class Domain { Box, Ball };

struct ProblemSpec {
  Domain domain = Domain::Box;
  Eigen::Vector3d origin = Eigen::Vector3d::Constant(-1.0);
  double h = 2.0 / 64.0;
  std::array<int, 3> dims{65, 65, 65};
  Eigen::Vector3d ball_center = Eigen::Vector3d::Zero();
  double ball_radius = 1.0;
  bool periodic_xy = false;

  FieldDescriptor f = FieldDescriptor::constant(-1.0);
  FieldDescriptor psi = FieldDescriptor::constant(0.0);
  FieldDescriptor boundary = FieldDescriptor::constant(0.0);
  std::optional<FieldDescriptor> initial;

  double tol_outer = 1e-6;
  double tol_inner = 1e-8;
  int max_outer = 200;
  int max_inner = 200;
  double theta = 0.6;

  Eigen::Vector3d study_point = Eigen::Vector3d::Zero();
  bool singular_analysis = false;
  double c_psi = 1.0;

  /// n nodes per axis on [center − R, center + R]³.
  void set_cube(const Eigen::Vector3d& center, double half_width, int n);
  ScalarGrid layout() const;
  std::vector<std::uint8_t> free_mask() const;
  std::array<bool, 3> periodic() const { return {periodic_xy, periodic_xy, false}; }
};

/// Throws Error(Config) naming the first violated requirement.
void validate(const ProblemSpec& spec);

/// sup of |ψ(x⁰ + r·x)/r²| over sample points of B₁ and r = 2^{-2..-8}.
double psi_scaling_bound(const FieldDescriptor& psi, const Eigen::Vector3d& x0);

struct SolveReport {
  int outer_iterations = 0;
  int inner_iterations = 0;
  bool converged = false;
  double final_change = 0.0;
  double residual_inf = 0.0;       // max |Δ_h u − f·χ_{u>ψ}| over free nodes
  double residual_interior = 0.0;  // same, over free nodes ≥ 2h from {u = ψ}
  std::size_t positive_nodes = 0;  // nodes with u > ψ
  bool max_principle_checked = false;
  bool max_principle_ok = true;
  std::vector<double> change_history;
};

struct SolveResult {
  ScalarGrid u;
  SolveReport report;
};

/// Carries the partial state of a failed solve.
class SolverError : public Error {
 public:
  SolverError(ErrorCode code, const std::string& what, SolveResult partial)
      : Error(code, what), partial_(std::move(partial)) {}
  const SolveResult& partial() const { return partial_; }

 private:
  SolveResult partial_;
};

/// Damped fixed point u ← (1−θ)u + θ·w with Δ_h w = f·χ_{u>ψ} and the
/// boundary data on every non-free node. Throws SolverError with
/// MaxIterations or InnerDivergence.
SolveResult solve(const ProblemSpec& spec);

/// tau·p_δ(Qx) + a·Z_{p_δ}(Qx) on n³ nodes over [−R, R]³.
ScalarGrid manufactured(double tau, double delta, const Eigen::Matrix3d& q, double a, int lmax, int n,
                        double radius);
ScalarGrid sample(const FieldDescriptor& field, const ScalarGrid& layout);

struct ResidualPotential {
  ScalarGrid g;
  double d2g_l2 = 0.0;
  QuadraticForm pi;  // Π(u_r, 1)
};

/// Solves Δg = f(x⁰)·χ_{Π(u_r,1)>0} − f(x⁰+rx)·χ_{u_r>ψ_r} on the unit ball
/// with g = 0 outside, on n³ nodes over [−1,1]³, and returns the discrete
/// L²(B₁) norm of D²g. Each indicator is averaged over the node's cell.
ResidualPotential residual_potential(const ScalarGrid& u, double r, const ProblemSpec& spec, int n = 65);
/// Same, sampling the field on [x⁰ − r, x⁰ + r]³ with n nodes first, so every
/// radius is resolved equally.
ResidualPotential residual_potential(const FieldDescriptor& u, double r, const ProblemSpec& spec, int n = 65);

/// Discrete L² norm over the open ball of the central-difference Hessian.
double hessian_l2(const ScalarGrid& g, const Eigen::Vector3d& center, double radius);

struct ReducedProblem {
  ProblemSpec spec;
  ScalarGrid psi_tilde;
};

/// For Δu = f·χ_{u>ψ} + g: solves Δψ̃ = −g with zero boundary data and
/// returns the problem for v = u + ψ̃, namely Δv = f·χ_{v > ψ+ψ̃}.
ReducedProblem reduce_source(const FieldDescriptor& f, const FieldDescriptor& g, const ProblemSpec& spec);

/// 7-point Laplacian at interior box nodes, 0 on the faces.
std::vector<double> discrete_laplacian(const ScalarGrid& u);

}  // namespace ufb

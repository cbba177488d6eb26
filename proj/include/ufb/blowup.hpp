#pragma once

#include "ufb/grid.hpp"
#include "ufb/quadform.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ufb {

/// Minimum resolved radius, in grid spacings, for a projection.
constexpr double kMinNodesPerRadius = 8.0;

/// Π(u, r, x⁰): P(x) = ½ xᵀ⟨D²_h u⟩ x with the discrete Hessian averaged over
/// nodes of B_r(x⁰) whose whole 19-point stencil stays inside B_r(x⁰).
/// Throws TooCoarse if r < 8h and InvalidArgument if the ball leaves the grid.
QuadraticForm project(const ScalarGrid& u, double r, const Eigen::Vector3d& x0);

/// Central-difference Hessian at an interior node; exact on quadratics.
Eigen::Matrix3d node_hessian(const ScalarGrid& u, int i, int j, int k);

struct ProjectionLawsReport {
  double idempotence_defect = 0.0;    // max |Π(Π(u,r),r) − Π(u,r)| over samples and radii
  double harmonic_r_defect = 0.0;     // max over harmonic samples of |Π(h,r) − Π(h,s)|
  double quadratic_defect = 0.0;      // |Π(q,r) − q| for sampled quadratics
  double radial_tracefree = 0.0;      // |trace-free Π(|x|²,r)|
  double radial_identity_defect = 0.0;
  int samples = 0;
};

/// Checks the projection laws on polynomial samples: idempotence on
/// arbitrary inputs, r-independence on harmonic polynomials of degree ≤ 4
/// at r ∈ {1/4, 1/2, 1}, and the |x|² example.
ProjectionLawsReport projection_laws_check(int n = 73);

/// Harmonic polynomials of degree 2..4 used by the law checks.
std::vector<std::pair<std::string, double (*)(const Eigen::Vector3d&)>> harmonic_samples();

struct BlowupRecord {
  int j = 0;
  double r = 0.0;
  QuadraticForm pi;
  CanonicalForm canonical;
  bool canonical_defined = true;
  double sup_u = 0.0;    // ‖u_{r_j}‖_{L∞(B₁)}
  double residue = 0.0;  // ‖u_{r_j} − Π(u_{r_j},1)‖_{L∞(B₁)}
};

struct ClassifyOptions {
  double delta_s1 = 0.15;
  double delta_s2 = 0.35;
  double k_threshold = 100.0;
  double growth_min = 0.02;  // τ increase per halving below which growth counts as flat
};

struct Classification {
  std::string label = "undetermined";  // S1_plus, S1_minus, S2, regular, undetermined
  double final_delta = 0.0;
  std::string final_sign = "n/a";
  double delta_slope = 0.0;
  double growth_slope = 0.0;
  double max_sup_u = 0.0;
  ClassifyOptions thresholds;
};

struct BlowupResult {
  std::vector<BlowupRecord> records;
  Classification classification;
  bool truncated = false;
  double removed_value = 0.0;
  Eigen::Vector3d removed_gradient = Eigen::Vector3d::Zero();
};

/// Subtracts the value and gradient at x⁰ from a least-squares quadratic
/// fit over B_{4h}(x⁰).
ScalarGrid affine_normalize(const ScalarGrid& u, const Eigen::Vector3d& x0, double* value = nullptr,
                            Eigen::Vector3d* gradient = nullptr);

BlowupResult blowup_sequence(const ScalarGrid& u, const Eigen::Vector3d& x0, double r0, int levels,
                             const ClassifyOptions& opts = {});

Classification classify(const std::vector<BlowupRecord>& records, const ClassifyOptions& opts);

struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;
};

/// Marching-cubes zero level set of u − ψ with shared edge vertices.
/// Throws EmptySurface when no cell changes sign.
Mesh free_boundary(const ScalarGrid& u, const ScalarGrid& psi);
/// One-third of the incident triangle areas per vertex.
std::vector<double> vertex_areas(const Mesh& m);

enum class FitMode { Cone, Cross };

struct FitOptions {
  double r_min = 0.05;
  double r_max = 0.3;
  double cross_c = 0.5;
  std::vector<double> rho_ladder{0.1, 0.2, 0.3};
  double shell_half_width = 0.25;  // relative to ρ
};

struct ConeFit {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double residual_rms = 0.0;
  double graph_c1_defect = 0.0;
  std::vector<double> rung_defects;  // per ρ in the ladder
  // cross mode
  Eigen::Vector3d normal_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d normal_b = Eigen::Vector3d::Zero();
  double dihedral_deg = 0.0;
  int used_vertices = 0;
};

/// Cone mode: {3(x·a)² = |x|²}, i.e. p₀(Qx) = 0, fitted over the annulus
/// r_min ≤ |x − apex| ≤ r_max by area-weighted Gauss-Newton on the unit
/// normalized quadric. Cross mode: two planes through the apex inside
/// K_c = {y² < c(x² + z²)}. Throws DegenerateFit.
ConeFit cone_fit(const Mesh& mesh, const Eigen::Vector3d& apex, FitMode mode, const FitOptions& opts = {});

/// Largest angle (degrees) between the fitted normals and the given pair,
/// after the best matching.
double plane_pair_error_deg(const ConeFit& fit, const Eigen::Vector3d& n1, const Eigen::Vector3d& n2);

enum class CubeConvention { Half, Full };  // [−1/2,1/2]³ or [−1,1]³

struct SublevelEstimate {
  double measure = 0.0;
  double standard_error = 0.0;
  double sup = 0.0;  // sup of |P| on the cube before normalization
  CubeConvention convention = CubeConvention::Half;
};

/// Exact max of |P| over [−s, s]³ from vertex, edge and face critical points.
double cube_sup(const QuadraticForm& p, double s);

/// Monte Carlo |{|P/sup| ≤ eps} ∩ Q₁| with a seeded 64-bit Mersenne Twister.
SublevelEstimate sublevel_measure(const QuadraticForm& p, double eps, long samples, std::uint64_t seed,
                                  CubeConvention convention = CubeConvention::Half);

std::string to_string(CubeConvention c);

}  // namespace ufb

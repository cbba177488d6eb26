#pragma once

#include "ufb/quadform.hpp"
#include "ufb/zp.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ufb {

/// Model of Π(u_r, 1) at r = 2⁻ᵏ·r₀ for Δu = −a near the origin.
struct RenormState {
  QuadraticForm P;
  int k = 0;
  double amplitude = 1.0;
};

/// Trace-free part scaled to sup-norm one. Throws ZeroForm.
QuadraticForm normalize(const QuadraticForm& p);

/// P' = P + a·Π(Z_{normalize(P)}, 1/2) + noise, k' = k + 1.
RenormState step(const RenormState& s, const std::optional<QuadraticForm>& noise = std::nullopt,
                 int level = kDefaultLevel);

struct NoiseModel {
  enum class Kind { None, Bounded };
  Kind kind = Kind::None;
  double alpha = 0.2;
  double c1 = 1.0;

  static NoiseModel none() { return {}; }
  static NoiseModel bounded(double alpha, double c1) { return {Kind::Bounded, alpha, c1}; }
  std::string describe() const;
};

/// Random symmetric form, sup-norm uniform in [0, bound]. Uses only the raw
/// engine output so the stream is the same with every standard library.
QuadraticForm random_form(std::mt19937_64& rng, double bound);

struct TrajectoryRecord {
  int k = 0;
  double tau = 0.0;
  double delta = 0.0;
  int sign = 1;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  double increment = 0.0;  // tau_{k+1} − tau_k; NaN on the last record
  double alignment = 0.0;  // ‖normalize(P_k) − p_limit‖_sup
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  // p3_ray when δ ends within 1e-6 of 1/2; ±p0 when δ ends below 1/4 or is
  // still falling over the last tenth of the run; otherwise undetermined.
  std::string label = "undetermined";
  QuadraticForm limit;
  double amplitude = 1.0;
  bool stopped_early = false;
  int monotonicity_violations = 0;  // steps with tau ≥ K₀ where tau did not increase
};

struct SimulateOptions {
  int level = kDefaultLevel;
  double k0 = 10.0;
  double stop_delta = 1e-6;
  double stop_change = 1e-6;
};

Trajectory simulate(const QuadraticForm& p0, double amplitude, int steps, const NoiseModel& noise,
                    std::uint64_t seed, const SimulateOptions& opts = {});

struct RateFit {
  double c = 0.0;
  double K = 0.0;
  double residual = 0.0;  // RMS in log space
  int points = 0;
};

/// Least squares of log(alignment_k) = b − c·log(K + k·ln 2), minimized over
/// K by golden section in log K. Alignment identically zero gives c = +∞.
/// Throws NotConverged if the final alignment is ≥ 0.1.
RateFit rate_fit(const Trajectory& t);
RateFit rate_fit(const std::vector<double>& alignment);

struct IncrementBounds {
  double min_inc = 0.0;
  double max_inc = 0.0;
};

/// min/max over the grid of sup_norm(step(τ·p_δ).P) − τ at τ = 100.
IncrementBounds increment_bounds(double amplitude, const std::vector<double>& delta_grid,
                                 int level = kDefaultLevel);

/// "k,tau,delta,increment,alignment,q11,…,q33", one line per record.
std::string trajectory_csv_header();
std::string format_trajectory_csv_row(const TrajectoryRecord& r);

}  // namespace ufb

#include "ufb/errors.hpp"
#include "ufb/renorm.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace ufb;

TEST_CASE("normalize keeps the trace-free part at sup norm one") {
  const QuadraticForm p = 7.0 * p_delta(0.3) + QuadraticForm::identity();
  CHECK(sup_norm(normalize(p) - p_delta(0.3)) < 1e-12);
  CHECK_THROWS_AS(normalize(QuadraticForm::identity()), Error);
}

TEST_CASE("one step from tau p0 adds the Z projection") {
  const RenormState s{30.0 * p_axisymmetric(), 0, 1.0};
  const RenormState n = step(s);
  CHECK(n.k == 1);
  const double inc = std::log(2.0) / (3 * std::sqrt(3.0));
  CHECK(sup_norm(n.P - (30.0 + inc) * p_axisymmetric()) < 1e-10);
}

TEST_CASE("increment bounds over the delta grid") {
  const IncrementBounds b = increment_bounds(1.0, uniform_grid(0.0, 0.5, 0.01));
  CHECK(b.min_inc == doctest::Approx(std::log(2.0) / (2 * std::numbers::pi)).epsilon(1e-5));
  CHECK(b.max_inc == doctest::Approx(0.133396).epsilon(1e-5));
}

TEST_CASE("the cross profile is an invariant ray") {
  const Trajectory t = simulate(30.0 * p_cross(), 1.0, 100, NoiseModel::none(), 1);
  CHECK(t.label == "p3_ray");
  for (const auto& r : t.records) CHECK(std::abs(r.delta - 0.5) < 1e-10);
  CHECK(std::isnan(t.records.back().increment));
}

TEST_CASE("generic starts drift toward p0 with growing tau") {
  const Trajectory t = simulate(30.0 * p_delta(0.25), 1.0, 1000, NoiseModel::none(), 1);
  CHECK(t.label == "p0");
  CHECK(t.monotonicity_violations == 0);
  CHECK(t.records.back().delta < t.records.front().delta);
  for (std::size_t i = 1; i < t.records.size(); ++i) CHECK(t.records[i].delta <= t.records[i - 1].delta + 1e-14);
}

TEST_CASE("negative forms go to minus p0") {
  const Trajectory t = simulate(30.0 * p_delta(0.1, -1), 1.0, 500, NoiseModel::none(), 1);
  CHECK(t.label == "minus_p0");
}

TEST_CASE("noise is reproducible from the seed") {
  const NoiseModel noise = NoiseModel::bounded(0.2, 1.0);
  const Trajectory a = simulate(30.0 * p_delta(0.25), 1.0, 50, noise, 9);
  const Trajectory b = simulate(30.0 * p_delta(0.25), 1.0, 50, noise, 9);
  const Trajectory c = simulate(30.0 * p_delta(0.25), 1.0, 50, noise, 10);
  CHECK(a.records.back().tau == b.records.back().tau);
  CHECK(a.records.back().delta == b.records.back().delta);
  CHECK(a.records.back().delta != c.records.back().delta);
}

TEST_CASE("random_form respects its bound") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) CHECK(sup_norm(random_form(rng, 0.3)) <= 0.3 + 1e-12);
}

TEST_CASE("rate fit on a synthetic power law") {
  std::vector<double> a;
  for (int k = 0; k < 100; ++k) a.push_back(1.0 / (5.0 + k));
  // 1/(5 + k) = ln2 / (5 ln2 + k ln2)
  const RateFit f = rate_fit(a);
  CHECK(f.c == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(f.K == doctest::Approx(5 * std::log(2.0)).epsilon(1e-4));
  CHECK(f.residual < 1e-8);
}

TEST_CASE("rate fit edge cases") {
  CHECK_THROWS_AS(rate_fit(std::vector<double>{0.01, 0.005}), Error);
  CHECK(std::isinf(rate_fit(std::vector<double>(10, 0.0)).c));
  const Trajectory t = simulate(30.0 * p_delta(0.45), 1.0, 20, NoiseModel::none(), 1);
  CHECK_THROWS_AS(rate_fit(t), Error);
}

TEST_CASE("trajectory CSV row shape") {
  const Trajectory t = simulate(30.0 * p_delta(0.2), 1.0, 2, NoiseModel::none(), 1);
  const std::string row = format_trajectory_csv_row(t.records.front());
  CHECK(std::count(row.begin(), row.end(), ',') == 13);
  const std::string header = trajectory_csv_header();
  CHECK(std::count(header.begin(), header.end(), ',') == 13);
}

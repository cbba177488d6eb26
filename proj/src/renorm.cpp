#include "ufb/renorm.hpp"

#include "ufb/errors.hpp"
#include "ufb/format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ufb {

namespace {

double unit_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

struct LinearFit {
  double c = 0.0;
  double b = 0.0;
  double residual = 0.0;
};

LinearFit fit_for_k(const std::vector<double>& k, const std::vector<double>& y, double big_k) {
  const std::size_t n = k.size();
  std::vector<double> x(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::log(big_k + k[i] * std::numbers::ln2);
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit f;
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.c = -slope;
  f.b = my - slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.b + slope * x[i]);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / double(n));
  return f;
}

}  // namespace

QuadraticForm normalize(const QuadraticForm& p) {
  const QuadraticForm t = p.trace_free();
  const double s = sup_norm(t);
  if (!(s > default_tolerance(p))) throw Error(ErrorCode::ZeroForm, "cannot normalize a form with no trace-free part");
  return (1.0 / s) * t;
}

RenormState step(const RenormState& s, const std::optional<QuadraticForm>& noise, int level) {
  RenormState next = s;
  next.P += pi_of_zp(normalize(s.P), 0.5, s.amplitude, level);
  if (noise) next.P += *noise;
  ++next.k;
  return next;
}

std::string NoiseModel::describe() const {
  if (kind == Kind::None) return "none";
  return "bounded(alpha=" + format_short(alpha) + ",C1=" + format_short(c1) + ")";
}

QuadraticForm random_form(std::mt19937_64& rng, double bound) {
  std::array<double, 6> c;
  for (double& v : c) v = 2.0 * unit_uniform(rng) - 1.0;
  const QuadraticForm q = QuadraticForm::from_coefficients(c);
  const double target = bound * unit_uniform(rng);
  const double s = sup_norm(q);
  return s > 0.0 ? (target / s) * q : q;
}

Trajectory simulate(const QuadraticForm& p0, double amplitude, int steps, const NoiseModel& noise,
                    std::uint64_t seed, const SimulateOptions& opts) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (!(amplitude > 0.0)) throw Error(ErrorCode::InvalidArgument, "amplitude must be positive");
  std::mt19937_64 rng(seed);
  Trajectory t;
  t.amplitude = amplitude;
  RenormState s{p0, 0, amplitude};
  std::vector<QuadraticForm> profiles;

  auto record = [&](const RenormState& st) {
    const CanonicalForm c = canonicalize(st.P);
    TrajectoryRecord r;
    r.k = st.k;
    r.tau = c.tau;
    r.delta = c.delta;
    r.sign = c.sign;
    r.rotation = c.rotation;
    t.records.push_back(r);
    profiles.push_back(normalize(st.P));
  };

  record(s);
  for (int i = 0; i < steps; ++i) {
    std::optional<QuadraticForm> n;
    if (noise.kind == NoiseModel::Kind::Bounded) {
      n = random_form(rng, noise.c1 * std::pow(t.records.back().tau, -noise.alpha));
    }
    s = step(s, n, opts.level);
    const double previous_tau = t.records.back().tau;
    record(s);
    const TrajectoryRecord& now = t.records.back();
    if (previous_tau >= opts.k0 && !(now.tau > previous_tau)) ++t.monotonicity_violations;
    const double change = sup_norm(profiles.back() - profiles[profiles.size() - 2]);
    if (now.delta < opts.stop_delta && change < opts.stop_change) {
      t.stopped_early = true;
      break;
    }
  }
  for (std::size_t i = 0; i + 1 < t.records.size(); ++i) {
    t.records[i].increment = t.records[i + 1].tau - t.records[i].tau;
  }
  t.records.back().increment = std::numeric_limits<double>::quiet_NaN();

  const TrajectoryRecord& last = t.records.back();
  if (last.delta >= 0.5 - 1e-6) {
    t.label = "p3_ray";
    t.limit = rotate(p_delta(0.5, last.sign), last.rotation);
  } else if (last.delta < 0.25 || last.delta < t.records[t.records.size() - 1 - t.records.size() / 10].delta) {
    t.label = last.sign > 0 ? "p0" : "minus_p0";
    t.limit = rotate(p_delta(0.0, last.sign), last.rotation);
  } else {
    t.limit = profiles.back();
  }
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    t.records[i].alignment = sup_norm(profiles[i] - t.limit);
  }
  return t;
}

RateFit rate_fit(const Trajectory& t) {
  std::vector<double> a;
  a.reserve(t.records.size());
  for (const auto& r : t.records) a.push_back(r.alignment);
  return rate_fit(a);
}

RateFit rate_fit(const std::vector<double>& alignment) {
  if (alignment.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  if (!(alignment.back() < 0.1)) {
    throw Error(ErrorCode::NotConverged, "final alignment " + format_short(alignment.back(), 4) + " >= 0.1");
  }
  std::vector<double> k, y;
  for (std::size_t i = 0; i < alignment.size(); ++i) {
    if (alignment[i] > 0.0 && std::isfinite(alignment[i])) {
      k.push_back(double(i));
      y.push_back(std::log(alignment[i]));
    }
  }
  RateFit out;
  if (k.empty()) {
    out.c = std::numeric_limits<double>::infinity();
    return out;
  }
  out.points = int(k.size());
  if (k.size() < 3) throw Error(ErrorCode::InvalidArgument, "rate fit needs at least 3 nonzero alignments");

  // Coarse scan in log K, then golden-section refinement around the best node.
  const double lo = std::log(1e-3), hi = std::log(1e6);
  const int scan = 180;
  auto resid = [&](double u) { return fit_for_k(k, y, std::exp(u)).residual; };
  int best = 0;
  double best_r = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan; ++i) {
    const double r = resid(lo + (hi - lo) * i / scan);
    if (r < best_r) {
      best_r = r;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / scan;
  double b = lo + (hi - lo) * std::min(best + 1, scan) / scan;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = resid(x1), f2 = resid(x2);
  for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = resid(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = resid(x2);
    }
  }
  const double u = 0.5 * (a + b);
  const LinearFit f = fit_for_k(k, y, std::exp(u));
  out.c = f.c;
  out.K = std::exp(u);
  out.residual = f.residual;
  return out;
}

IncrementBounds increment_bounds(double amplitude, const std::vector<double>& delta_grid, int level) {
  IncrementBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const double tau = 100.0;
  for (double d : delta_grid) {
    const RenormState s{tau * p_delta(d), 0, amplitude};
    const double inc = sup_norm(step(s, std::nullopt, level).P) - tau;
    b.min_inc = std::min(b.min_inc, inc);
    b.max_inc = std::max(b.max_inc, inc);
  }
  return b;
}

std::string trajectory_csv_header() { return "k,tau,delta,increment,alignment,q11,q12,q13,q21,q22,q23,q31,q32,q33"; }

std::string format_trajectory_csv_row(const TrajectoryRecord& r) {
  std::string s = std::to_string(r.k) + ',' + format_double(r.tau) + ',' + format_double(r.delta) + ',' +
                  format_double(r.increment) + ',' + format_double(r.alignment);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) s += ',' + format_double(r.rotation(i, j));
  }
  return s;
}

}  // namespace ufb

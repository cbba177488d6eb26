#include "commands.hpp"

#include "config.hpp"

#include "ufb/blowup.hpp"
#include "ufb/errors.hpp"
#include "ufb/format.hpp"
#include "ufb/io.hpp"
#include "ufb/pde.hpp"
#include "ufb/renorm.hpp"
#include "ufb/verify.hpp"
#include "ufb/zp.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <thread>

namespace ufb::cli {

namespace {

namespace fs = std::filesystem;
using Vec = Eigen::Vector3d;

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

json load(const Options& o, const json& defaults) {
  const json user = o.config.empty() ? json::object() : load_config(o.config);
  json r = resolve(defaults, user);
  if (r["schema_version"] != kSchemaVersion) fail("schema_version must be " + std::to_string(kSchemaVersion));
  return r;
}

fs::path output(const Options& o, const std::string& name) {
  std::error_code ec;
  fs::create_directories(o.out, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory " + o.out);
  return fs::path(o.out) / name;
}

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) body(i);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min(workers, n); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

void parallel_fill(ScalarGrid& g, const std::function<double(const Vec&)>& f, int workers) {
  parallel_for(g.dims[2], workers, [&](int k) {
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i) g.values[g.index(i, j, k)] = f(g.point(i, j, k));
  });
}

json vec_json(const Vec& v) { return {v(0), v(1), v(2)}; }

json matrix_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return rows;
}

// Infinite and NaN values have no JSON literal; they are written as strings.
json number_json(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

std::vector<double> delta_list(const json& explicit_list, const json& grid, const std::string& where) {
  std::vector<double> d;
  if (!explicit_list.is_null()) {
    if (!explicit_list.is_array()) fail(where + ": expected an array of numbers");
    for (const auto& v : explicit_list) {
      if (!v.is_number()) fail(where + ": expected an array of numbers");
      d.push_back(v.get<double>());
    }
  } else {
    d = uniform_grid(grid["first"], grid["last"], grid["step"]);
  }
  if (d.empty()) fail(where + ": empty delta grid");
  for (double x : d) {
    if (!(x >= 0.0 && x <= 0.5)) fail(where + ": delta " + format_short(x) + " outside [0, 1/2]");
  }
  return d;
}

int positive_int(const json& j, const std::string& where, int min = 1) {
  if (!j.is_number_integer() || j.get<long>() < min) fail(where + ": expected an integer >= " + std::to_string(min));
  return j.get<int>();
}

double positive(const json& j, const std::string& where) {
  if (!(j.get<double>() > 0.0)) fail(where + ": must be positive");
  return j.get<double>();
}

}  // namespace

// ---------------------------------------------------------------- coeffs

int cmd_coeffs(const Options& o) {
  const json defaults = {{"schema_version", kSchemaVersion},
                         {"deltas", nullptr},
                         {"delta_grid", {{"first", 0.0}, {"last", 0.5}, {"step", 0.01}}},
                         {"level", kDefaultLevel},
                         {"output", "coefficients.csv"}};
  const json cfg = load(o, defaults);
  const std::vector<double> deltas = delta_list(cfg["deltas"], cfg["delta_grid"], "deltas");
  const int level = positive_int(cfg["level"], "level", 2);
  std::vector<CoefficientTable> rows(deltas.size());
  parallel_for(int(deltas.size()), o.workers, [&](int i) { rows[i] = a_coefficients(deltas[i], level); });

  std::string csv = csv_preamble(config_digest(cfg));
  csv += "delta,Ax,Ay,Az,A,kappa,kappa_le_4delta,kappa_ge_2delta\n";
  for (const auto& t : rows) {
    csv += format_coefficients_csv_row(t) + ',' + (t.kappa <= 4 * t.delta + 1e-4 ? "1" : "0") + ',' +
           (t.kappa >= 2 * t.delta - 1e-4 ? "1" : "0") + '\n';
  }
  const fs::path path = output(o, cfg["output"]);
  write_atomic(path, csv);
  std::cout << "wrote " << path.string() << " (" << rows.size() << " rows)\n";
  return kOk;
}

// ---------------------------------------------------------------- zp

int cmd_zp(const Options& o) {
  const json defaults = {{"schema_version", kSchemaVersion},
                         {"delta", 0.0},
                         {"sign", 1},
                         {"tau", 0.0},
                         {"rotation", nullptr},
                         {"amplitude", 1.0},
                         {"lmax", kDefaultLmax},
                         {"level", kDefaultLevel},
                         {"grid", {{"n", 33}, {"half_width", 1.0}, {"center", {0.0, 0.0, 0.0}}}},
                         {"format", "raw"},
                         {"output", "zp"}};
  const json cfg = load(o, defaults);
  const double delta = cfg["delta"];
  if (!(delta >= 0.0 && delta <= 0.5)) fail("delta: outside [0, 1/2]");
  const int sign = cfg["sign"];
  if (sign != 1 && sign != -1) fail("sign: must be 1 or -1");
  const double tau = cfg["tau"];
  if (!(tau >= 0.0)) fail("tau: must be >= 0");
  const Eigen::Matrix3d q =
      cfg["rotation"].is_null() ? Eigen::Matrix3d::Identity() : matrix3_from_json(cfg["rotation"], "rotation");
  if ((q.transpose() * q - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-10) fail("rotation: not orthogonal");
  const std::string format = cfg["format"];
  if (format != "raw" && format != "csv") fail("format: expected \"raw\" or \"csv\"");
  const int n = positive_int(cfg["grid"]["n"], "grid.n", 2);

  const QuadraticForm p = p_delta(delta, sign);
  const ZpField z = build_zp(p, positive(cfg["amplitude"], "amplitude"), positive_int(cfg["lmax"], "lmax", 2),
                             positive_int(cfg["level"], "level", 2));
  ScalarGrid g = ScalarGrid::cube(vec3_from_json(cfg["grid"]["center"], "grid.center"),
                                  positive(cfg["grid"]["half_width"], "grid.half_width"), n);
  parallel_fill(
      g,
      [&](const Vec& x) {
        const Vec y = q * x;
        return tau * p(y) + zp_value(z, y);
      },
      o.workers);

  const std::string digest = config_digest(cfg);
  const fs::path base = output(o, cfg["output"]);
  if (format == "raw") {
    write_grid(base, g, {{"config", cfg}, {"config_digest", digest}});
    std::cout << "wrote " << base.string() << ".f64 and .json\n";
  } else {
    std::string csv = csv_preamble(digest) + "x,y,z,value\n";
    for (int k = 0; k < g.dims[2]; ++k)
      for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i) {
          const Vec x = g.point(i, j, k);
          csv += format_double(x(0)) + ',' + format_double(x(1)) + ',' + format_double(x(2)) + ',' +
                 format_double(g(i, j, k)) + '\n';
        }
    fs::path path = base;
    path += ".csv";
    write_atomic(path, csv);
    std::cout << "wrote " << path.string() << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------- renorm

int cmd_renorm(const Options& o) {
  const json entry_defaults = {{"delta0", 0.25},
                               {"tau0", 30.0},
                               {"sign", 1},
                               {"amplitude", 1.0},
                               {"steps", 2000},
                               {"noise", {{"kind", "none"}, {"alpha", 0.2}, {"c1", 1.0}}}};
  json defaults = {{"schema_version", kSchemaVersion},
                   {"seed", 1},
                   {"level", kDefaultLevel},
                   {"increment_grid", {{"first", 0.0}, {"last", 0.5}, {"step", 0.01}}},
                   {"trajectories", json::array()},
                   {"output_prefix", "trajectory"}};
  for (double d : {0.25, 0.5, 0.49}) {
    json e = entry_defaults;
    e["delta0"] = d;
    defaults["trajectories"].push_back(e);
  }
  json cfg = load(o, defaults);
  if (o.seed) cfg["seed"] = *o.seed;
  if (!cfg["seed"].is_number_integer() || cfg["seed"].get<long long>() < 0) fail("seed: expected a non-negative integer");
  if (cfg["trajectories"].empty()) fail("trajectories: empty matrix");
  for (std::size_t i = 0; i < cfg["trajectories"].size(); ++i) {
    cfg["trajectories"][i] = resolve(entry_defaults, cfg["trajectories"][i], "trajectories[" + std::to_string(i) + "]");
  }
  const int level = positive_int(cfg["level"], "level", 2);
  const std::uint64_t seed = cfg["seed"];

  struct Run {
    QuadraticForm p0;
    double amplitude;
    int steps;
    NoiseModel noise;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < cfg["trajectories"].size(); ++i) {
    const json& e = cfg["trajectories"][i];
    const std::string where = "trajectories[" + std::to_string(i) + "]";
    const double d = e["delta0"];
    if (!(d >= 0.0 && d <= 0.5)) fail(where + ".delta0: outside [0, 1/2]");
    const int sign = e["sign"];
    if (sign != 1 && sign != -1) fail(where + ".sign: must be 1 or -1");
    Run r{positive(e["tau0"], where + ".tau0") * p_delta(d, sign), positive(e["amplitude"], where + ".amplitude"),
          positive_int(e["steps"], where + ".steps"), NoiseModel::none()};
    const std::string kind = e["noise"]["kind"];
    if (kind == "bounded") {
      r.noise = NoiseModel::bounded(e["noise"]["alpha"], e["noise"]["c1"]);
    } else if (kind != "none") {
      fail(where + ".noise.kind: expected \"none\" or \"bounded\"");
    }
    runs.push_back(r);
  }
  const IncrementBounds bounds =
      increment_bounds(1.0, delta_list(nullptr, cfg["increment_grid"], "increment_grid"), level);

  SimulateOptions sim;
  sim.level = level;
  std::vector<Trajectory> trajectories(runs.size());
  parallel_for(int(runs.size()), o.workers, [&](int i) {
    trajectories[i] = simulate(runs[i].p0, runs[i].amplitude, runs[i].steps, runs[i].noise, seed + std::uint64_t(i), sim);
  });

  const std::string digest = config_digest(cfg);
  const std::string prefix = cfg["output_prefix"];
  json summary = {{"schema_version", kSchemaVersion},
                  {"config_digest", digest},
                  {"config", cfg},
                  {"increment_bounds", {{"min_inc", bounds.min_inc}, {"max_inc", bounds.max_inc}}},
                  {"trajectories", json::array()}};
  bool unconverged = false;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& t = trajectories[i];
    const std::string name = prefix + "_" + std::to_string(i) + ".csv";
    std::string csv = csv_preamble(digest) + trajectory_csv_header() + "\n";
    for (const auto& r : t.records) csv += format_trajectory_csv_row(r) + "\n";
    write_atomic(output(o, name), csv);

    json fit;
    if (t.label == "p3_ray") {
      fit = {{"skipped", "the p3 ray is invariant; there is no rate to fit"}};
    } else {
      try {
        const RateFit f = rate_fit(t);
        fit = {{"c", number_json(f.c)}, {"K", f.K}, {"residual", f.residual}, {"points", f.points}};
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotConverged) throw;
        unconverged = true;
        fit = {{"error", e.what()}};
      }
    }
    const auto& last = t.records.back();
    summary["trajectories"].push_back({{"index", i},
                                       {"csv", name},
                                       {"label", t.label},
                                       {"final_delta", last.delta},
                                       {"final_tau", last.tau},
                                       {"steps_run", last.k},
                                       {"stopped_early", t.stopped_early},
                                       {"monotonicity_violations", t.monotonicity_violations},
                                       {"rate_fit", fit}});
    std::cout << "trajectory " << i << ": " << t.label << ", final delta " << format_short(last.delta, 6) << "\n";
  }
  write_atomic(output(o, prefix + "_summary.json"), dump_json(summary));
  if (unconverged && !o.allow_unconverged) {
    std::cerr << "NotConverged: a trajectory ended with alignment >= 0.1 (use --allow-unconverged to accept)\n";
    return kRenormError;
  }
  return kOk;
}

// ---------------------------------------------------------------- solve

int cmd_solve(const Options& o) {
  const json defaults = {
      {"schema_version", kSchemaVersion},
      {"domain", "ball"},
      {"grid",
       {{"n", 65}, {"center", {0.0, 0.0, 0.0}}, {"half_width", 1.0}, {"dims", nullptr}, {"origin", nullptr},
        {"spacing", nullptr}}},
      {"ball", {{"center", {0.0, 0.0, 0.0}}, {"radius", 1.0}}},
      {"periodic_xy", false},
      {"f", nullptr},
      {"psi", nullptr},
      {"boundary", nullptr},
      {"initial", nullptr},
      {"reference", nullptr},
      {"solver", {{"tol_outer", 1e-6}, {"tol_inner", 1e-8}, {"max_outer", 200}, {"max_inner", 200}, {"theta", 0.6}}},
      {"study_point", {0.0, 0.0, 0.0}},
      {"singular_analysis", false},
      {"c_psi", 1.0},
      {"error_radius", 0.8},
      {"output", "solution"}};
  json cfg = load(o, defaults);

  ProblemSpec s;
  const std::string domain = cfg["domain"];
  if (domain == "ball") {
    s.domain = Domain::Ball;
  } else if (domain != "box") {
    fail("domain: expected \"ball\" or \"box\"");
  }
  const json& grid = cfg["grid"];
  if (grid["dims"].is_null()) {
    s.set_cube(vec3_from_json(grid["center"], "grid.center"), positive(grid["half_width"], "grid.half_width"),
               positive_int(grid["n"], "grid.n", 3));
  } else {
    const json& d = grid["dims"];
    if (!d.is_array() || d.size() != 3) fail("grid.dims: expected three integers");
    for (int a = 0; a < 3; ++a) s.dims[a] = positive_int(d[a], "grid.dims", 2);
    if (grid["origin"].is_null() || grid["spacing"].is_null()) fail("grid.dims needs grid.origin and grid.spacing");
    s.origin = vec3_from_json(grid["origin"], "grid.origin");
    s.h = positive(grid["spacing"], "grid.spacing");
  }
  s.ball_center = vec3_from_json(cfg["ball"]["center"], "ball.center");
  s.ball_radius = positive(cfg["ball"]["radius"], "ball.radius");
  s.periodic_xy = cfg["periodic_xy"];
  auto field = [&](const char* key, double fallback) {
    json resolved;
    const FieldDescriptor f = field_from_json(cfg[key].is_null() ? json(fallback) : cfg[key], key, &resolved);
    cfg[key] = resolved;
    return f;
  };
  s.f = field("f", -1.0);
  s.psi = field("psi", 0.0);
  s.boundary = field("boundary", 0.0);
  if (!cfg["initial"].is_null()) s.initial = field("initial", 0.0);
  std::optional<FieldDescriptor> reference;
  if (!cfg["reference"].is_null()) {
    reference = field("reference", 0.0);
  } else if (s.boundary.kind == FieldDescriptor::Kind::Manufactured) {
    reference = s.boundary;
  }
  const json& solver = cfg["solver"];
  s.tol_outer = positive(solver["tol_outer"], "solver.tol_outer");
  s.tol_inner = positive(solver["tol_inner"], "solver.tol_inner");
  s.max_outer = positive_int(solver["max_outer"], "solver.max_outer");
  s.max_inner = positive_int(solver["max_inner"], "solver.max_inner");
  s.theta = solver["theta"];
  s.study_point = vec3_from_json(cfg["study_point"], "study_point");
  s.singular_analysis = cfg["singular_analysis"];
  s.c_psi = cfg["c_psi"];
  validate(s);

  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res;
  bool converged = true;
  std::string failure;
  try {
    res = solve(s);
  } catch (const SolverError& e) {
    res = e.partial();
    converged = false;
    failure = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string digest = config_digest(cfg);
  const SolveReport& r = res.report;
  json report = {{"schema_version", kSchemaVersion},
                 {"config_digest", digest},
                 {"config", cfg},
                 {"converged", converged},
                 {"outer_iterations", r.outer_iterations},
                 {"inner_iterations", r.inner_iterations},
                 {"final_change", r.final_change},
                 {"residual_inf", r.residual_inf},
                 {"residual_interior", r.residual_interior},
                 {"positive_nodes", r.positive_nodes},
                 {"positive_set_empty", r.positive_nodes == 0},
                 {"max_principle_checked", r.max_principle_checked},
                 {"max_principle_ok", r.max_principle_ok},
                 {"wall_time_s", wall}};
  if (!failure.empty()) report["failure"] = failure;
  if (reference) {
    ScalarGrid ref = res.u;
    parallel_fill(ref, [&](const Vec& x) { return (*reference)(x); }, o.workers);
    const double radius = cfg["error_radius"].get<double>() * s.ball_radius;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < ref.dims[2]; ++k)
      for (int j = 0; j < ref.dims[1]; ++j)
        for (int i = 0; i < ref.dims[0]; ++i) {
          if ((ref.point(i, j, k) - s.ball_center).norm() > radius) continue;
          num = std::max(num, std::abs(res.u(i, j, k) - ref(i, j, k)));
          den = std::max(den, std::abs(ref(i, j, k)));
        }
    report["relative_error"] = number_json(den > 0.0 ? num / den : num);
  }
  const std::string base = cfg["output"];
  write_grid(output(o, base), res.u, {{"config_digest", digest}});
  write_atomic(output(o, base + "_report.json"), dump_json(report));
  std::cout << (converged ? "converged" : "not converged") << " after " << r.outer_iterations << " outer iterations";
  if (report.contains("relative_error")) std::cout << ", relative error " << report["relative_error"].dump();
  std::cout << "\n";
  if (!converged && !o.allow_unconverged) {
    std::cerr << failure << "\n";
    return kSolverError;
  }
  return kOk;
}

// ---------------------------------------------------------------- blowup

int cmd_blowup(const Options& o) {
  const json defaults = {
      {"schema_version", kSchemaVersion},
      {"grid", nullptr},
      {"field", nullptr},
      {"sample", {{"n", 129}, {"half_width", 1.0}, {"center", {0.0, 0.0, 0.0}}}},
      {"psi", nullptr},
      {"x0", {0.0, 0.0, 0.0}},
      {"r0", 0.5},
      {"levels", 4},
      {"thresholds", {{"delta_s1", 0.15}, {"delta_s2", 0.35}, {"k_threshold", 100.0}, {"growth_min", 0.02}}},
      {"fit",
       {{"mode", "auto"},
        {"r_min", 0.05},
        {"r_max", 0.3},
        {"cross_c", 0.5},
        {"rho_ladder", {0.1, 0.2, 0.3}},
        {"shell_half_width", 0.25}}},
      {"output_prefix", "blowup"}};
  json cfg = load(o, defaults);
  if (cfg["grid"].is_null() == cfg["field"].is_null()) fail("exactly one of 'grid' and 'field' is required");

  ScalarGrid u;
  if (!cfg["grid"].is_null()) {
    if (!cfg["grid"].is_string()) fail("grid: expected the path of a grid sidecar");
    u = read_grid(cfg["grid"].get<std::string>());
  } else {
    json resolved;
    const FieldDescriptor f = field_from_json(cfg["field"], "field", &resolved);
    cfg["field"] = resolved;
    u = ScalarGrid::cube(vec3_from_json(cfg["sample"]["center"], "sample.center"),
                         positive(cfg["sample"]["half_width"], "sample.half_width"),
                         positive_int(cfg["sample"]["n"], "sample.n", 3));
    parallel_fill(u, [&](const Vec& x) { return f(x); }, o.workers);
  }
  json psi_json;
  const FieldDescriptor psi = field_from_json(cfg["psi"].is_null() ? json(0.0) : cfg["psi"], "psi", &psi_json);
  cfg["psi"] = psi_json;

  ClassifyOptions copts;
  copts.delta_s1 = cfg["thresholds"]["delta_s1"];
  copts.delta_s2 = cfg["thresholds"]["delta_s2"];
  copts.k_threshold = cfg["thresholds"]["k_threshold"];
  copts.growth_min = cfg["thresholds"]["growth_min"];
  const json& fj = cfg["fit"];
  FitOptions fopts;
  fopts.r_min = fj["r_min"];
  fopts.r_max = fj["r_max"];
  fopts.cross_c = fj["cross_c"];
  fopts.rho_ladder = fj["rho_ladder"].get<std::vector<double>>();
  fopts.shell_half_width = fj["shell_half_width"];
  const std::string mode = fj["mode"];
  if (mode != "auto" && mode != "cone" && mode != "cross" && mode != "none") {
    fail("fit.mode: expected auto, cone, cross or none");
  }
  const Vec x0 = vec3_from_json(cfg["x0"], "x0");
  const int levels = positive_int(cfg["levels"], "levels", 0);
  const double r0 = positive(cfg["r0"], "r0");

  BlowupResult b;
  try {
    b = blowup_sequence(u, x0, r0, levels, copts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TooCoarse) {
      std::cerr << e.what() << "\n";
      return kResolutionError;
    }
    if (e.code() == ErrorCode::InvalidArgument) fail(e.what());
    throw;
  }

  const std::string digest = config_digest(cfg);
  const std::string prefix = cfg["output_prefix"];
  std::string csv = csv_preamble(digest) + "j,r,tau,delta,sign,sup_u,residue\n";
  for (const auto& r : b.records) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    csv += std::to_string(r.j) + ',' + format_double(r.r) + ',' +
           format_double(r.canonical_defined ? r.canonical.tau : 0.0) + ',' +
           format_double(r.canonical_defined ? r.canonical.delta : nan) + ',' +
           std::to_string(r.canonical_defined ? r.canonical.sign : 0) + ',' + format_double(r.sup_u) + ',' +
           format_double(r.residue) + '\n';
  }
  write_atomic(output(o, prefix + "_trajectory.csv"), csv);

  const Classification& c = b.classification;
  json report = {{"schema_version", kSchemaVersion},
                 {"config_digest", digest},
                 {"config", cfg},
                 {"classification",
                  {{"label", c.label},
                   {"final_delta", number_json(c.final_delta)},
                   {"final_sign", c.final_sign},
                   {"delta_slope", c.delta_slope},
                   {"growth_slope", c.growth_slope},
                   {"max_sup_u", c.max_sup_u},
                   {"thresholds",
                    {{"delta_s1", c.thresholds.delta_s1},
                     {"delta_s2", c.thresholds.delta_s2},
                     {"k_threshold", c.thresholds.k_threshold},
                     {"growth_min", c.thresholds.growth_min}}}}},
                 {"levels_resolved", b.records.size()},
                 {"truncated", b.truncated},
                 {"removed_value", b.removed_value},
                 {"removed_gradient", vec_json(b.removed_gradient)},
                 {"fit", nullptr}};

  ScalarGrid psi_grid = u;
  parallel_fill(psi_grid, [&](const Vec& x) { return psi(x); }, o.workers);
  try {
    const Mesh mesh = free_boundary(u, psi_grid);
    write_atomic(output(o, prefix + "_free_boundary.ply"), mesh_to_ply(mesh, digest));
    report["mesh"] = {{"file", prefix + "_free_boundary.ply"},
                      {"vertices", mesh.vertices.size()},
                      {"triangles", mesh.triangles.size()}};
    std::string fit_mode = mode;
    if (mode == "auto") {
      fit_mode = c.label.rfind("S1", 0) == 0 ? "cone" : (c.label == "S2" ? "cross" : "none");
    }
    if (fit_mode != "none") {
      try {
        const ConeFit f = cone_fit(mesh, x0, fit_mode == "cone" ? FitMode::Cone : FitMode::Cross, fopts);
        json fit = {{"mode", fit_mode},
                    {"residual_rms", f.residual_rms},
                    {"residual_rms_cells", f.residual_rms / u.h},
                    {"used_vertices", f.used_vertices},
                    {"rotation", matrix_json(f.rotation)}};
        if (fit_mode == "cone") {
          json rungs = json::array();
          for (double d : f.rung_defects) rungs.push_back(number_json(d));
          fit["axis"] = vec_json(f.axis);
          fit["graph_c1_defect"] = number_json(f.graph_c1_defect);
          fit["rung_defects"] = rungs;
        } else {
          fit["normal_a"] = vec_json(f.normal_a);
          fit["normal_b"] = vec_json(f.normal_b);
          fit["dihedral_deg"] = f.dihedral_deg;
        }
        report["fit"] = fit;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateFit) throw;
        report["fit"] = {{"mode", fit_mode}, {"error", e.what()}};
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptySurface) throw;
    report["mesh"] = {{"error", e.what()}};
  }
  write_atomic(output(o, prefix + "_classification.json"), dump_json(report));
  std::cout << "classification " << c.label << " (final delta " << format_short(c.final_delta, 6) << ")\n";
  return kOk;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const Options& o) {
  const json defaults = {{"schema_version", kSchemaVersion},
                         {"filter", ""},
                         {"tolerance_scale", 1.0},
                         {"seed", 1},
                         {"output", "verify_report.txt"}};
  json cfg = load(o, defaults);
  if (o.seed) cfg["seed"] = *o.seed;
  if (o.filter) cfg["filter"] = *o.filter;
  if (!cfg["seed"].is_number_integer() || cfg["seed"].get<long long>() < 0) fail("seed: expected a non-negative integer");
  VerifyOptions v;
  v.filter = cfg["filter"];
  v.tolerance_scale = positive(cfg["tolerance_scale"], "tolerance_scale");
  v.seed = cfg["seed"];
  v.workers = o.workers;
  const std::vector<CheckResult> results = run_verify(v);
  if (results.empty()) fail("filter '" + v.filter + "' selects no check");
  const std::string report = format_verify_report(results);
  write_atomic(output(o, cfg["output"]), csv_preamble(config_digest(cfg)) + report);
  std::cout << report;
  for (const auto& r : results) {
    if (!r.pass) return kVerifyFailed;
  }
  return kOk;
}

}  // namespace ufb::cli

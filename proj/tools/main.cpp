#include "commands.hpp"

#include "ufb/errors.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>

int main(int argc, char** argv) {
  using namespace ufb::cli;

  CLI::App app{"Obstacle problem singularities: coefficients, Z fields, renormalization, solver and blow-ups"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  std::string filter;

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Entry entries[] = {
      {"coeffs", "tabulate A_x, A_y, A_z, A and kappa over a delta grid", cmd_coeffs},
      {"zp", "sample the correction field Z on a grid", cmd_zp},
      {"renorm", "run renormalization trajectories", cmd_renorm},
      {"solve", "solve the obstacle problem on a grid", cmd_solve},
      {"blowup", "blow-up sequence, classification and free-boundary fit", cmd_blowup},
      {"verify", "run the numerical self-checks", cmd_verify},
  };
  std::function<int()> selected;
  for (const Entry& e : entries) {
    CLI::App* s = app.add_subcommand(e.name, e.help);
    s->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "output directory")->capture_default_str();
    s->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    CLI::Option* seed_opt = s->add_option("--seed", seed, "random seed (overrides the config)");
    s->add_flag("--allow-unconverged", o.allow_unconverged, "exit 0 with partial results on non-convergence");
    CLI::Option* filter_opt = s->add_option("--filter", filter, "check-name substring (verify)");
    s->callback([&o, &seed, &filter, &selected, seed_opt, filter_opt, run = e.run] {
      if (seed_opt->count()) o.seed = seed;
      if (filter_opt->count()) o.filter = filter;
      selected = [&o, run] { return run(o); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    return selected();
  } catch (const ufb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ufb::ErrorCode::NotConverged: return kRenormError;
      case ufb::ErrorCode::MaxIterations:
      case ufb::ErrorCode::InnerDivergence: return kSolverError;
      case ufb::ErrorCode::TooCoarse: return kResolutionError;
      default: return kConfigError;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

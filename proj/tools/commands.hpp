#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ufb::cli {

enum ExitCode { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kRenormError = 3, kSolverError = 4, kResolutionError = 5 };

struct Options {
  std::string config;  // empty: defaults only
  std::string out = ".";
  int workers = 1;
  std::optional<std::uint64_t> seed;
  bool allow_unconverged = false;
  std::optional<std::string> filter;
};

int cmd_coeffs(const Options& o);
int cmd_zp(const Options& o);
int cmd_renorm(const Options& o);
int cmd_solve(const Options& o);
int cmd_blowup(const Options& o);
int cmd_verify(const Options& o);

}  // namespace ufb::cli

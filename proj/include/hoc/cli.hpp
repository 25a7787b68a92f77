#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace hoc::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kUsageError = 2 };

struct RunConfig {
  std::string command;
  std::string input;
  /// Report path; empty writes the JSON report to stdout and the table to stderr.
  std::string output;
  /// 0 selects the lowest nonvanishing Hoeffding degree where that makes sense.
  int order = 0;
  std::string statement;
  std::uint64_t seed = 1;
  std::uint64_t samples = 100000;
  /// Cap on function evaluations per hypermatrix field.
  std::uint64_t budget = std::uint64_t{1} << 34;
  double tolerance = 1e-10;
  std::string kind = "h";
  double t = 1.0;
  double sigma2 = 1.0;
  std::string variant = "op";
  std::string setting = "lsi";
};

struct RunResult {
  int exit_code = kPass;
  /// Full JSON report, including a timestamp field.
  std::string report;
  std::string table;
};

/// Executes one command without touching the output path.
RunResult execute(const RunConfig& config);

/// Executes and writes the report to config.output (or out) and the table to out (or err).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace hoc::cli

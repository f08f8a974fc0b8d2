#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tmsharp/config.hpp"
#include "tmsharp/threshold.hpp"

namespace tmsharp::cli {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,          // bad arguments, unparseable expression, output collision
  kSolverFailure = 2,  // a numerical solver did not converge
  kVerifyFailed = 3,   // soliton-verify found failing identities
  kNonExistence = 4,   // classify verdict
  kInconclusive = 5,   // classify verdict
};

/// Runs the tool with args (excluding the program name). Human-readable
/// output goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "x", "start:step:stop" (inclusive, step > 0) or "x1,x2,...".
std::vector<double> parse_values(const std::string& text);
/// "smin:smax:n".
SampleGrid parse_grid(const std::string& text);

/// JSON object with any subset of the SolverConfig keys; unknown keys and
/// wrong types are rejected with std::invalid_argument.
SolverConfig parse_config(const std::string& json_text);
std::string config_to_json(const SolverConfig& cfg);

/// Worker count from --jobs, then TM_SHARP_JOBS, then hardware concurrency.
int resolve_jobs(std::optional<int> flag);

/// Manifest path written next to an output file.
std::string manifest_path(const std::string& out);
/// Fit report path written next to a sweep CSV.
std::string fit_path(const std::string& out);

}  // namespace tmsharp::cli

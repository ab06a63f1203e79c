#pragma once

// Command-line front end: run records, their JSON/CSV encodings and the
// subcommand drivers. main() is a thin wrapper around run_cli so tests can
// drive every command in-process.

#include "nsnewton/problems.hpp"
#include "nsnewton/solvers.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nsnewton::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kRunSchema = "nsnewton.run/1";
inline constexpr const char* kBenchSchema = "nsnewton.bench/1";

enum ExitCode { kExitConverged = 0, kExitUsage = 1, kExitNotConverged = 2 };

struct RunConfig {
  double tol = 1e-10;
  double tol_step = 1e-12;
  int max_iter = 50;
  double eta = 1e-8;
  std::uint64_t seed = 0xC0FFEE;
};

struct RunRecord {
  std::string problem;
  Method method = Method::Graphical;
  Vector x0;
  RunConfig config;
  std::optional<Vector> root;
  /// "flag", "registered" or "none".
  std::string root_source = "none";
  SolveTrace trace;
  std::optional<RateDiagnostics> rate;
  /// Why `rate` is missing.
  std::string rate_note;
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;
};

/// Runs one solve. Without an explicit root the registered root nearest to
/// the final iterate is used for the error columns.
RunRecord make_run_record(const ProblemSpec& problem, Method method, const Vector& x0,
                          const RunConfig& config, const std::optional<Vector>& root,
                          bool timestamps = false);

Json to_json(const RunRecord& record);
/// InvalidArgument on a schema mismatch or a malformed record.
RunRecord run_record_from_json(const Json& j);

/// One row per iterate, header first, numbers at 17 significant digits.
std::string to_csv(const RunRecord& record);

Json to_json(const DerivativeValueSet& set);
Json vector_json(const Vector& v);
Vector vector_from_json(const Json& j);

/// Comma-separated reals; InvalidArgument on anything else.
Vector parse_vector(const std::string& text);

/// Full command line without the program name. Exit codes: 0 converged (or
/// checks passed), 2 not converged (or a check failed), 1 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nsnewton::cli

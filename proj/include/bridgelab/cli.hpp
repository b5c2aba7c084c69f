#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bridgelab/analytic.hpp"
#include "bridgelab/coeffs.hpp"
#include "json.hpp"

namespace bridgelab::cli {

/// One bridge plus run settings. Every field maps to a JSON key of the same
/// name; flags override values read from --config.
struct RunConfig {
  /// "alpha" or "ou".
  std::string bridge = "alpha";
  std::string alpha = "const:1";
  std::string q = "const:0";
  std::string sigma = "const:1";
  double a = 0.0;
  double b = 0.0;
  std::optional<double> T;
  /// default | uniform:N[:frac] | endpoint[:K] | stats[:m] | points:t1,t2,...
  std::string grid = "default";
  std::uint64_t paths = 1000;
  std::uint64_t seed = 0;
  /// exact | euler:substeps
  std::string scheme = "exact";
  /// Primary output path; empty or "-" means stdout.
  std::string out;
  /// csv | binary; empty means infer from the extension of `out`.
  std::string format;
  /// JSON output path (sidecar, verdict or report); empty picks a default.
  std::string json;
  /// Pairwise covariance table for `moments`.
  std::string cov_out;
  std::optional<double> C;
  double tol = 1e-6;
  /// analytic | mc
  std::string method = "analytic";

  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& c);
/// Strict: unknown keys and wrongly typed values throw Error(InvalidArgument).
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Builds the bridge described by the config. Needs T.
BridgeSpec make_spec(const RunConfig& c);

enum class GridUse { Sampling, Moments };
/// Resolves a grid policy. `default` is the standard grid for sampling and
/// 32 interior points for moments.
TimeGrid make_grid(const std::string& policy, double T, GridUse use);

/// Runs `bridge-lab <args...>` (args exclude the program name). Returns the
/// exit code: 0 success, 2 usage or config error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bridgelab::cli

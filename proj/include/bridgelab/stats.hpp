#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bridgelab/analytic.hpp"
#include "bridgelab/coeffs.hpp"
#include "json.hpp"

namespace bridgelab {

enum class Verdict { Equivalent, Distinct, Inconclusive };
std::string_view to_string(Verdict v) noexcept;

struct KsResult {
  double D = 0.0;
  /// Asymptotic two-sided p-value.
  double p = 1.0;
};

/// Two-sample Kolmogorov-Smirnov. Throws EmptySample.
KsResult ks_statistic(std::span<const double> a, std::span<const double> b);

/// Kolmogorov tail P(K > lambda).
double kolmogorov_tail(double lambda);

struct KsEntry {
  double t = 0.0;
  double D = 0.0;
  double p = 1.0;
};

struct EquivalenceReport {
  enum class Method { Analytic, MonteCarlo };
  Method method = Method::Analytic;
  std::vector<double> grid;
  double max_mean_gap = 0.0;
  double max_var_gap_rel = 0.0;
  double max_cov_gap_rel = 0.0;
  /// Per-time KS results (Monte Carlo only).
  std::vector<KsEntry> ks;
  /// Times used for the covariance Frobenius test and its p-value (Monte Carlo only).
  std::vector<double> cov_times;
  double cov_frobenius_gap = 0.0;
  double cov_p = 1.0;
  /// Smallest Bonferroni-adjusted p-value over the KS and covariance tests.
  double min_adjusted_p = 1.0;
  Verdict verdict = Verdict::Inconclusive;
  /// Gap tolerance (analytic) or family-wise level (Monte Carlo).
  double tol = 0.0;
  double level = 0.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string label_a, label_b;

  nlohmann::json to_json() const;
};

/// Compares means, variances and all pairwise covariances on the grid.
/// Gaps: mean absolute, variance and covariance relative to max(|a|, |b|).
EquivalenceReport analytic_equivalence(const BridgeSpec& a, const BridgeSpec& b, const TimeGrid& grid, double tol);

struct McOptions {
  /// Family-wise level for the Bonferroni-corrected suite.
  double level = 0.01;
  /// Family-wise p below this but above `level` is Inconclusive.
  double inconclusive_level = 0.05;
  std::size_t max_ks_times = 32;
  std::size_t max_cov_times = 8;
  int bootstrap = 100;
  unsigned threads = 0;
};

/// Samples both specs exactly and runs KS per test time plus a bootstrap
/// covariance test. Needs n_paths >= 10^4. Symmetric in (a, b).
EquivalenceReport mc_equivalence(const BridgeSpec& a, const BridgeSpec& b, const TimeGrid& grid, std::size_t n_paths,
                                 std::uint64_t seed, const McOptions& opt = {});

/// Evenly spaced subset of at most `cap` entries, endpoints kept.
std::vector<double> thin(std::span<const double> times, std::size_t cap);

}  // namespace bridgelab

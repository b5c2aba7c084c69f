#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bridgelab/analytic.hpp"
#include "bridgelab/coeffs.hpp"

namespace bridgelab {

enum class Scheme { Exact, EulerMaruyama };

struct SchemeSpec {
  Scheme kind = Scheme::Exact;
  /// Uniform Euler substeps per grid interval; 1 for Exact.
  int substeps = 1;
};

std::string to_string(const SchemeSpec& s);

/// N sampled paths on a grid. Values are path-major: value(i, j) is path i at grid[j].
struct PathEnsemble {
  TimeGrid grid;
  std::size_t n_paths = 0;
  std::vector<double> values;
  std::uint64_t seed = 0;
  /// RNG stream family; ensembles with different families are independent
  /// even under one seed.
  std::uint64_t family = 0;
  SchemeSpec scheme;
  std::uint64_t spec_digest = 0;
  std::string spec_label;

  double value(std::size_t path, std::size_t time) const { return values[path * grid.size() + time]; }
  std::span<const double> path(std::size_t i) const {
    return {values.data() + i * grid.size(), grid.size()};
  }
  std::vector<double> column(std::size_t time) const;
};

struct SampleOptions {
  std::uint64_t family = 0;
  /// 0 means hardware concurrency capped by BRIDGE_LAB_THREADS.
  unsigned threads = 0;
};

/// Worker count: hardware concurrency, capped by BRIDGE_LAB_THREADS when set.
unsigned worker_threads();

/// Draws each step from the exact Gauss-Markov transition. The grid must
/// start at 0 (the initial value) and share the spec's horizon.
PathEnsemble sample_exact(const BridgeSpec& spec, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                          const SampleOptions& opt = {});

/// Euler-Maruyama on the bridge SDE with `substeps` uniform steps per grid interval.
/// Throws DriftBlowup if |drift dt| exceeds 1e12.
PathEnsemble sample_euler(const BridgeSpec& spec, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                          int substeps, const SampleOptions& opt = {});

/// Linear drift A(t) x + B(t) of the bridge SDE.
struct LinearDrift {
  double slope = 0.0;
  double offset = 0.0;
  double operator()(double x) const { return slope * x + offset; }
};

/// -alpha(t)/(T - t) x.
LinearDrift alpha_bridge_drift(const AlphaBridge& spec, double t);
/// (q - e^{2(qbar(T)-qbar(t))} sigma^2 / gamma(t,T)) x + e^{qbar(T)-qbar(t)} sigma^2 b / gamma(t,T).
LinearDrift ou_bridge_drift(const OUBridge& spec, double t);
LinearDrift bridge_drift(const BridgeSpec& spec, double t);

struct EndpointRow {
  int k = 0;
  double t = 0.0;
  double mean_abs = 0.0;
  double mean_square = 0.0;
  /// Analytic Var X_t for comparison.
  double variance = 0.0;
};

/// Exact sampling at t_k = T(1 - 2^-k), k = 1..18.
std::vector<EndpointRow> endpoint_study(const AlphaBridge& spec, std::size_t n_paths, std::uint64_t seed);

/// Header `t,path0,path1,...`, one row per grid time, 17 significant digits.
void write_csv(const PathEnsemble& e, std::ostream& out);
/// Magic BRLB, u16 version, u64 n_times, u64 n_paths, f64 grid, f64 values; little-endian.
void write_binary(const PathEnsemble& e, std::ostream& out);
struct BinaryEnsemble {
  std::vector<double> grid;
  std::size_t n_paths = 0;
  std::vector<double> values;
};
BinaryEnsemble read_binary(std::istream& in);

}  // namespace bridgelab

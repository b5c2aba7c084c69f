#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bridgelab/coeffs.hpp"

namespace bridgelab {

/// One-dimensional Gaussian law. variance == 0 is a point mass.
struct GaussLaw {
  double mean = 0.0;
  double variance = 0.0;

  /// Throws DegenerateTransition for a point mass.
  double log_density(double y) const;
  double density(double y) const;
};

/// Log of the N(mean, variance) density at y; variance must be positive.
double log_gaussian(double y, double mean, double variance);

/// dZ = q(t) Z dt + sigma(t) dB on [0, T].
class OUSpec {
 public:
  /// Rejects sigma vanishing anywhere on a 1001-point grid over [0, T].
  OUSpec(CoefficientFn q, CoefficientFn sigma, double T);

  const CoefficientFn& q() const { return q_; }
  const CoefficientFn& sigma() const { return sigma_; }
  double horizon() const { return T_; }

  /// int_0^t q.
  double qbar(double t) const { return qbar_(t); }
  /// int_s^t exp(2(qbar(t) - qbar(u))) sigma(u)^2 du.
  double gamma(double s, double t) const;
  /// Canonical text used for digests.
  std::string label() const;

 private:
  CoefficientFn q_;
  CoefficientFn sigma_;
  double T_;
  Antiderivative qbar_;
};

double gamma(const OUSpec& ou, double s, double t);

/// Law of Z_t given Z_s = x.
GaussLaw ou_transition(const OUSpec& ou, double s, double t, double x);

/// n_{a,b}(s,t): conditional mean of the a -> b bridge at t given U_s = a.
double bridge_mean(const OUSpec& ou, double a, double b, double s, double t);
/// Conditional variance of the bridge at t given its value at s.
double bridge_variance(const OUSpec& ou, double s, double t);
/// Coefficient of x in n_{x,b}(s,t): (gamma(t,T)/gamma(s,T)) e^{qbar(t)-qbar(s)}.
double bridge_decay(const OUSpec& ou, double s, double t);

/// Log bridge transition density evaluated as the Gaussian
/// Gauss(n_{x,b}(s,t), sigma(s,t)) at y.
double bridge_log_density(const OUSpec& ou, double b, double s, double t, double x, double y);
/// Same quantity as log p_{s,t}(x,y) + log p_{t,T}(y,b) - log p_{s,T}(x,b).
double bridge_log_density_ratio(const OUSpec& ou, double b, double s, double t, double x, double y);
double bridge_transition_density(const OUSpec& ou, double b, double s, double t, double x, double y);

struct AlphaBridge {
  AlphaBridge(CoefficientFn alpha, double T);

  CoefficientFn alpha;
  double T;
  std::shared_ptr<const AlphaKernel> kernel;
};

struct OUBridge {
  OUSpec ou;
  double a = 0.0;
  double b = 0.0;
};

using BridgeSpec = std::variant<AlphaBridge, OUBridge>;

double horizon(const BridgeSpec& spec);
/// Value at t = 0.
double initial_value(const BridgeSpec& spec);
/// Canonical text, stable across runs; equal labels mean equal laws by construction.
std::string label(const BridgeSpec& spec);
/// FNV-1a of label().
std::uint64_t digest(const BridgeSpec& spec);

struct AlphaMoments {
  double propagator = 1.0;
  double mean = 0.0;
  /// Var X_t.
  double variance = 0.0;
  /// Cov(X_s, X_t).
  double covariance = 0.0;
};

/// Conditional variance int_s^t phi(u,t)^2 du of the alpha bridge.
double alpha_transition_variance(const AlphaBridge& spec, double s, double t);
AlphaMoments alpha_bridge_moments(const AlphaBridge& spec, double s, double t);

/// Means and covariance matrix of any bridge on a set of times.
struct GridMoments {
  std::vector<double> times;
  std::vector<double> mean;
  /// Row-major, times.size() squared.
  std::vector<double> cov;

  double covariance(std::size_t i, std::size_t j) const { return cov[i * times.size() + j]; }
  double variance(std::size_t i) const { return covariance(i, i); }
};

GridMoments grid_moments(const BridgeSpec& spec, std::span<const double> times);

/// Conditional law of the bridge at t given its value x at s (exact sampler step).
struct Transition {
  double decay = 1.0;
  double offset = 0.0;
  double variance = 0.0;
};

Transition transition(const BridgeSpec& spec, double s, double t);

enum class EndpointRegime { ConvergesToZero, SecondMomentDiverges, NondegenerateLimit, Unknown };

std::string_view to_string(EndpointRegime r) noexcept;

struct AlphaLimit {
  LimitEstimate estimate;
  /// alpha(T - T 2^-k), k = 1..40.
  std::vector<double> probes;
};

/// Probes alpha towards T; the tail must be stable over 5 probes within 1e-6.
AlphaLimit probe_alpha_limit(const CoefficientFn& alpha, double T);
EndpointRegime endpoint_regime(const AlphaBridge& spec);

}  // namespace bridgelab

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bridgelab/analytic.hpp"
#include "bridgelab/coeffs.hpp"

namespace bridgelab {

/// Evaluates q_C and D_C for one (alpha, T, C).
///
/// Works in v = -ln(T - t) with R = int (alpha - 1)/(T - u), g = T^2 e^{2R},
/// J = int_0^t (alpha - 1) g / (T - s)^2 ds and M = C - T - 2J:
///   D_C = (T - t)(1 + (T - t) M / g)
///   q_C = [-(alpha - 1)/(T - t) - alpha M / g] / (1 + (T - t) M / g)
/// which is free of the 1/(T - t) cancellation in -alpha/(T - t) + 1/D_C.
class RiccatiModel {
 public:
  RiccatiModel(std::shared_ptr<const AlphaKernel> kernel, double C);

  double C() const { return C_; }
  const AlphaKernel& kernel() const { return *kernel_; }

  double q_at_v(double v) const;
  double denominator_at_v(double v) const;
  /// int_0^t q_C, finite wherever q_C is.
  double qbar_at_v(double v) const;
  /// Largest v covered by the J lattice.
  double v_end() const;

 private:
  double J_at_v(double v) const;
  double scaled_M(double v) const;

  std::shared_ptr<const AlphaKernel> kernel_;
  double C_;
  double dv_;
  std::vector<double> knot_J_;
};

struct RiccatiIdentification {
  CoefficientFn alpha;
  double T = 0.0;
  double C = 0.0;
  /// q_C on [0, T), with primitive; no analytic derivative.
  CoefficientFn q_C;
  LimitEstimate limit_at_T;
  std::shared_ptr<const RiccatiModel> model;

  double denominator(double t) const;
};

/// Throws InvalidC unless 0 < C < inf, AlphaLimitNotOne unless the probed
/// alpha(T-) is finite and within 1e-4 of 1.
RiccatiIdentification identify(const CoefficientFn& alpha, double T, double C);

/// q'(t) + q(t)^2 - (alpha(alpha - 1) - alpha'(T - t))/(T - t)^2 for t in (0, T).
/// Missing (or numeric) derivatives use central differences with step
/// 1e-6 (T - t). Throws DerivativeUnavailable if a difference is not finite.
double riccati_residual(const CoefficientFn& alpha, double T, const CoefficientFn& q, double t);

/// q_C(T - T 2^-k) for k = 8..40.
std::vector<double> limit_probe_values(const RiccatiIdentification& ident);
LimitEstimate limit_probe(const RiccatiIdentification& ident);

enum class IdentityVerdict { ImpossibleLimitNotOne, ExistsWithFamily, NoContinuousExtension, Undetermined };

std::string_view to_string(IdentityVerdict v) noexcept;

struct FamilyProbe {
  double C = 0.0;
  LimitEstimate limit;
  /// Non-empty when identify or the probe failed numerically.
  std::string failure;
};

struct IdentityClassification {
  IdentityVerdict verdict = IdentityVerdict::Undetermined;
  LimitEstimate alpha_limit;
  std::vector<FamilyProbe> probes;
  /// The C probes disagreed.
  bool mixed = false;
};

/// Probes C in {0.1, 1, 10} T; heuristic in the mixed case.
IdentityClassification classify_identical_bridge(const CoefficientFn& alpha, double T);

/// (T - C) / ((T - C) t + C T). Throws InvalidC unless C > 0.
CoefficientFn wiener_case_closed_form(double T, double C);

}  // namespace bridgelab

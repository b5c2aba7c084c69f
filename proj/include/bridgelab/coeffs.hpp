#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bridgelab/quadrature.hpp"

namespace bridgelab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A scalar function of time: alpha(t), q(t) or sigma(t).
///
/// `deriv` and `primitive` are optional. When `primitive` is set it returns
/// the integral of `eval` over [s, t] in closed form. `label` is a canonical
/// description used for content digests; two functions with equal labels are
/// treated as the same function.
struct CoefficientFn {
  std::function<double(double)> eval;
  std::function<double(double)> deriv;
  std::function<double(double, double)> primitive;
  /// Exclusive end of the domain (the singular endpoint, or +inf).
  double domain_end = kInfinity;
  /// True when `deriv` is a finite-difference/segment slope, not analytic.
  bool numeric_deriv = false;
  /// Sorted points where eval is not smooth; quadrature splits there.
  std::vector<double> breakpoints;
  /// Optional tau -> f(gap_origin - tau), accurate for tiny tau. An infinite
  /// gap_origin marks a function that does not depend on the origin.
  std::function<double(double)> gap_eval;
  double gap_origin = std::numeric_limits<double>::quiet_NaN();
  /// Optional tau -> f(gap_origin - tau) - 1 without the cancellation.
  std::function<double(double)> gap_excess;
  /// The value when f is known to be constant, NaN otherwise.
  double constant_value = std::numeric_limits<double>::quiet_NaN();
  std::string label = "custom";

  double operator()(double t) const { return eval(t); }
  bool has_deriv() const { return static_cast<bool>(deriv); }
  bool has_primitive() const { return static_cast<bool>(primitive); }
  /// f(T - tau) - 1, through gap_excess when it is anchored at T.
  double excess_before(double T, double tau) const {
    return (gap_excess && (gap_origin == T || std::isinf(gap_origin))) ? gap_excess(tau)
                                                                       : before(T, tau) - 1.0;
  }
  bool is_constant() const { return !std::isnan(constant_value); }
  /// f(T - tau), through gap_eval when it is anchored at T.
  double before(double T, double tau) const {
    return (gap_eval && (gap_origin == T || std::isinf(gap_origin))) ? gap_eval(tau) : eval(T - tau);
  }
};

/// Builtin coefficient families.
namespace coef {

CoefficientFn constant(double c);
/// c0 + c1 t.
CoefficientFn linear(double c0, double c1);
/// 1 / (t + shift); shift must be nonzero.
CoefficientFn reciprocal(double shift);
/// 1 + sign (T - t)^beta on [0, T).
CoefficientFn power_offset(int sign, double beta, double T);
/// q0 (T - t) coth(q0 (T - t)) on [0, T); q0 must be nonzero.
CoefficientFn coth_drift(double q0, double T);
/// (T - C) / ((T - C) t + C T), the drift family identifying the Wiener bridge.
CoefficientFn wiener_identifying(double T, double C);
/// Piecewise-linear interpolation through (times[i], values[i]); constant
/// beyond the table ends. The derivative is the segment slope.
CoefficientFn tabulated(std::vector<double> times, std::vector<double> values);
/// Wraps an arbitrary callable with no derivative or primitive.
CoefficientFn from_function(std::function<double(double)> f, std::string label = "custom",
                            double domain_end = kInfinity);

/// Parses `const:a`, `lin:c0,c1`, `recip:c`, `poly1p:b`, `poly1m:b`, `coth:q`,
/// `wiener:C` and `table:<path>` (two columns t,value; `#` comments allowed).
/// Throws Error(InvalidArgument) on malformed input.
CoefficientFn parse(std::string_view spec, double T);

}  // namespace coef

/// Integral of f over [s, t], 0 <= s <= t <= f.domain_end. Uses the closed-form
/// primitive when present, otherwise adaptive quadrature with absolute error
/// target `tol`. Returns exactly 0 when s == t.
double integrate(const CoefficientFn& f, double s, double t, double tol);

/// log of the alpha-bridge propagator, -int_s^t alpha(u)/(T-u) du, for
/// 0 <= s <= t < T. Evaluated with the substitution u = T - exp(-v), which
/// turns the 1/(T-u) factor into a unit Jacobian.
double log_phi(const CoefficientFn& alpha, double T, double s, double t);

/// Cached evaluator for integrals against 1/(T-u).
///
/// Works in the variable v = -ln(T - u). The excess
///   R(t) = int_0^t (alpha(u) - 1)/(T - u) du
/// is tabulated on a uniform v lattice; lookups add one short quadrature to
/// the nearest knot below. Immutable after construction.
class AlphaKernel {
 public:
  AlphaKernel(CoefficientFn alpha, double T);

  const CoefficientFn& alpha() const { return alpha_; }
  double horizon() const { return T_; }

  double to_v(double t) const;
  double v_origin() const { return v0_; }
  /// alpha evaluated at u = T - exp(-v).
  double alpha_at_v(double v) const;
  /// alpha - 1 at u = T - exp(-v).
  double alpha_excess_at_v(double v) const;
  /// R as a function of v.
  double excess_at_v(double v) const;
  double excess(double t) const { return excess_at_v(to_v(t)); }
  double log_phi(double s, double t) const;

 private:
  CoefficientFn alpha_;
  double T_;
  double v0_;
  double dv_;
  std::vector<double> knot_excess_;
};

/// Cumulative integral F(t) = int_0^t f for t in [0, end], tabulated on
/// uniform knots (or taken from f.primitive when available).
class Antiderivative {
 public:
  Antiderivative() = default;
  Antiderivative(CoefficientFn f, double end, std::size_t knots = 64);

  double operator()(double t) const;
  /// int_s^t f.
  double between(double s, double t) const;
  double end() const { return end_; }

 private:
  CoefficientFn f_;
  double end_ = 0.0;
  double step_ = 0.0;
  std::vector<double> knot_values_;
};

/// Strictly increasing times in [0, T - eps_end].
class TimeGrid {
 public:
  /// eps_end < 0 selects the default 1e-9 T.
  TimeGrid(std::vector<double> points, double T, double eps_end = -1.0);

  /// n points evenly spaced on [0, end_fraction T].
  static TimeGrid uniform(double T, std::size_t n, double end_fraction = 0.9);
  /// 256 uniform points on [0, 0.9T] merged with T(1 - 2^-k), k = 1..18.
  static TimeGrid standard(double T);
  /// 0 followed by T(1 - 2^-k), k = 1..k_max.
  static TimeGrid endpoint(double T, int k_max = 18);
  /// T i/(m+1), i = 1..m (excludes 0, where every bridge is degenerate).
  static TimeGrid interior(double T, std::size_t m = 32);

  std::span<const double> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double horizon() const { return T_; }
  double eps_end() const { return eps_end_; }

 private:
  std::vector<double> points_;
  double T_;
  double eps_end_;
};

enum class LimitKind { Finite, Diverges, Undetermined };

std::string_view to_string(LimitKind kind) noexcept;

struct LimitEstimate {
  LimitKind kind = LimitKind::Undetermined;
  /// Extrapolated limit when kind == Finite, NaN otherwise.
  double value = std::numeric_limits<double>::quiet_NaN();
};

/// Classification rule for a sequence sampled towards a singular endpoint.
struct ProbeRule {
  /// Tail length inspected.
  std::size_t window = 6;
  double abs_tol = 1e-5;
  double rel_tol = 1e-3;
  /// |value| above which a monotone tail counts as divergent outright.
  double blowup = 1e8;
  /// Successive increments shrinking faster than this ratio count as a
  /// convergent geometric tail; slower monotone growth counts as divergent.
  double geometric_ratio = 0.9;
};

/// Finite if the tail spread is within max(abs_tol, rel_tol |last|) or the
/// increments decay geometrically (Aitken-extrapolated); Diverges if |value|
/// grows monotonically past `blowup` or with non-decaying increments;
/// Undetermined otherwise.
LimitEstimate classify_sequence(std::span<const double> values, const ProbeRule& rule);

/// T - T 2^-k for k = k_first..k_last.
std::vector<double> horizon_probe_times(double T, int k_first, int k_last);

}  // namespace bridgelab

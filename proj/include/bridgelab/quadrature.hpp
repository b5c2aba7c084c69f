#pragma once

// Adaptive Gauss-Kronrod (10/21) quadrature with global bisection.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "bridgelab/errors.hpp"

namespace bridgelab {

struct Tolerance {
  double abs = 1e-12;
  double rel = 0.0;
  /// Evaluation budget per call; exceeding it raises ToleranceNotMet.
  std::size_t max_evals = 1'000'000;
  /// Stop instead of throwing once bisection stops reducing the error
  /// estimate (integrand noise dominates).
  bool accept_roundoff = false;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evals = 0;
};

namespace detail {

inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208814236013, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a, b, value, error, abs_value;
};

inline void check_finite(double v, double x) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NonFiniteIntegrand,
                "integrand is " + std::to_string(v) + " at " + std::to_string(x));
  }
}

template <class F>
Panel kronrod21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  check_finite(fc, center);
  double kronrod = fc * kKronrodWeights[10];
  double gauss = 0.0;
  double resabs = std::abs(kronrod);
  std::array<double, 10> f1{}, f2{};
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double lo = f(center - dx);
    const double hi = f(center + dx);
    check_finite(lo, center - dx);
    check_finite(hi, center + dx);
    f1[j] = lo;
    f2[j] = hi;
    kronrod += kKronrodWeights[j] * (lo + hi);
    resabs += kKronrodWeights[j] * (std::abs(lo) + std::abs(hi));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (lo + hi);
  }
  const double mean = 0.5 * kronrod;
  double resasc = kKronrodWeights[10] * std::abs(fc - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    resasc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  const double ahalf = std::abs(half);
  const double value = kronrod * half;
  resabs *= ahalf;
  resasc *= ahalf;
  double err = std::abs((kronrod - gauss) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {a, b, value, err, resabs};
}

}  // namespace detail

/// Integrates a plain callable over [a, b]. Nodes are strictly interior, so
/// integrable endpoint singularities are never evaluated. Reproducible
/// bit-for-bit for fixed inputs.
template <class F>
QuadratureResult adaptive_integrate(F&& f, double a, double b, const Tolerance& tol) {
  if (a == b) return {};
  if (!(std::isfinite(a) && std::isfinite(b))) {
    throw Error(ErrorKind::InvalidArgument, "integration limits must be finite");
  }
  const bool flip = b < a;
  if (flip) std::swap(a, b);

  auto by_error = [](const detail::Panel& x, const detail::Panel& y) { return x.error < y.error; };
  std::vector<detail::Panel> heap;
  heap.push_back(detail::kronrod21(f, a, b));
  std::size_t evals = 21;
  int roundoff_hits = 0;
  bool roundoff_limited = false;
  double value = heap.front().value;
  double error = heap.front().error;
  double abs_value = heap.front().abs_value;
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (;;) {
    const double target = std::max({tol.abs, tol.rel * std::abs(value), 64.0 * eps * abs_value});
    if (error <= target || roundoff_limited) break;
    if (evals + 42 > tol.max_evals) {
      if (tol.accept_roundoff && roundoff_hits > 0) break;
      throw Error(ErrorKind::ToleranceNotMet,
                  "budget of " + std::to_string(tol.max_evals) + " evaluations exhausted on [" +
                      std::to_string(a) + ", " + std::to_string(b) + "], error estimate " +
                      std::to_string(error));
    }
    std::pop_heap(heap.begin(), heap.end(), by_error);
    const detail::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      if (tol.accept_roundoff) break;
      throw Error(ErrorKind::ToleranceNotMet,
                  "interval cannot be bisected further near " + std::to_string(mid));
    }
    const detail::Panel left = detail::kronrod21(f, worst.a, mid);
    const detail::Panel right = detail::kronrod21(f, mid, worst.b);
    evals += 42;
    if (tol.accept_roundoff) {
      const double children = left.value + right.value;
      const bool agree = std::abs(children - worst.value) <= 1e-5 * std::abs(children) + worst.error;
      if (agree && left.error + right.error >= 0.99 * worst.error) ++roundoff_hits;
      // Smooth panels shrink their error by orders of magnitude per split.
      if (roundoff_hits >= 20) roundoff_limited = true;
    }
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), by_error);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), by_error);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    abs_value += left.abs_value + right.abs_value - worst.abs_value;
  }
  // Final sums come from the panel list so running-update round-off does not leak.
  if (heap.size() > 1) {
    value = 0.0;
    error = 0.0;
    for (const auto& p : heap) {
      value += p.value;
      error += p.error;
    }
  }
  if (flip) value = -value;
  return {value, error, evals};
}

}  // namespace bridgelab

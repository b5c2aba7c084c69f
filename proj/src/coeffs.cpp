#include "bridgelab/coeffs.hpp"

#include <algorithm>
#include <cmath>

namespace bridgelab {

namespace {

constexpr double kKernelStep = 0.25;
// Knots cover T - u down to T e^-37, below every probe point used anywhere.
constexpr double kKernelSpan = 37.0;
constexpr Tolerance kTight{1e-14, 1e-13, 1'000'000, true};

}  // namespace

double integrate(const CoefficientFn& f, double s, double t, double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  if (!(s >= 0.0 && s <= t && t <= f.domain_end)) {
    throw Error(ErrorKind::InvalidArgument, "integration interval [" + std::to_string(s) + ", " +
                                                std::to_string(t) + "] outside domain");
  }
  if (s == t) return 0.0;
  if (f.has_primitive()) {
    const double v = f.primitive(s, t);
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteIntegrand, "primitive is not finite");
    return v;
  }
  const auto first = std::upper_bound(f.breakpoints.begin(), f.breakpoints.end(), s);
  const auto last = std::lower_bound(first, f.breakpoints.end(), t);
  const auto pieces = static_cast<double>(std::distance(first, last) + 1);
  const Tolerance piece_tol{tol / pieces, 0.0};
  double sum = 0.0;
  double a = s;
  for (auto it = first; it != last; ++it) {
    sum += adaptive_integrate(f.eval, a, *it, piece_tol).value;
    a = *it;
  }
  return sum + adaptive_integrate(f.eval, a, t, piece_tol).value;
}

double log_phi(const CoefficientFn& alpha, double T, double s, double t) {
  if (!(s >= 0.0 && s <= t && t < T)) {
    throw Error(ErrorKind::InvalidArgument, "log_phi requires 0 <= s <= t < T");
  }
  if (s == t) return 0.0;
  const double vs = -std::log(T - s);
  const double vt = -std::log(T - t);
  auto excess = [&](double v) { return alpha.excess_before(T, std::exp(-v)); };
  return -std::log((T - s) / (T - t)) - adaptive_integrate(excess, vs, vt, kTight).value;
}

AlphaKernel::AlphaKernel(CoefficientFn alpha, double T)
    : alpha_(std::move(alpha)), T_(T), v0_(-std::log(T)), dv_(kKernelStep) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  if (!alpha_.eval) throw Error(ErrorKind::InvalidArgument, "alpha has no evaluator");
  if (alpha_.domain_end < T) {
    throw Error(ErrorKind::InvalidArgument, "alpha must be defined on [0, T)");
  }
  const auto knots = static_cast<std::size_t>(std::ceil(kKernelSpan / dv_)) + 1;
  knot_excess_.assign(knots, 0.0);
  auto excess = [this](double v) { return alpha_excess_at_v(v); };
  for (std::size_t k = 1; k < knots; ++k) {
    const double a = v0_ + dv_ * static_cast<double>(k - 1);
    const double b = v0_ + dv_ * static_cast<double>(k);
    knot_excess_[k] = knot_excess_[k - 1] + adaptive_integrate(excess, a, b, kTight).value;
  }
}

double AlphaKernel::to_v(double t) const {
  if (!(t >= 0.0 && t < T_)) throw Error(ErrorKind::InvalidArgument, "time outside [0, T)");
  return -std::log(T_ - t);
}

double AlphaKernel::alpha_at_v(double v) const { return alpha_.before(T_, std::exp(-v)); }

double AlphaKernel::alpha_excess_at_v(double v) const { return alpha_.excess_before(T_, std::exp(-v)); }

double AlphaKernel::excess_at_v(double v) const {
  if (v <= v0_) return 0.0;
  const double pos = (v - v0_) / dv_;
  const auto last = knot_excess_.size() - 1;
  const auto k = std::min(static_cast<std::size_t>(pos), last);
  const double vk = v0_ + dv_ * static_cast<double>(k);
  if (v == vk) return knot_excess_[k];
  auto excess = [this](double w) { return alpha_excess_at_v(w); };
  return knot_excess_[k] + adaptive_integrate(excess, vk, v, kTight).value;
}

double AlphaKernel::log_phi(double s, double t) const {
  if (!(s >= 0.0 && s <= t && t < T_)) {
    throw Error(ErrorKind::InvalidArgument, "log_phi requires 0 <= s <= t < T");
  }
  if (s == t) return 0.0;
  return -std::log((T_ - s) / (T_ - t)) - (excess_at_v(to_v(t)) - excess_at_v(to_v(s)));
}

Antiderivative::Antiderivative(CoefficientFn f, double end, std::size_t knots)
    : f_(std::move(f)), end_(end) {
  if (!(end > 0.0) || !std::isfinite(end)) {
    throw Error(ErrorKind::InvalidArgument, "antiderivative end must be positive");
  }
  if (f_.domain_end < end) throw Error(ErrorKind::InvalidArgument, "function undefined on [0, end]");
  if (f_.has_primitive()) return;
  knots = std::max<std::size_t>(knots, 1);
  step_ = end / static_cast<double>(knots);
  knot_values_.assign(knots + 1, 0.0);
  for (std::size_t k = 1; k <= knots; ++k) {
    const double a = step_ * static_cast<double>(k - 1);
    const double b = (k == knots) ? end : step_ * static_cast<double>(k);
    knot_values_[k] = knot_values_[k - 1] + adaptive_integrate(f_.eval, a, b, kTight).value;
  }
}

double Antiderivative::operator()(double t) const {
  if (!(t >= 0.0 && t <= end_)) throw Error(ErrorKind::InvalidArgument, "time outside [0, end]");
  if (f_.has_primitive()) return t == 0.0 ? 0.0 : f_.primitive(0.0, t);
  const auto last = knot_values_.size() - 1;
  const auto k = std::min(static_cast<std::size_t>(t / step_), last);
  const double tk = (k == last) ? end_ : step_ * static_cast<double>(k);
  if (t == tk) return knot_values_[k];
  return knot_values_[k] + adaptive_integrate(f_.eval, tk, t, kTight).value;
}

double Antiderivative::between(double s, double t) const {
  if (s == t) return 0.0;
  if (f_.has_primitive()) return f_.primitive(s, t);
  return (*this)(t) - (*this)(s);
}

TimeGrid::TimeGrid(std::vector<double> points, double T, double eps_end)
    : points_(std::move(points)), T_(T), eps_end_(eps_end < 0.0 ? 1e-9 * T : eps_end) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidGrid, "horizon must be positive");
  if (!(eps_end_ > 0.0)) throw Error(ErrorKind::InvalidGrid, "eps_end must be positive");
  if (points_.empty()) throw Error(ErrorKind::InvalidGrid, "grid is empty");
  if (!(points_.front() >= 0.0)) throw Error(ErrorKind::InvalidGrid, "grid starts before 0");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw Error(ErrorKind::InvalidGrid, "grid must be strictly increasing");
    }
  }
  if (!(points_.back() <= T - eps_end_)) {
    throw Error(ErrorKind::GridBeyondHorizon,
                "last grid point " + std::to_string(points_.back()) + " is within eps_end of T");
  }
}

TimeGrid TimeGrid::uniform(double T, std::size_t n, double end_fraction) {
  if (n == 0) throw Error(ErrorKind::InvalidGrid, "grid is empty");
  if (!(end_fraction > 0.0 && end_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidGrid, "end fraction must lie in (0, 1)");
  }
  std::vector<double> pts(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    pts[i] = end_fraction * T * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return TimeGrid(std::move(pts), T);
}

TimeGrid TimeGrid::standard(double T) {
  std::vector<double> pts = uniform(T, 256, 0.9).points_;
  for (int k = 1; k <= 18; ++k) pts.push_back(T - T * std::ldexp(1.0, -k));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return TimeGrid(std::move(pts), T);
}

TimeGrid TimeGrid::endpoint(double T, int k_max) {
  if (k_max < 1) throw Error(ErrorKind::InvalidGrid, "k_max must be at least 1");
  std::vector<double> pts{0.0};
  for (int k = 1; k <= k_max; ++k) pts.push_back(T - T * std::ldexp(1.0, -k));
  return TimeGrid(std::move(pts), T);
}

TimeGrid TimeGrid::interior(double T, std::size_t m) {
  if (m == 0) throw Error(ErrorKind::InvalidGrid, "grid is empty");
  std::vector<double> pts(m);
  for (std::size_t i = 0; i < m; ++i) {
    pts[i] = T * static_cast<double>(i + 1) / static_cast<double>(m + 1);
  }
  return TimeGrid(std::move(pts), T);
}

std::string_view to_string(LimitKind kind) noexcept {
  switch (kind) {
    case LimitKind::Finite: return "Finite";
    case LimitKind::Diverges: return "Diverges";
    case LimitKind::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

LimitEstimate classify_sequence(std::span<const double> values, const ProbeRule& rule) {
  const std::size_t window = std::max<std::size_t>(rule.window, 3);
  if (values.size() < window) return {};
  const auto tail = values.subspan(values.size() - window);
  for (double v : tail) {
    if (std::isinf(v)) return {LimitKind::Diverges};
    if (std::isnan(v)) return {};
  }
  const double last = tail.back();
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  if (*hi - *lo <= std::max(rule.abs_tol, rule.rel_tol * std::abs(last))) {
    return {LimitKind::Finite, last};
  }

  std::vector<double> inc(window - 1);
  for (std::size_t i = 1; i < window; ++i) inc[i - 1] = tail[i] - tail[i - 1];
  bool same_sign = true;
  bool geometric = true;
  double ratio = 0.0;
  for (std::size_t i = 1; i < inc.size(); ++i) {
    if (inc[i] == 0.0 || inc[i - 1] == 0.0 || (inc[i] > 0.0) != (inc[i - 1] > 0.0)) {
      same_sign = false;
      break;
    }
    ratio = inc[i] / inc[i - 1];
    if (!(ratio > 0.0 && ratio <= rule.geometric_ratio)) geometric = false;
  }
  if (same_sign && geometric) {
    return {LimitKind::Finite, last + inc.back() * ratio / (1.0 - ratio)};
  }

  bool growing = true;
  bool shrinking_increments = true;
  for (std::size_t i = 1; i < window; ++i) {
    const double d = std::abs(tail[i]) - std::abs(tail[i - 1]);
    if (!(d > 0.0)) growing = false;
    if (i >= 2) {
      const double prev = std::abs(tail[i - 1]) - std::abs(tail[i - 2]);
      if (!(d <= rule.geometric_ratio * prev)) shrinking_increments = false;
    }
  }
  if (growing && (std::abs(last) > rule.blowup || !shrinking_increments)) {
    return {LimitKind::Diverges};
  }
  return {};
}

std::vector<double> horizon_probe_times(double T, int k_first, int k_last) {
  std::vector<double> out;
  for (int k = k_first; k <= k_last; ++k) out.push_back(T - T * std::ldexp(1.0, -k));
  return out;
}

}  // namespace bridgelab

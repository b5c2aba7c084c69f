#include "bridgelab/analytic.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>

namespace bridgelab {

namespace {

constexpr Tolerance kMoment{0.0, 1e-12, 1'000'000, true};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_order(double s, double t, double T, bool t_inclusive, const char* what) {
  const bool ok = s >= 0.0 && s <= t && (t_inclusive ? t <= T : t < T);
  if (!ok) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + ": need 0 <= s <= t " + (t_inclusive ? "<=" : "<") + " T, got s=" +
                    fmt(s) + " t=" + fmt(t));
  }
}

}  // namespace

double log_gaussian(double y, double mean, double variance) {
  if (!(variance > 0.0)) throw Error(ErrorKind::DegenerateTransition, "variance must be positive");
  const double z = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + z * z / variance);
}

double GaussLaw::log_density(double y) const { return log_gaussian(y, mean, variance); }
double GaussLaw::density(double y) const { return std::exp(log_density(y)); }

OUSpec::OUSpec(CoefficientFn q, CoefficientFn sigma, double T)
    : q_(std::move(q)), sigma_(std::move(sigma)), T_(T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  if (!q_.eval || !sigma_.eval) throw Error(ErrorKind::InvalidArgument, "q and sigma need evaluators");
  if (q_.domain_end < T || sigma_.domain_end < T) {
    throw Error(ErrorKind::InvalidArgument, "q and sigma must be defined on [0, T]");
  }
  const int n = 1000;
  const int last = sigma_.domain_end > T ? n : n - 1;
  for (int i = 0; i <= last; ++i) {
    const double t = T * i / n;
    const double s = sigma_(t);
    if (!(s != 0.0) || !std::isfinite(s)) {
      throw Error(ErrorKind::InvalidSigma, "sigma vanishes or is not finite at t=" + fmt(t));
    }
  }
  qbar_ = Antiderivative(q_, T);
}

double OUSpec::gamma(double s, double t) const {
  check_order(s, t, T_, true, "gamma");
  if (s == t) return 0.0;
  if (q_.is_constant() && sigma_.is_constant()) {
    const double q = q_.constant_value;
    const double s2 = sigma_.constant_value * sigma_.constant_value;
    if (q == 0.0) return s2 * (t - s);
    return s2 * std::expm1(2.0 * q * (t - s)) / (2.0 * q);
  }
  const double qt = qbar(t);
  auto integrand = [&](double u) {
    const double sg = sigma_(u);
    return std::exp(2.0 * (qt - qbar(u))) * sg * sg;
  };
  return adaptive_integrate(integrand, s, t, kMoment).value;
}

std::string OUSpec::label() const {
  return "ou(q=" + q_.label + ",sigma=" + sigma_.label + ",T=" + fmt(T_) + ")";
}

double gamma(const OUSpec& ou, double s, double t) { return ou.gamma(s, t); }

GaussLaw ou_transition(const OUSpec& ou, double s, double t, double x) {
  check_order(s, t, ou.horizon(), true, "ou_transition");
  if (s == t) throw Error(ErrorKind::DegenerateTransition, "transition over an empty interval");
  return {std::exp(ou.qbar(t) - ou.qbar(s)) * x, ou.gamma(s, t)};
}

double bridge_decay(const OUSpec& ou, double s, double t) {
  const double T = ou.horizon();
  check_order(s, t, T, false, "bridge_decay");
  if (s == t) return 1.0;
  return ou.gamma(t, T) / ou.gamma(s, T) * std::exp(ou.qbar(t) - ou.qbar(s));
}

double bridge_mean(const OUSpec& ou, double a, double b, double s, double t) {
  const double T = ou.horizon();
  check_order(s, t, T, false, "bridge_mean");
  if (s == t) return a;
  const double gsT = ou.gamma(s, T);
  const double to_b = ou.gamma(s, t) / gsT * std::exp(ou.qbar(T) - ou.qbar(t));
  const double to_a = ou.gamma(t, T) / gsT * std::exp(ou.qbar(t) - ou.qbar(s));
  return to_b * b + to_a * a;
}

double bridge_variance(const OUSpec& ou, double s, double t) {
  const double T = ou.horizon();
  check_order(s, t, T, false, "bridge_variance");
  if (s == t) return 0.0;
  return ou.gamma(s, t) * ou.gamma(t, T) / ou.gamma(s, T);
}

double bridge_log_density(const OUSpec& ou, double b, double s, double t, double x, double y) {
  check_order(s, t, ou.horizon(), false, "bridge_log_density");
  if (s == t) throw Error(ErrorKind::DegenerateTransition, "transition over an empty interval");
  return log_gaussian(y, bridge_mean(ou, x, b, s, t), bridge_variance(ou, s, t));
}

double bridge_log_density_ratio(const OUSpec& ou, double b, double s, double t, double x, double y) {
  const double T = ou.horizon();
  check_order(s, t, T, false, "bridge_log_density_ratio");
  if (s == t) throw Error(ErrorKind::DegenerateTransition, "transition over an empty interval");
  return ou_transition(ou, s, t, x).log_density(y) + ou_transition(ou, t, T, y).log_density(b) -
         ou_transition(ou, s, T, x).log_density(b);
}

double bridge_transition_density(const OUSpec& ou, double b, double s, double t, double x, double y) {
  return std::exp(bridge_log_density(ou, b, s, t, x, y));
}

AlphaBridge::AlphaBridge(CoefficientFn a, double horizon)
    : alpha(std::move(a)), T(horizon), kernel(std::make_shared<const AlphaKernel>(alpha, horizon)) {}

double horizon(const BridgeSpec& spec) {
  return std::visit(
      [](const auto& b) {
        if constexpr (std::is_same_v<std::decay_t<decltype(b)>, AlphaBridge>) {
          return b.T;
        } else {
          return b.ou.horizon();
        }
      },
      spec);
}

double initial_value(const BridgeSpec& spec) {
  if (const auto* ou = std::get_if<OUBridge>(&spec)) return ou->a;
  return 0.0;
}

std::string label(const BridgeSpec& spec) {
  if (const auto* ab = std::get_if<AlphaBridge>(&spec)) {
    return "alpha-bridge(alpha=" + ab->alpha.label + ",T=" + fmt(ab->T) + ")";
  }
  const auto& ob = std::get<OUBridge>(spec);
  return "ou-bridge(" + ob.ou.label() + ",a=" + fmt(ob.a) + ",b=" + fmt(ob.b) + ")";
}

std::uint64_t digest(const BridgeSpec& spec) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : label(spec)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double alpha_transition_variance(const AlphaBridge& spec, double s, double t) {
  check_order(s, t, spec.T, false, "alpha_transition_variance");
  if (s == t) return 0.0;
  const auto& k = *spec.kernel;
  const double vs = k.to_v(s);
  const double vt = k.to_v(t);
  const double rt = k.excess_at_v(vt);
  // phi(u,t)^2 du = (T-t) exp(-(vt - v) - 2(R(vt) - R(v))) dv.
  auto integrand = [&](double v) { return std::exp(-(vt - v) - 2.0 * (rt - k.excess_at_v(v))); };
  return (spec.T - t) * adaptive_integrate(integrand, vs, vt, kMoment).value;
}

AlphaMoments alpha_bridge_moments(const AlphaBridge& spec, double s, double t) {
  check_order(s, t, spec.T, false, "alpha_bridge_moments");
  AlphaMoments m;
  m.propagator = std::exp(spec.kernel->log_phi(s, t));
  m.variance = alpha_transition_variance(spec, 0.0, t);
  const double vs = s == t ? m.variance : alpha_transition_variance(spec, 0.0, s);
  m.covariance = m.propagator * vs;
  return m;
}

GridMoments grid_moments(const BridgeSpec& spec, std::span<const double> times) {
  const double T = horizon(spec);
  const std::size_t n = times.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(times[i] >= 0.0 && times[i] < T) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw Error(ErrorKind::InvalidGrid, "moment times must increase strictly within [0, T)");
    }
  }
  GridMoments out;
  out.times.assign(times.begin(), times.end());
  out.mean.assign(n, 0.0);
  out.cov.assign(n * n, 0.0);
  std::vector<double> var(n);
  if (const auto* ab = std::get_if<AlphaBridge>(&spec)) {
    for (std::size_t i = 0; i < n; ++i) var[i] = alpha_transition_variance(*ab, 0.0, times[i]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double c = std::exp(ab->kernel->log_phi(times[i], times[j])) * var[i];
        out.cov[i * n + j] = out.cov[j * n + i] = c;
      }
    }
    return out;
  }
  const auto& ob = std::get<OUBridge>(spec);
  for (std::size_t i = 0; i < n; ++i) {
    out.mean[i] = bridge_mean(ob.ou, ob.a, ob.b, 0.0, times[i]);
    var[i] = bridge_variance(ob.ou, 0.0, times[i]);
  }
  // Cov(U_s, U_t) = A(s,t) Var U_s with A(s,t) = g(t) / g(s), g(t) = gamma(t,T) e^{qbar(t)}.
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = ob.ou.gamma(times[i], T) * std::exp(ob.ou.qbar(times[i]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double c = (i == j ? 1.0 : g[j] / g[i]) * var[i];
      out.cov[i * n + j] = out.cov[j * n + i] = c;
    }
  }
  return out;
}

Transition transition(const BridgeSpec& spec, double s, double t) {
  if (const auto* ab = std::get_if<AlphaBridge>(&spec)) {
    check_order(s, t, ab->T, false, "transition");
    return {std::exp(ab->kernel->log_phi(s, t)), 0.0, alpha_transition_variance(*ab, s, t)};
  }
  const auto& ob = std::get<OUBridge>(spec);
  const double decay = bridge_decay(ob.ou, s, t);
  return {decay, bridge_mean(ob.ou, 0.0, ob.b, s, t), bridge_variance(ob.ou, s, t)};
}

std::string_view to_string(EndpointRegime r) noexcept {
  switch (r) {
    case EndpointRegime::ConvergesToZero: return "ConvergesToZero";
    case EndpointRegime::SecondMomentDiverges: return "SecondMomentDiverges";
    case EndpointRegime::NondegenerateLimit: return "NondegenerateLimit";
    case EndpointRegime::Unknown: return "Unknown";
  }
  return "Unknown";
}

AlphaLimit probe_alpha_limit(const CoefficientFn& alpha, double T) {
  AlphaLimit out;
  for (int k = 1; k <= 40; ++k) out.probes.push_back(alpha.before(T, T * std::ldexp(1.0, -k)));
  ProbeRule rule;
  rule.window = 5;
  rule.abs_tol = 1e-6;
  rule.rel_tol = 0.0;
  out.estimate = classify_sequence(out.probes, rule);
  return out;
}

EndpointRegime endpoint_regime(const AlphaBridge& spec) {
  constexpr double tol = 1e-6;
  const auto lim = probe_alpha_limit(spec.alpha, spec.T);
  bool all_zero = true;
  for (double v : lim.probes) all_zero = all_zero && std::abs(v) <= tol;
  if (all_zero) return EndpointRegime::NondegenerateLimit;
  if (lim.estimate.kind != LimitKind::Finite) return EndpointRegime::Unknown;
  if (lim.estimate.value > tol) return EndpointRegime::ConvergesToZero;
  if (lim.estimate.value < -tol) return EndpointRegime::SecondMomentDiverges;
  return EndpointRegime::Unknown;
}

}  // namespace bridgelab

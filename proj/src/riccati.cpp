#include "bridgelab/riccati.hpp"

#include <cmath>
#include <cstdio>

namespace bridgelab {

namespace {

constexpr double kStep = 0.25;
constexpr double kSpan = 37.0;
constexpr Tolerance kTight{1e-14, 1e-13, 1'000'000, true};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// f'(t) by analytic derivative or central differences of width 2e-6 (T - t).
double derivative(const CoefficientFn& f, double T, double t, const char* name) {
  if (f.has_deriv() && !f.numeric_deriv) return f.deriv(t);
  const double h = 1e-6 * (T - t);
  if (!(t - h >= 0.0) || !(t + h < f.domain_end)) {
    throw Error(ErrorKind::DerivativeUnavailable,
                std::string("no central difference for ") + name + " at t=" + fmt(t));
  }
  const double d = (f(t + h) - f(t - h)) / (2.0 * h);
  if (!std::isfinite(d)) {
    throw Error(ErrorKind::DerivativeUnavailable, std::string(name) + "' is not finite at t=" + fmt(t));
  }
  return d;
}

}  // namespace

RiccatiModel::RiccatiModel(std::shared_ptr<const AlphaKernel> kernel, double C)
    : kernel_(std::move(kernel)), C_(C), dv_(kStep) {
  const auto& k = *kernel_;
  const double T = k.horizon();
  const auto knots = static_cast<std::size_t>(std::ceil(kSpan / dv_)) + 1;
  knot_J_.assign(knots, 0.0);
  auto integrand = [&k, T](double v) {
    const double a1 = k.alpha_excess_at_v(v);
    if (a1 == 0.0) return 0.0;
    return a1 * T * T * std::exp(2.0 * k.excess_at_v(v) + v);
  };
  for (std::size_t i = 1; i < knots; ++i) {
    const double a = k.v_origin() + dv_ * static_cast<double>(i - 1);
    knot_J_[i] = knot_J_[i - 1] + adaptive_integrate(integrand, a, a + dv_, kTight).value;
  }
}

double RiccatiModel::v_end() const {
  return kernel_->v_origin() + dv_ * static_cast<double>(knot_J_.size() - 1);
}

double RiccatiModel::J_at_v(double v) const {
  const auto& k = *kernel_;
  const double v0 = k.v_origin();
  if (v <= v0) return 0.0;
  const auto last = knot_J_.size() - 1;
  const auto i = std::min(static_cast<std::size_t>((v - v0) / dv_), last);
  const double vi = v0 + dv_ * static_cast<double>(i);
  if (v == vi) return knot_J_[i];
  const double T = k.horizon();
  auto integrand = [&k, T](double w) {
    const double a1 = k.alpha_excess_at_v(w);
    if (a1 == 0.0) return 0.0;
    return a1 * T * T * std::exp(2.0 * k.excess_at_v(w) + w);
  };
  return knot_J_[i] + adaptive_integrate(integrand, vi, v, kTight).value;
}

// M / g.
double RiccatiModel::scaled_M(double v) const {
  const double T = kernel_->horizon();
  return (C_ - T - 2.0 * J_at_v(v)) * std::exp(-2.0 * kernel_->excess_at_v(v)) / (T * T);
}

double RiccatiModel::q_at_v(double v) const {
  const double tau = std::exp(-v);
  const double a1 = kernel_->alpha_excess_at_v(v);
  const double m = scaled_M(v);
  return (-a1 / tau - (1.0 + a1) * m) / (1.0 + tau * m);
}

double RiccatiModel::denominator_at_v(double v) const {
  const double tau = std::exp(-v);
  return tau * (1.0 + tau * scaled_M(v));
}

double RiccatiModel::qbar_at_v(double v) const {
  const double tau = std::exp(-v);
  const double T = kernel_->horizon();
  return std::log1p(tau * scaled_M(v)) + std::log(T / C_) + kernel_->excess_at_v(v);
}

double RiccatiIdentification::denominator(double t) const {
  return model->denominator_at_v(model->kernel().to_v(t));
}

RiccatiIdentification identify(const CoefficientFn& alpha, double T, double C) {
  if (!(C > 0.0) || !std::isfinite(C)) throw Error(ErrorKind::InvalidC, "C must lie in (0, inf), got " + fmt(C));
  if (!(T > 0.0) || !std::isfinite(T)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  const auto lim = probe_alpha_limit(alpha, T);
  if (lim.estimate.kind != LimitKind::Finite) {
    throw Error(ErrorKind::AlphaLimitNotOne, "lim alpha(t) as t -> T could not be established");
  }
  if (std::abs(lim.estimate.value - 1.0) > 1e-4) {
    throw Error(ErrorKind::AlphaLimitNotOne, "lim alpha(t) as t -> T is " + fmt(lim.estimate.value));
  }

  RiccatiIdentification out;
  out.alpha = alpha;
  out.T = T;
  out.C = C;
  auto kernel = std::make_shared<const AlphaKernel>(alpha, T);
  auto model = std::make_shared<const RiccatiModel>(kernel, C);
  out.model = model;

  CoefficientFn q;
  q.eval = [model, kernel, T](double t) {
    if (!(t >= 0.0 && t < T)) throw Error(ErrorKind::InvalidArgument, "q_C is defined on [0, T)");
    return model->q_at_v(kernel->to_v(t));
  };
  q.gap_eval = [model](double tau) { return model->q_at_v(-std::log(tau)); };
  q.gap_origin = T;
  auto qbar = [model, kernel, T](double t) {
    if (t == T) return model->qbar_at_v(model->v_end());
    return model->qbar_at_v(kernel->to_v(t));
  };
  q.primitive = [qbar](double s, double t) { return s == t ? 0.0 : qbar(t) - qbar(s); };
  q.domain_end = T;
  q.label = "qC(alpha=" + alpha.label + ",T=" + fmt(T) + ",C=" + fmt(C) + ")";
  out.q_C = std::move(q);
  out.limit_at_T = limit_probe(out);
  return out;
}

double riccati_residual(const CoefficientFn& alpha, double T, const CoefficientFn& q, double t) {
  if (!(t > 0.0 && t < T)) throw Error(ErrorKind::InvalidArgument, "residual needs t in (0, T)");
  const double dq = derivative(q, T, t, "q");
  const double da = derivative(alpha, T, t, "alpha");
  const double qt = q(t);
  const double a = alpha(t);
  const double gap = T - t;
  return dq + qt * qt - (a * (a - 1.0) - da * gap) / (gap * gap);
}

std::vector<double> limit_probe_values(const RiccatiIdentification& ident) {
  std::vector<double> out;
  for (int k = 8; k <= 40; ++k) out.push_back(ident.q_C.before(ident.T, ident.T * std::ldexp(1.0, -k)));
  return out;
}

LimitEstimate limit_probe(const RiccatiIdentification& ident) {
  return classify_sequence(limit_probe_values(ident), ProbeRule{});
}

std::string_view to_string(IdentityVerdict v) noexcept {
  switch (v) {
    case IdentityVerdict::ImpossibleLimitNotOne: return "ImpossibleLimitNotOne";
    case IdentityVerdict::ExistsWithFamily: return "ExistsWithFamily";
    case IdentityVerdict::NoContinuousExtension: return "NoContinuousExtension";
    case IdentityVerdict::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

IdentityClassification classify_identical_bridge(const CoefficientFn& alpha, double T) {
  IdentityClassification out;
  out.alpha_limit = probe_alpha_limit(alpha, T).estimate;
  if (out.alpha_limit.kind != LimitKind::Finite) return out;
  if (std::abs(out.alpha_limit.value - 1.0) > 1e-4) {
    out.verdict = IdentityVerdict::ImpossibleLimitNotOne;
    return out;
  }
  int finite = 0, diverges = 0;
  for (double factor : {0.1, 1.0, 10.0}) {
    FamilyProbe probe;
    probe.C = factor * T;
    try {
      probe.limit = identify(alpha, T, probe.C).limit_at_T;
    } catch (const Error& e) {
      probe.failure = e.what();
    }
    if (probe.limit.kind == LimitKind::Finite) ++finite;
    if (probe.limit.kind == LimitKind::Diverges) ++diverges;
    out.probes.push_back(std::move(probe));
  }
  const int n = static_cast<int>(out.probes.size());
  if (finite == n) {
    out.verdict = IdentityVerdict::ExistsWithFamily;
  } else if (diverges == n) {
    out.verdict = IdentityVerdict::NoContinuousExtension;
  } else if (finite + diverges == 0) {
    out.verdict = IdentityVerdict::Undetermined;
  } else {
    out.verdict = IdentityVerdict::NoContinuousExtension;
    out.mixed = true;
  }
  return out;
}

CoefficientFn wiener_case_closed_form(double T, double C) { return coef::wiener_identifying(T, C); }

}  // namespace bridgelab

#include <cmath>
#include <random>

#include "bridgelab/riccati.hpp"
#include "doctest.h"

using namespace bridgelab;

namespace {

template <class F>
double simpson(F f, double a, double b, int n) {
  if (a == b) return 0.0;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

// q_C(t) = -alpha/(T-t) + 1/D_C(t) with D_C by nested Simpson, straight from the definition.
double q_direct(const std::function<double(double)>& alpha, double T, double C, double t) {
  auto L = [&](double s, double u) { return simpson([&](double w) { return alpha(w) / (T - w); }, s, u, 2000); };
  const double D = C * std::exp(-2 * L(0, t)) + simpson([&](double s) { return std::exp(-2 * L(s, t)); }, 0, t, 2000);
  return -alpha(t) / (T - t) + 1 / D;
}

double coth(double x) { return 1.0 / std::tanh(x); }

}  // namespace

TEST_CASE("identify: Wiener cases") {
  const double T = 1.0;
  const auto zero = identify(coef::constant(1.0), T, 1.0);
  for (double t : {0.0, 0.3, 0.9, 1.0 - 1e-6}) CHECK(std::abs(zero.q_C(t)) < 1e-14);

  const auto two = identify(coef::constant(1.0), T, 2.0);
  for (double t : {0.0, 0.3, 0.7, 0.95}) CHECK(std::abs(two.q_C(t) - 1.0 / (t - 2.0)) < 1e-13);
  for (double t : {0.0, 0.3, 0.7}) {
    CHECK(std::abs(q_direct([](double) { return 1.0; }, T, 2.0, t) - 1.0 / (t - 2.0)) < 1e-9);
  }
}

TEST_CASE("identify agrees with a direct evaluation of the definition") {
  const double T = 1.0;
  const auto alpha = coef::power_offset(+1, 2.0, T);
  for (double C : {0.3, 1.7}) {
    const auto id = identify(alpha, T, C);
    for (double t : {0.0, 0.2, 0.5, 0.8}) {
      const double direct = q_direct(alpha.eval, T, C, t);
      CHECK_MESSAGE(std::abs(id.q_C(t) - direct) < 1e-8, "C=" << C << " t=" << t);
    }
  }
}

TEST_CASE("wiener_case_closed_form matches identify") {
  const double T = 1.0;
  CHECK(wiener_case_closed_form(T, 1.0)(0.4) == 0.0);
  CHECK(std::abs(wiener_case_closed_form(T, 0.5)(0.4) - 1.0 / 1.4) < 1e-15);
  CHECK_THROWS_AS(wiener_case_closed_form(T, 0.0), Error);
  for (double C : {0.05, 0.5, 1.0, 2.0, 30.0}) {
    const auto id = identify(coef::constant(1.0), T, C);
    const auto closed = wiener_case_closed_form(T, C);
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double t = (T - 1e-6) * i / 400.0;
      worst = std::max(worst, std::abs(id.q_C(t) - closed(t)));
    }
    CHECK_MESSAGE(worst <= 1e-10, "C=" << C);
  }
}

TEST_CASE("identify: coth drift gives q_C == q0") {
  const double T = 1.0;
  for (double q0 : {-1.0, 0.5, 1.0, 2.0}) {
    const double C = 1.0 / (q0 * (1.0 + coth(q0 * T)));
    const auto id = identify(coef::coth_drift(q0, T), T, C);
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
      const double t = (T - 1e-6) * i / 1000.0;
      worst = std::max(worst, std::abs(id.q_C(t) - q0));
    }
    CHECK_MESSAGE(worst <= 1e-8, "q0=" << q0);
    CHECK(id.limit_at_T.kind == LimitKind::Finite);
    CHECK(std::abs(id.limit_at_T.value - q0) < 1e-6);
  }
}

TEST_CASE("identify: errors") {
  for (double C : {0.0, -1.0, kInfinity}) {
    try {
      identify(coef::constant(1.0), 1.0, C);
      FAIL("expected InvalidC");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidC);
    }
  }
  try {
    identify(coef::constant(2.0), 1.0, 1.0);
    FAIL("expected AlphaLimitNotOne");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AlphaLimitNotOne);
  }
  CHECK_NOTHROW(identify(coef::constant(1.00005), 1.0, 1.0));
}

TEST_CASE("riccati_residual examples") {
  const double T = 1.0;
  const auto two = identify(coef::constant(1.0), T, 2.0);
  CHECK(std::abs(riccati_residual(coef::constant(1.0), T, two.q_C, 0.3)) <= 1e-5);

  const auto alpha = coef::power_offset(-1, 0.7, T);
  auto particular = coef::from_function([alpha, T](double t) { return -alpha(t) / (T - t); }, "particular", T);
  for (double t : {0.1, 0.5, 0.9}) CHECK(std::abs(riccati_residual(alpha, T, particular, t)) <= 1e-5);

  CHECK(riccati_residual(coef::constant(1.0), T, coef::constant(0.0), 0.4) == 0.0);
  CHECK_THROWS_AS(riccati_residual(coef::constant(1.0), T, coef::constant(0.0), T), Error);

  auto nan_q = coef::from_function([](double t) { return t > 0.5 ? std::nan("") : 0.0; });
  try {
    riccati_residual(coef::constant(1.0), T, nan_q, 0.5);
    FAIL("expected DerivativeUnavailable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DerivativeUnavailable);
  }
}

TEST_CASE("residual, positivity and family structure on random points") {
  const double T = 1.0;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.01 * T, 0.99 * T);
  const std::vector<CoefficientFn> alphas{coef::constant(1.0), coef::power_offset(+1, 2.0, T),
                                          coef::power_offset(-1, 1.5, T), coef::coth_drift(2.0, T),
                                          coef::power_offset(+1, 0.5, T)};
  for (const auto& alpha : alphas) {
    const auto a = identify(alpha, T, 0.4);
    const auto b = identify(alpha, T, 3.0);
    for (int i = 0; i < 50; ++i) {
      const double t = U(rng);
      CHECK_MESSAGE(std::abs(riccati_residual(alpha, T, a.q_C, t)) <= 1e-5, alpha.label << " t=" << t);
      CHECK(a.denominator(t) > 0.0);
      const double w = alpha(t) / (T - t);
      CHECK(a.q_C(t) + w > 0.0);
      CHECK(std::abs((a.q_C(t) + w) * a.denominator(t) - 1.0) < 1e-12);
      if (t < 0.9) {
        const double lhs = 1.0 / (a.q_C(t) + w) - 1.0 / (b.q_C(t) + w);
        const double rhs = (0.4 - 3.0) * std::exp(2.0 * log_phi(alpha, T, 0.0, t));
        CHECK_MESSAGE(std::abs(lhs - rhs) < 1e-8, alpha.label << " t=" << t);
      }
    }
  }
}

TEST_CASE("propagator identity through the identified OU process") {
  const double T = 1.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, T - 1e-4);
  struct Case {
    CoefficientFn alpha;
    double C;
  };
  const std::vector<Case> cases{{coef::constant(1.0), 2.0},
                                {coef::power_offset(+1, 2.0, T), 0.7},
                                {coef::coth_drift(1.0, T), 0.25}};
  for (const auto& c : cases) {
    const auto id = identify(c.alpha, T, c.C);
    const OUSpec ou(id.q_C, coef::constant(1.0), T);
    for (int i = 0; i < 20; ++i) {
      double s = U(rng), t = U(rng);
      if (s > t) std::swap(s, t);
      const double phi = std::exp(log_phi(c.alpha, T, s, t));
      const double via_ou = ou.gamma(t, T) / ou.gamma(s, T) * std::exp(ou.qbar(t) - ou.qbar(s));
      CHECK_MESSAGE(std::abs(phi - via_ou) <= 1e-8, c.alpha.label << " s=" << s << " t=" << t);
    }
  }
}

TEST_CASE("limit_probe: power offsets") {
  const double T = 1.0;
  for (int sign : {+1, -1}) {
    for (double beta : {0.5, 1.0}) {
      const auto id = identify(coef::power_offset(sign, beta, T), T, 1.0);
      CHECK_MESSAGE(limit_probe(id).kind == LimitKind::Diverges, "sign=" << sign << " beta=" << beta);
    }
    for (double beta : {1.5, 2.0}) {
      const auto id = identify(coef::power_offset(sign, beta, T), T, 1.0);
      CHECK_MESSAGE(limit_probe(id).kind == LimitKind::Finite, "sign=" << sign << " beta=" << beta);
    }
  }
}

TEST_CASE("classify_identical_bridge") {
  const double T = 1.0;
  for (double a : {0.0, 0.5, 2.0}) {
    CHECK(classify_identical_bridge(coef::constant(a), T).verdict == IdentityVerdict::ImpossibleLimitNotOne);
  }
  const auto w = classify_identical_bridge(coef::constant(1.0), T);
  CHECK(w.verdict == IdentityVerdict::ExistsWithFamily);
  CHECK(w.probes.size() == 3);
  CHECK(classify_identical_bridge(coef::power_offset(-1, 0.7, T), T).verdict ==
        IdentityVerdict::NoContinuousExtension);
  auto wobble = coef::from_function([T](double t) { return 1.0 + 0.5 * std::sin(std::log(T - t)); }, "wobble", T);
  CHECK(classify_identical_bridge(wobble, T).verdict == IdentityVerdict::Undetermined);
}

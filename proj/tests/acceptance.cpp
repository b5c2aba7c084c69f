// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "bridgelab/analytic.hpp"
#include "bridgelab/riccati.hpp"
#include "bridgelab/simulate.hpp"
#include "bridgelab/stats.hpp"

using namespace bridgelab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = seconds_since(t0);
  if (!o.pass) ++failures;
  std::printf("criterion %2d %-4s %-28s %7.2fs  %s\n", id, o.pass ? "PASS" : "FAIL", name, dt, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

double coth(double x) { return 1.0 / std::tanh(x); }
double coth_match(double q0, double T) { return 1.0 / (q0 * (1.0 + coth(q0 * T))); }

double variance(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

int main() {
  const double T = 1.0;

  criterion(1, "Wiener identification", [&] {
    const auto t0 = Clock::now();
    const auto grid = TimeGrid::interior(T, 32);
    const BridgeSpec wiener = AlphaBridge(coef::constant(1.0), T);
    Outcome o;
    double worst = 0.0;
    for (double shift : {1.0, 2.0, -3.0}) {
      const BridgeSpec ou = OUBridge{OUSpec(coef::reciprocal(shift), coef::constant(1.0), T), 0.0, 0.0};
      const auto r = analytic_equivalence(wiener, ou, grid, 1e-6);
      worst = std::max(worst, r.max_cov_gap_rel);
      if (r.verdict != Verdict::Equivalent || r.max_cov_gap_rel > 1e-6) o.pass = false;
    }
    const double dt = seconds_since(t0);
    if (dt >= 10.0) o.pass = false;
    o.detail = fmt("C~ in {1,2,-3}: max rel cov gap %.2e (<= 1e-6), runtime %.2fs (< 10s)", worst, dt);
    return o;
  });

  criterion(2, "coth drift identification", [&] {
    Outcome o;
    std::vector<double> ts;
    for (int i = 0; i <= 20000; ++i) ts.push_back((T - 1e-6) * i / 20000.0);
    for (int k = 1; k <= 19; ++k) ts.push_back(T - T * std::ldexp(1.0, -k));
    double worst = 0.0, slowest = 0.0;
    for (double q0 : {-1.0, 0.5, 2.0}) {
      const auto t0 = Clock::now();
      const auto id = identify(coef::coth_drift(q0, T), T, coth_match(q0, T));
      double err = 0.0;
      for (double t : ts) err = std::max(err, std::abs(id.q_C(t) - q0));
      slowest = std::max(slowest, seconds_since(t0));
      worst = std::max(worst, err);
    }
    o.pass = worst <= 1e-8 && slowest < 5.0;
    o.detail = fmt("q0 in {-1,0.5,2}: max |q_C - q0| %.2e (<= 1e-8) on [0,1-1e-6], slowest case %.2fs (< 5s)", worst,
                   slowest);
    return o;
  });

  criterion(3, "power-offset threshold", [&] {
    const auto t0 = Clock::now();
    Outcome o;
    std::string got;
    for (int sign : {+1, -1}) {
      for (double beta : {0.5, 1.0, 1.5, 2.0}) {
        const auto est = limit_probe(identify(coef::power_offset(sign, beta, T), T, 1.0));
        const auto want = beta < 1.25 ? LimitKind::Diverges : LimitKind::Finite;
        if (est.kind != want) o.pass = false;
        got += (sign > 0 ? "+" : "-") + fmt("%.1f", beta) + ":" + std::string(to_string(est.kind)) + " ";
      }
    }
    const double dt = seconds_since(t0);
    if (dt >= 10.0) o.pass = false;
    o.detail = got + fmt("runtime %.2fs (< 10s)", dt);
    return o;
  });

  criterion(4, "identical-bridge gate", [&] {
    Outcome o;
    for (double a : {0.0, 0.5, 2.0}) {
      const auto v = classify_identical_bridge(coef::constant(a), T).verdict;
      if (v != IdentityVerdict::ImpossibleLimitNotOne) o.pass = false;
      o.detail += fmt("a=%g:", a) + std::string(to_string(v)) + " ";
    }
    const auto v = classify_identical_bridge(coef::constant(1.0), T).verdict;
    if (v != IdentityVerdict::ExistsWithFamily) o.pass = false;
    o.detail += "a=1:" + std::string(to_string(v));
    return o;
  });

  criterion(5, "Riccati residual", [&] {
    struct Fixture {
      CoefficientFn alpha;
      double C;
    };
    std::vector<Fixture> fixtures;
    for (double shift : {1.0, 2.0, -3.0}) fixtures.push_back({coef::constant(1.0), shift / (1.0 + shift)});
    for (double q0 : {-1.0, 0.5, 2.0}) fixtures.push_back({coef::coth_drift(q0, T), coth_match(q0, T)});
    for (int sign : {+1, -1}) {
      for (double beta : {1.5, 2.0}) fixtures.push_back({coef::power_offset(sign, beta, T), 1.0});
    }
    std::mt19937_64 rng(20261014);
    std::uniform_real_distribution<double> U(0.01 * T, 0.99 * T);
    double worst = 0.0;
    for (const auto& f : fixtures) {
      const auto id = identify(f.alpha, T, f.C);
      for (int i = 0; i < 50; ++i) worst = std::max(worst, std::abs(riccati_residual(f.alpha, T, id.q_C, U(rng))));
    }
    return Outcome{worst <= 1e-5,
                   fmt("%g fixtures x 50 random t in [0.01,0.99]: max |residual| %.2e (<= 1e-5)",
                       static_cast<double>(fixtures.size()), worst)};
  });

  criterion(6, "ratio vs Gaussian density", [&] {
    std::mt19937_64 rng(20261014);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double h = 0.5 + 2.0 * U(rng);
      const double q0 = -2.0 + 4.0 * U(rng);
      const double s0 = (U(rng) < 0.5 ? -1.0 : 1.0) * (0.2 + 1.8 * U(rng));
      const OUSpec ou(coef::constant(q0), coef::constant(s0), h);
      double s = h * U(rng) * 0.9, t = h * U(rng) * 0.9;
      if (s > t) std::swap(s, t);
      if (t - s < 1e-3) t = s + 1e-3;
      const double x = -3.0 + 6.0 * U(rng), b = -3.0 + 6.0 * U(rng);
      const double y = bridge_mean(ou, x, b, s, t) + (-8.0 + 16.0 * U(rng)) * std::sqrt(bridge_variance(ou, s, t));
      worst = std::max(worst, std::abs(bridge_log_density(ou, b, s, t, x, y) -
                                       bridge_log_density_ratio(ou, b, s, t, x, y)));
    }
    return Outcome{worst <= 1e-10, fmt("100 random constant-coefficient cases: max |log gap| %.2e (<= 1e-10)", worst)};
  });

  criterion(7, "Chapman-Kolmogorov", [&] {
    std::mt19937_64 rng(20261014);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double h = 1.0 + U(rng);
      const OUSpec ou(coef::linear(-1.0 + 2.0 * U(rng), -1.0 + 2.0 * U(rng)), coef::linear(0.5 + U(rng), 0.3 * U(rng)),
                      h);
      const double s = 0.2 * h * U(rng), u = s + 0.1 + 0.3 * h * U(rng), t = u + 0.1 + 0.3 * h * U(rng);
      const double x = -1.0 + 2.0 * U(rng), z = -1.0 + 2.0 * U(rng);
      const auto first = ou_transition(ou, s, u, x);
      const double sd = std::sqrt(first.variance);
      const double lhs = simpson([&](double y) { return first.density(y) * ou_transition(ou, u, t, y).density(z); },
                                 first.mean - 10 * sd, first.mean + 10 * sd, 4000);
      worst = std::max(worst, std::abs(lhs - ou_transition(ou, s, t, x).density(z)));
    }
    return Outcome{worst <= 1e-6, fmt("20 random OU specs: max density gap %.2e (<= 1e-6)", worst)};
  });

  criterion(8, "endpoint regimes", [&] {
    const auto t0 = Clock::now();
    const std::size_t N = 100000;
    const std::uint64_t seed = 20261014;
    const auto one = endpoint_study(AlphaBridge(coef::constant(1.0), T), N, seed);
    const auto neg = endpoint_study(AlphaBridge(coef::constant(-1.0), T), N, seed);
    const auto zero = endpoint_study(AlphaBridge(coef::constant(0.0), T), N, seed);
    const double ms_one = one.back().mean_square;
    const double growth = neg[17].mean_square / neg[9].mean_square;
    double worst_z = 0.0;
    for (const auto& r : zero) {
      worst_z = std::max(worst_z, std::abs(r.mean_square - r.t) / (r.t * std::sqrt(2.0 / static_cast<double>(N))));
    }
    const double dt = seconds_since(t0);
    Outcome o{ms_one < 1e-4 && growth >= 10.0 && worst_z <= 4.0 && dt < 60.0, ""};
    o.detail = fmt("alpha=1: E X^2(k=18) %.2e (< 1e-4); alpha=-1: k18/k10 %.1f (>= 10); ", ms_one, growth) +
               fmt("alpha=0: max |E X^2 - t| %.2f SE (<= 4); runtime %.2fs", worst_z, dt);
    return o;
  });

  criterion(9, "exact vs Euler sampler", [&] {
    const std::size_t N = 100000;
    const BridgeSpec spec = AlphaBridge(coef::constant(1.0), T);
    const TimeGrid grid({0.0, 0.25, 0.5, 0.75}, T);
    const auto ex = sample_exact(spec, grid, N, 20261014);
    const auto eu = sample_euler(spec, grid, N, 20261015, 64);
    Outcome o;
    double worst_rel = 0.0, worst_se = 0.0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
      const double t = grid[j], target = t * (T - t);
      const double vx = variance(ex.column(j)), ve = variance(eu.column(j));
      const double se = target * std::sqrt(2.0 / static_cast<double>(N));
      worst_rel = std::max(worst_rel, std::abs(ve - vx) / vx);
      worst_se = std::max({worst_se, std::abs(vx - target) / se, std::abs(ve - target) / se});
    }
    o.pass = worst_rel <= 0.02 && worst_se <= 4.0;
    o.detail = fmt("t in {0.25,0.5,0.75}, N=1e5: max exact/Euler gap %.2f%% (<= 2%%), max dev %.2f SE (<= 4)",
                   100 * worst_rel, worst_se);
    return o;
  });

  criterion(10, "KS calibration", [&] {
    const BridgeSpec spec = AlphaBridge(coef::constant(1.0), T);
    const auto grid = TimeGrid::interior(T, 32);
    int rejects = 0;
    const int reps = 200;
    for (int i = 0; i < reps; ++i) {
      if (mc_equivalence(spec, spec, grid, 10000, 20261014 + i).verdict == Verdict::Distinct) ++rejects;
    }
    const double rate = rejects / static_cast<double>(reps);
    return Outcome{rate >= 0.002 && rate <= 0.03,
                   fmt("self vs self, 200 reps, N=1e4, 32 times: %g rejections, rate %.3f (in [0.002, 0.03])",
                       static_cast<double>(rejects), rate)};
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}

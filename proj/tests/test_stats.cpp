#include <cmath>

#include "bridgelab/riccati.hpp"
#include "bridgelab/rng.hpp"
#include "bridgelab/stats.hpp"
#include "doctest.h"

using namespace bridgelab;

namespace {

BridgeSpec wiener(double T = 1.0) { return AlphaBridge(coef::constant(1.0), T); }

BridgeSpec ou_bridge(CoefficientFn q, CoefficientFn sigma, double T = 1.0, double a = 0.0, double b = 0.0) {
  return OUBridge{OUSpec(std::move(q), std::move(sigma), T), a, b};
}

std::vector<double> normals(std::uint64_t seed, std::uint64_t stream, std::size_t n, double shift = 0.0) {
  RngStream r(seed, stream);
  std::vector<double> x(n);
  for (auto& v : x) v = r.next() + shift;
  return x;
}

}  // namespace

TEST_CASE("kolmogorov_tail") {
  CHECK(kolmogorov_tail(0.0) == 1.0);
  CHECK(std::abs(kolmogorov_tail(0.5) - 0.9639452436648751) < 1e-9);
  CHECK(std::abs(kolmogorov_tail(1.0) - 0.2699996716735) < 1e-7);
  CHECK(std::abs(kolmogorov_tail(1.3580986393225505) - 0.05) < 1e-6);
  CHECK(std::abs(kolmogorov_tail(1.0 - 1e-12) - kolmogorov_tail(1.0)) < 1e-7);
  CHECK(kolmogorov_tail(5.0) < 1e-20);
}

TEST_CASE("ks_statistic examples") {
  const std::vector<double> x{0.3, -1.2, 2.0, 0.3};
  const auto same = ks_statistic(x, x);
  CHECK(same.D == 0.0);
  CHECK(same.p == 1.0);
  CHECK(ks_statistic(std::vector<double>{0.0}, std::vector<double>{1.0}).D == 1.0);
  CHECK(ks_statistic(std::vector<double>{1, 2, 3}, std::vector<double>{2.5}).D == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, x), Error);

  const std::size_t n = 10000;
  const auto shifted = ks_statistic(normals(1, 0, n), normals(1, 1, n, 0.5));
  CHECK(shifted.p < 0.01);
  CHECK(std::abs(shifted.D - 0.197) < 0.03);
}

TEST_CASE("ks_statistic calibration at level 0.01") {
  const std::size_t n = 10000;
  int rejects = 0;
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    if (ks_statistic(normals(20261014, 2 * trial, n), normals(20261014, 2 * trial + 1, n)).p < 0.01) ++rejects;
  }
  const double rate = rejects / 200.0;
  CHECK_MESSAGE(rate >= 0.002, "rate=" << rate);
  CHECK_MESSAGE(rate <= 0.03, "rate=" << rate);
}

TEST_CASE("thin keeps endpoints and caps size") {
  std::vector<double> t(100);
  for (int i = 0; i < 100; ++i) t[i] = i;
  const auto s = thin(t, 8);
  CHECK(s.size() == 8);
  CHECK(s.front() == 0.0);
  CHECK(s.back() == 99.0);
  CHECK(thin(t, 200).size() == 100);
}

TEST_CASE("analytic_equivalence: self and validation") {
  const auto grid = TimeGrid::interior(1.0, 32);
  for (const auto& s : {wiener(), BridgeSpec(AlphaBridge(coef::power_offset(-1, 0.5, 1.0), 1.0)),
                        ou_bridge(coef::linear(0.2, 1.0), coef::constant(0.7), 1.0, 1.0, -2.0)}) {
    const auto r = analytic_equivalence(s, s, grid, 1e-6);
    CHECK(r.verdict == Verdict::Equivalent);
    CHECK(r.max_cov_gap_rel == 0.0);
  }
  CHECK_THROWS_AS(analytic_equivalence(wiener(1.0), wiener(2.0), grid, 1e-6), Error);
  CHECK_THROWS_AS(analytic_equivalence(wiener(2.0), wiener(2.0), grid, 1e-6), Error);
}

TEST_CASE("analytic_equivalence: Wiener bridge and its identifying OU family") {
  const auto grid = TimeGrid::interior(1.0, 32);
  for (double shift : {1.0, 2.0, -3.0}) {
    const auto r = analytic_equivalence(wiener(), ou_bridge(coef::reciprocal(shift), coef::constant(1.0)), grid, 1e-6);
    CHECK_MESSAGE(r.verdict == Verdict::Equivalent, "shift=" << shift << " cov gap " << r.max_cov_gap_rel);
    CHECK(r.max_cov_gap_rel <= 1e-6);
  }
  const auto closed = analytic_equivalence(wiener(), ou_bridge(wiener_case_closed_form(1.0, 0.5), coef::constant(1.0)),
                                           grid, 1e-6);
  CHECK(closed.verdict == Verdict::Equivalent);
}

TEST_CASE("analytic_equivalence: coth drift equals the OU bridge") {
  const auto grid = TimeGrid::interior(1.0, 32);
  for (double q0 : {0.5, 1.0, 2.0}) {
    const BridgeSpec a = AlphaBridge(coef::coth_drift(q0, 1.0), 1.0);
    const auto r = analytic_equivalence(a, ou_bridge(coef::constant(q0), coef::constant(1.0)), grid, 1e-6);
    CHECK_MESSAGE(r.verdict == Verdict::Equivalent, "q0=" << q0);
  }
}

TEST_CASE("analytic_equivalence: alpha = 2 matches no probe OU bridge") {
  const auto grid = TimeGrid::interior(1.0, 32);
  const BridgeSpec two = AlphaBridge(coef::constant(2.0), 1.0);
  for (double shift : {1.0, 2.0, -3.0}) {
    CHECK(analytic_equivalence(two, ou_bridge(coef::reciprocal(shift), coef::constant(1.0)), grid, 1e-6).verdict ==
          Verdict::Distinct);
  }
  for (double q0 : {-1.0, 0.0, 1.0, 3.0}) {
    CHECK(analytic_equivalence(two, ou_bridge(coef::constant(q0), coef::constant(1.0)), grid, 1e-6).verdict ==
          Verdict::Distinct);
  }
}

TEST_CASE("analytic_equivalence: symmetry, sigma sign, the Inconclusive band") {
  const auto grid = TimeGrid::interior(1.0, 32);
  const auto plus = ou_bridge(coef::constant(1.0), coef::constant(1.0));
  const auto minus = ou_bridge(coef::constant(1.0), coef::constant(-1.0));
  CHECK(analytic_equivalence(plus, minus, grid, 1e-9).verdict == Verdict::Equivalent);

  const BridgeSpec a = AlphaBridge(coef::constant(1.0), 1.0);
  const BridgeSpec b = AlphaBridge(coef::constant(1.0 + 1e-4), 1.0);
  const auto ab = analytic_equivalence(a, b, grid, 1e-6);
  const auto ba = analytic_equivalence(b, a, grid, 1e-6);
  CHECK(ab.verdict == ba.verdict);
  CHECK(ab.max_cov_gap_rel == ba.max_cov_gap_rel);
  const double gap = std::max({ab.max_mean_gap, ab.max_var_gap_rel, ab.max_cov_gap_rel});
  CHECK(analytic_equivalence(a, b, grid, 2 * gap).verdict == Verdict::Inconclusive);
  CHECK(analytic_equivalence(a, b, grid, 0.5 * gap).verdict == Verdict::Distinct);
  CHECK(analytic_equivalence(a, b, grid, 20 * gap).verdict == Verdict::Equivalent);

  const auto j = ab.to_json();
  for (const char* key : {"verdict", "max_var_gap_rel", "max_cov_gap_rel", "max_mean_gap", "ks", "grid", "tolerances"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["grid"].size() == 32);
}

TEST_CASE("mc_equivalence: examples") {
  const auto grid = TimeGrid::interior(1.0, 32);
  const auto self = mc_equivalence(wiener(), wiener(), grid, 10000, 11);
  CHECK(self.verdict == Verdict::Equivalent);
  CHECK(self.ks.size() == 32);
  CHECK(self.cov_times.size() == 8);

  const BridgeSpec faster = AlphaBridge(coef::constant(1.5), 1.0);
  const auto distinct = mc_equivalence(wiener(), faster, grid, 100000, 12);
  CHECK(distinct.verdict == Verdict::Distinct);

  const auto plus = ou_bridge(coef::constant(1.0), coef::constant(1.0));
  const auto minus = ou_bridge(coef::constant(1.0), coef::constant(-1.0));
  CHECK(mc_equivalence(plus, minus, grid, 20000, 13).verdict == Verdict::Equivalent);

  CHECK_THROWS_AS(mc_equivalence(wiener(), wiener(), grid, 9999, 1), Error);
  CHECK_THROWS_AS(mc_equivalence(wiener(), wiener(2.0), grid, 10000, 1), Error);
}

TEST_CASE("mc_equivalence: symmetric in its arguments") {
  const auto grid = TimeGrid::interior(1.0, 16);
  const auto a = wiener();
  const auto b = ou_bridge(coef::reciprocal(2.0), coef::constant(1.0));
  const auto ab = mc_equivalence(a, b, grid, 10000, 21);
  const auto ba = mc_equivalence(b, a, grid, 10000, 21);
  CHECK(ab.verdict == ba.verdict);
  CHECK(ab.min_adjusted_p == ba.min_adjusted_p);
  REQUIRE(ab.ks.size() == ba.ks.size());
  for (std::size_t i = 0; i < ab.ks.size(); ++i) CHECK(ab.ks[i].D == ba.ks[i].D);
}

TEST_CASE("mc_equivalence agrees with analytic_equivalence on fixtures") {
  const auto grid = TimeGrid::interior(1.0, 32);
  const std::vector<std::pair<BridgeSpec, BridgeSpec>> fixtures{
      {wiener(), ou_bridge(coef::reciprocal(1.0), coef::constant(1.0))},
      {AlphaBridge(coef::coth_drift(1.0, 1.0), 1.0), ou_bridge(coef::constant(1.0), coef::constant(1.0))},
      {AlphaBridge(coef::constant(2.0), 1.0), ou_bridge(coef::reciprocal(1.0), coef::constant(1.0))},
      {wiener(), AlphaBridge(coef::constant(1.5), 1.0)},
  };
  std::uint64_t seed = 500;
  for (const auto& [a, b] : fixtures) {
    const auto an = analytic_equivalence(a, b, grid, 1e-6).verdict;
    const auto mc = mc_equivalence(a, b, grid, 100000, seed++).verdict;
    const bool contradiction = (an == Verdict::Equivalent && mc == Verdict::Distinct) ||
                               (an == Verdict::Distinct && mc == Verdict::Equivalent);
    CHECK_MESSAGE(!contradiction, label(a) << " vs " << label(b) << ": " << to_string(an) << " / " << to_string(mc));
  }
}

#include "bridgelab/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "bridgelab/simulate.hpp"

namespace bridgelab {

namespace {

double rel_gap(double x, double y) {
  if (x == y) return 0.0;
  return std::abs(x - y) / std::max(std::abs(x), std::abs(y));
}

Verdict gap_verdict(double worst, double tol) {
  if (!(worst <= tol)) return Verdict::Distinct;
  if (worst < tol / 10.0) return Verdict::Equivalent;
  return Verdict::Inconclusive;
}

void check_pair(const BridgeSpec& a, const BridgeSpec& b, const TimeGrid& grid) {
  if (horizon(a) != horizon(b) || grid.horizon() != horizon(a)) {
    throw Error(ErrorKind::HorizonMismatch, "specs and grid must share one horizon");
  }
}

// Columns of an ensemble restricted to selected grid indices, path-major (N x k).
std::vector<double> gather(const PathEnsemble& e, const std::vector<std::size_t>& idx) {
  const std::size_t k = idx.size();
  std::vector<double> out(e.n_paths * k);
  for (std::size_t i = 0; i < e.n_paths; ++i) {
    for (std::size_t c = 0; c < k; ++c) out[i * k + c] = e.value(i, idx[c]);
  }
  return out;
}

// Sample covariance (k x k) of rows drawn from `data` (N x k); rows[i] picks the i-th draw.
template <class Pick>
std::vector<double> sample_cov(const std::vector<double>& data, std::size_t n, std::size_t k, Pick pick) {
  std::vector<double> sum(k, 0.0), prod(k * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = data.data() + pick(i) * k;
    for (std::size_t c = 0; c < k; ++c) {
      sum[c] += row[c];
      for (std::size_t d = 0; d <= c; ++d) prod[c * k + d] += row[c] * row[d];
    }
  }
  const double nn = static_cast<double>(n);
  std::vector<double> cov(k * k);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d <= c; ++d) {
      const double v = (prod[c * k + d] - sum[c] * sum[d] / nn) / (nn - 1.0);
      cov[c * k + d] = cov[d * k + c] = v;
    }
  }
  return cov;
}

double frobenius_sq(const std::vector<double>& m) {
  double s = 0.0;
  for (double x : m) s += x * x;
  return s;
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Equivalent: return "Equivalent";
    case Verdict::Distinct: return "Distinct";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

double kolmogorov_tail(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.0) {
    // Dual theta series for the CDF; the alternating tail series is poor here.
    const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 6; ++k) cdf += std::exp(-(2 * k - 1) * (2 * k - 1) * c);
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  const double l2 = lambda * lambda;
  return std::clamp(2.0 * (std::exp(-2.0 * l2) - std::exp(-8.0 * l2)), 0.0, 1.0);
}

KsResult ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptySample, "KS needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    D = std::max(D, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double ne = std::sqrt(n * m / (n + m));
  return {D, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * D)};
}

std::vector<double> thin(std::span<const double> times, std::size_t cap) {
  if (times.size() <= cap || cap == 0) return {times.begin(), times.end()};
  if (cap == 1) return {times.back()};
  std::vector<double> out;
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t k = (i * (times.size() - 1) + (cap - 1) / 2) / (cap - 1);
    if (out.empty() || times[k] != out.back()) out.push_back(times[k]);
  }
  return out;
}

nlohmann::json EquivalenceReport::to_json() const {
  nlohmann::json j;
  j["method"] = method == Method::Analytic ? "analytic" : "monte_carlo";
  j["verdict"] = to_string(verdict);
  j["a"] = label_a;
  j["b"] = label_b;
  j["grid"] = grid;
  j["max_mean_gap"] = max_mean_gap;
  j["max_var_gap_rel"] = max_var_gap_rel;
  j["max_cov_gap_rel"] = max_cov_gap_rel;
  auto& ksj = j["ks"] = nlohmann::json::array();
  for (const auto& k : ks) ksj.push_back({{"t", k.t}, {"D", k.D}, {"p", k.p}});
  if (method == Method::Analytic) {
    j["tolerances"] = {{"gap", tol}, {"equivalent_below", tol / 10.0}};
  } else {
    j["tolerances"] = {{"level", level}, {"bonferroni_tests", ks.size() + 1}};
    j["covariance_test"] = {{"times", cov_times}, {"frobenius_gap_rel", cov_frobenius_gap}, {"p", cov_p}};
    j["min_adjusted_p"] = min_adjusted_p;
    j["n_paths"] = n_paths;
    j["seed"] = seed;
  }
  return j;
}

EquivalenceReport analytic_equivalence(const BridgeSpec& a, const BridgeSpec& b, const TimeGrid& grid, double tol) {
  check_pair(a, b, grid);
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  const auto ma = grid_moments(a, grid.points());
  const auto mb = grid_moments(b, grid.points());
  EquivalenceReport r;
  r.method = EquivalenceReport::Method::Analytic;
  r.grid.assign(grid.points().begin(), grid.points().end());
  r.tol = tol;
  r.label_a = label(a);
  r.label_b = label(b);
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) {
    r.max_mean_gap = std::max(r.max_mean_gap, std::abs(ma.mean[i] - mb.mean[i]));
    r.max_var_gap_rel = std::max(r.max_var_gap_rel, rel_gap(ma.variance(i), mb.variance(i)));
    for (std::size_t j = i + 1; j < n; ++j) {
      r.max_cov_gap_rel = std::max(r.max_cov_gap_rel, rel_gap(ma.covariance(i, j), mb.covariance(i, j)));
    }
  }
  r.verdict = gap_verdict(std::max({r.max_mean_gap, r.max_var_gap_rel, r.max_cov_gap_rel}), tol);
  return r;
}

EquivalenceReport mc_equivalence(const BridgeSpec& a, const BridgeSpec& b, const TimeGrid& grid, std::size_t n_paths,
                                 std::uint64_t seed, const McOptions& opt) {
  check_pair(a, b, grid);
  if (n_paths < 10000) throw Error(ErrorKind::InvalidArgument, "mc_equivalence needs at least 10^4 paths");
  if (opt.bootstrap < 2) throw Error(ErrorKind::InvalidArgument, "bootstrap needs at least 2 resamples");

  // Canonical order so that swapping the arguments reuses the same streams.
  const bool swapped = digest(b) < digest(a);
  const BridgeSpec& lo = swapped ? b : a;
  const BridgeSpec& hi = swapped ? a : b;

  std::vector<double> interior;
  for (double t : grid.points()) {
    if (t > 0.0) interior.push_back(t);
  }
  if (interior.empty()) throw Error(ErrorKind::InvalidGrid, "no test times after t = 0");
  const auto test_times = thin(interior, opt.max_ks_times);
  const auto cov_times = thin(test_times, opt.max_cov_times);

  std::vector<double> pts{0.0};
  pts.insert(pts.end(), test_times.begin(), test_times.end());
  const TimeGrid sgrid(pts, grid.horizon());
  const auto ea = sample_exact(lo, sgrid, n_paths, seed, {1, opt.threads});
  const auto eb = sample_exact(hi, sgrid, n_paths, seed, {2, opt.threads});

  EquivalenceReport r;
  r.method = EquivalenceReport::Method::MonteCarlo;
  r.grid = test_times;
  r.cov_times = cov_times;
  r.level = opt.level;
  r.n_paths = n_paths;
  r.seed = seed;
  r.label_a = label(a);
  r.label_b = label(b);

  double min_p = 1.0;
  const double nn = static_cast<double>(n_paths);
  for (std::size_t j = 0; j < test_times.size(); ++j) {
    const auto xa = ea.column(j + 1), xb = eb.column(j + 1);
    const auto ks = ks_statistic(xa, xb);
    r.ks.push_back({test_times[j], ks.D, ks.p});
    min_p = std::min(min_p, ks.p);
    double sa = 0, sb = 0, qa = 0, qb = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
      sa += xa[i];
      sb += xb[i];
      qa += xa[i] * xa[i];
      qb += xb[i] * xb[i];
    }
    const double va = (qa - sa * sa / nn) / (nn - 1), vb = (qb - sb * sb / nn) / (nn - 1);
    r.max_mean_gap = std::max(r.max_mean_gap, std::abs(sa - sb) / nn);
    r.max_var_gap_rel = std::max(r.max_var_gap_rel, rel_gap(va, vb));
  }

  // Covariance test: the centred bootstrap approximates the null law of
  // ||C_a - C_b||_F^2, matched to a scaled chi-square by its first two moments.
  std::vector<std::size_t> idx;
  for (double t : cov_times) {
    idx.push_back(static_cast<std::size_t>(std::find(test_times.begin(), test_times.end(), t) - test_times.begin()) + 1);
  }
  const std::size_t k = idx.size();
  const auto da = gather(ea, idx), db = gather(eb, idx);
  auto identity = [](std::size_t i) { return i; };
  const auto ca = sample_cov(da, n_paths, k, identity);
  const auto cb = sample_cov(db, n_paths, k, identity);
  std::vector<double> diff(k * k), mid(k * k);
  for (std::size_t c = 0; c < k * k; ++c) {
    diff[c] = ca[c] - cb[c];
    mid[c] = 0.5 * (ca[c] + cb[c]);
  }
  const double F = frobenius_sq(diff);
  r.cov_frobenius_gap = F == 0.0 ? 0.0 : std::sqrt(F / frobenius_sq(mid));
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = c + 1; d < k; ++d) r.max_cov_gap_rel = std::max(r.max_cov_gap_rel, rel_gap(ca[c * k + d], cb[c * k + d]));
  }

  std::mt19937_64 boot(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> stats;
  for (int rep = 0; rep < opt.bootstrap; ++rep) {
    std::vector<std::size_t> pa(n_paths), pb(n_paths);
    for (auto& p : pa) p = boot() % n_paths;
    for (auto& p : pb) p = boot() % n_paths;
    const auto sa = sample_cov(da, n_paths, k, [&](std::size_t i) { return pa[i]; });
    const auto sb = sample_cov(db, n_paths, k, [&](std::size_t i) { return pb[i]; });
    std::vector<double> d(k * k);
    for (std::size_t c = 0; c < k * k; ++c) d[c] = (sa[c] - ca[c]) - (sb[c] - cb[c]);
    stats.push_back(frobenius_sq(d));
  }
  double mu = 0.0, var = 0.0;
  for (double s : stats) mu += s;
  mu /= static_cast<double>(stats.size());
  for (double s : stats) var += (s - mu) * (s - mu);
  var /= static_cast<double>(stats.size() - 1);
  if (F == 0.0) {
    r.cov_p = 1.0;
  } else if (!(mu > 0.0 && var > 0.0)) {
    r.cov_p = 0.0;
  } else {
    const double scale = var / (2.0 * mu), dof = 2.0 * mu * mu / var;
    r.cov_p = boost::math::gamma_q(dof / 2.0, F / (2.0 * scale));
  }
  min_p = std::min(min_p, r.cov_p);

  const double family = static_cast<double>(r.ks.size() + 1);
  r.min_adjusted_p = std::min(1.0, family * min_p);
  if (r.min_adjusted_p < opt.level) {
    r.verdict = Verdict::Distinct;
  } else if (r.min_adjusted_p < opt.inconclusive_level) {
    r.verdict = Verdict::Inconclusive;
  } else {
    r.verdict = Verdict::Equivalent;
  }
  return r;
}

}  // namespace bridgelab

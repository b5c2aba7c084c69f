#include "bridgelab/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "bridgelab/riccati.hpp"
#include "bridgelab/simulate.hpp"
#include "bridgelab/stats.hpp"

namespace bridgelab::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

double to_number(std::string_view s, const std::string& context) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    config_error("bad number '" + std::string(s) + "' in " + context);
  }
  return v;
}

std::size_t to_count(std::string_view s, const std::string& context) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    config_error("bad count '" + std::string(s) + "' in " + context);
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json limit_json(const LimitEstimate& e) {
  json j{{"kind", to_string(e.kind)}};
  j["value"] = e.kind == LimitKind::Finite ? json(e.value) : json(nullptr);
  return j;
}

SchemeSpec parse_scheme(const std::string& s) {
  if (s == "exact") return {Scheme::Exact, 1};
  if (s == "euler") return {Scheme::EulerMaruyama, 64};
  if (s.rfind("euler:", 0) == 0) {
    const auto n = to_count(std::string_view(s).substr(6), "scheme");
    if (n < 1 || n > 1000000) config_error("euler substeps must be in [1, 10^6]");
    return {Scheme::EulerMaruyama, static_cast<int>(n)};
  }
  config_error("unknown scheme '" + s + "' (exact | euler:N)");
}

/// Output stream: a file, or `fallback` for empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback, bool binary = false) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, binary ? std::ios::binary : std::ios::out);
    if (!*file_) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    stream_ = file_.get();
  }
  std::ostream& operator*() { return *stream_; }
  void finish(const std::string& path) {
    stream_->flush();
    if (!*stream_) throw Error(ErrorKind::Io, "write to '" + (path.empty() ? "-" : path) + "' failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

bool is_file(const std::string& path) { return !path.empty() && path != "-"; }

void write_json(const json& j, const std::string& path, std::ostream& fallback) {
  Sink s(path, fallback);
  *s << j.dump(2) << '\n';
  s.finish(path);
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Optional flag values; only the ones given on the command line override the config.
struct Flags {
  std::optional<std::string> config, bridge, alpha, q, sigma, grid, scheme, out, format, json_out, cov_out, method;
  std::optional<double> a, b, T, C, tol;
  std::optional<std::uint64_t> paths, seed;
};

void add_spec_flags(CLI::App* app, Flags& f, const std::string& prefix = "") {
  app->add_option("--" + prefix + "config", f.config, "JSON run config");
  app->add_option("--" + prefix + "bridge", f.bridge, "alpha | ou");
  app->add_option("--" + prefix + "alpha", f.alpha, "alpha coefficient, e.g. const:1, poly1m:0.5, coth:2, table:f.csv");
  app->add_option("--" + prefix + "q", f.q, "OU drift coefficient (implies --bridge ou)");
  app->add_option("--" + prefix + "sigma", f.sigma, "OU diffusion coefficient");
  app->add_option("--" + prefix + "a", f.a, "OU bridge start value");
  app->add_option("--" + prefix + "b", f.b, "OU bridge end value");
  app->add_option("--" + prefix + "T", f.T, "horizon");
}

void add_run_flags(CLI::App* app, Flags& f) {
  app->add_option("--grid", f.grid, "default | uniform:N[:frac] | endpoint[:K] | stats[:m] | points:t1,t2,...");
  app->add_option("--out", f.out, "output path, - for stdout");
  app->add_option("--json", f.json_out, "JSON output path");
}

RunConfig resolve(const Flags& f, RunConfig base = {}) {
  RunConfig c = f.config ? load_config(*f.config) : std::move(base);
  if (f.alpha && f.q) config_error("--alpha and --q describe different bridges");
  if (f.alpha) c.bridge = "alpha";
  if (f.q) c.bridge = "ou";
  if (f.bridge) c.bridge = *f.bridge;
  if (f.alpha) c.alpha = *f.alpha;
  if (f.q) c.q = *f.q;
  if (f.sigma) c.sigma = *f.sigma;
  if (f.a) c.a = *f.a;
  if (f.b) c.b = *f.b;
  if (f.T) c.T = *f.T;
  if (f.grid) c.grid = *f.grid;
  if (f.paths) c.paths = *f.paths;
  if (f.seed) c.seed = *f.seed;
  if (f.scheme) c.scheme = *f.scheme;
  if (f.out) c.out = *f.out;
  if (f.format) c.format = *f.format;
  if (f.json_out) c.json = *f.json_out;
  if (f.cov_out) c.cov_out = *f.cov_out;
  if (f.C) c.C = *f.C;
  if (f.tol) c.tol = *f.tol;
  if (f.method) c.method = *f.method;
  return c;
}

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double require_T(const RunConfig& c) {
  if (!c.T) throw Usage("missing horizon: pass --T or set \"T\" in the config");
  if (!(*c.T > 0.0)) config_error("T must be positive");
  return *c.T;
}

const CoefficientFn& alpha_of(const BridgeSpec& spec) {
  const auto* ab = std::get_if<AlphaBridge>(&spec);
  if (!ab) config_error("this command needs an alpha bridge");
  return ab->alpha;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  const double T = require_T(c);
  const auto spec = make_spec(c);
  const auto grid = make_grid(c.grid, T, GridUse::Sampling);
  const auto scheme = parse_scheme(c.scheme);
  if (c.paths < 1) config_error("paths must be at least 1");
  std::string format = c.format;
  if (format.empty()) format = c.out.size() > 4 && c.out.ends_with(".bin") ? "binary" : "csv";
  if (format != "csv" && format != "binary") config_error("format must be csv or binary");
  if (format == "binary" && !is_file(c.out)) config_error("binary output needs --out <file>");

  const auto e = scheme.kind == Scheme::Exact ? sample_exact(spec, grid, c.paths, c.seed)
                                              : sample_euler(spec, grid, c.paths, c.seed, scheme.substeps);
  {
    Sink s(c.out, out, format == "binary");
    if (format == "binary") {
      write_binary(e, *s);
    } else {
      write_csv(e, *s);
    }
    s.finish(c.out);
  }

  json side;
  side["config"] = to_json(c);
  side["seed"] = c.seed;
  side["digest"] = hex(e.spec_digest);
  side["label"] = e.spec_label;
  side["scheme"] = to_string(e.scheme);
  side["n_paths"] = e.n_paths;
  side["n_times"] = e.grid.size();
  side["format"] = format;
  const std::size_t last = grid.size() - 1;
  double ms = 0.0;
  for (std::size_t i = 0; i < e.n_paths; ++i) ms += e.value(i, last) * e.value(i, last);
  const auto gm = grid_moments(spec, std::vector<double>{grid[last]});
  json endpoint{{"t", grid[last]},
                {"mean_square", ms / static_cast<double>(e.n_paths)},
                {"analytic_variance", gm.variance(0)},
                {"analytic_mean", gm.mean[0]}};
  if (const auto* ab = std::get_if<AlphaBridge>(&spec)) {
    endpoint["regime"] = to_string(endpoint_regime(*ab));
    endpoint["alpha_limit"] = limit_json(probe_alpha_limit(ab->alpha, T).estimate);
  }
  side["endpoint"] = endpoint;

  const std::string side_path = !c.json.empty() ? c.json : is_file(c.out) ? c.out + ".json" : "";
  if (!side_path.empty()) write_json(side, side_path, out);
  return 0;
}

int cmd_identify(const RunConfig& c, std::ostream& out) {
  const double T = require_T(c);
  const auto spec = make_spec(c);
  const auto& alpha = alpha_of(spec);
  const auto cls = classify_identical_bridge(alpha, T);
  json j{{"alpha", alpha.label}, {"T", T}, {"verdict", to_string(cls.verdict)}};
  j["alpha_limit"] = limit_json(cls.alpha_limit);
  j["mixed"] = cls.mixed;
  auto& probes = j["probes"] = json::array();
  for (const auto& p : cls.probes) {
    json pj{{"C", p.C}, {"limit", limit_json(p.limit)}};
    if (!p.failure.empty()) pj["failure"] = p.failure;
    probes.push_back(pj);
  }
  if (cls.verdict != IdentityVerdict::ImpossibleLimitNotOne) {
    const double C = c.C.value_or(T);
    const auto id = identify(alpha, T, C);
    j["C"] = C;
    j["limit"] = limit_json(id.limit_at_T);
    if (is_file(c.out)) {
      const auto grid = make_grid(c.grid, T, GridUse::Sampling);
      Sink s(c.out, out);
      *s << "t,q_C\n";
      for (double t : grid.points()) *s << num(t) << ',' << num(id.q_C(t)) << '\n';
      s.finish(c.out);
      j["csv"] = c.out;
    }
  }
  write_json(j, c.json, out);
  return 0;
}

int cmd_moments(const RunConfig& c, std::ostream& out) {
  const double T = require_T(c);
  const auto spec = make_spec(c);
  const auto grid = make_grid(c.grid, T, GridUse::Moments);
  const auto m = grid_moments(spec, grid.points());
  {
    Sink s(c.out, out);
    *s << "t,mean,var\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      *s << num(grid[i]) << ',' << num(m.mean[i]) << ',' << num(m.variance(i)) << '\n';
    }
    s.finish(c.out);
  }
  if (!c.cov_out.empty()) {
    Sink s(c.cov_out, out);
    *s << "s,t,cov\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t k = i; k < grid.size(); ++k) {
        *s << num(grid[i]) << ',' << num(grid[k]) << ',' << num(m.covariance(i, k)) << '\n';
      }
    }
    s.finish(c.cov_out);
  }
  return 0;
}

int cmd_classify(const RunConfig& c, std::ostream& out) {
  const double T = require_T(c);
  const auto spec = make_spec(c);
  const auto& alpha = alpha_of(spec);
  const auto cls = classify_identical_bridge(alpha, T);
  json j{{"alpha", alpha.label}, {"T", T}, {"verdict", to_string(cls.verdict)}, {"mixed", cls.mixed}};
  j["alpha_limit"] = limit_json(cls.alpha_limit);
  j["endpoint_regime"] = to_string(endpoint_regime(std::get<AlphaBridge>(spec)));
  auto& probes = j["probes"] = json::array();
  for (const auto& p : cls.probes) probes.push_back({{"C", p.C}, {"limit", limit_json(p.limit)}});
  write_json(j, c.json, out);
  return 0;
}

int cmd_equivalence(const RunConfig& shared, RunConfig left, RunConfig right, std::ostream& out) {
  if (!left.T) left.T = shared.T;
  if (!right.T) right.T = shared.T;
  if (!left.T && right.T) left.T = right.T;
  if (!right.T && left.T) right.T = left.T;
  const double T = require_T(left);
  require_T(right);
  if (*left.T != *right.T) throw Error(ErrorKind::HorizonMismatch, "left and right horizons differ");
  const auto a = make_spec(left), b = make_spec(right);
  const auto grid = make_grid(shared.grid, T, GridUse::Moments);
  EquivalenceReport r;
  if (shared.method == "analytic") {
    r = analytic_equivalence(a, b, grid, shared.tol);
  } else if (shared.method == "mc") {
    r = mc_equivalence(a, b, grid, shared.paths, shared.seed);
  } else {
    config_error("method must be analytic or mc");
  }
  write_json(r.to_json(), shared.json, out);
  return 0;
}

}  // namespace

json to_json(const RunConfig& c) {
  json j{{"bridge", c.bridge}, {"alpha", c.alpha}, {"q", c.q},       {"sigma", c.sigma},   {"a", c.a},
         {"b", c.b},           {"grid", c.grid},   {"paths", c.paths}, {"seed", c.seed},     {"scheme", c.scheme},
         {"out", c.out},       {"format", c.format}, {"json", c.json}, {"cov_out", c.cov_out}, {"tol", c.tol},
         {"method", c.method}};
  if (c.T) j["T"] = *c.T;
  if (c.C) j["C"] = *c.C;
  return j;
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  RunConfig c;
  auto str = [](const json& v, const std::string& key) {
    if (!v.is_string()) config_error("config key '" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto real = [](const json& v, const std::string& key) {
    if (!v.is_number()) config_error("config key '" + key + "' must be a number");
    return v.get<double>();
  };
  auto count = [](const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) config_error("config key '" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "bridge") c.bridge = str(v, key);
    else if (key == "alpha") c.alpha = str(v, key);
    else if (key == "q") c.q = str(v, key);
    else if (key == "sigma") c.sigma = str(v, key);
    else if (key == "a") c.a = real(v, key);
    else if (key == "b") c.b = real(v, key);
    else if (key == "T") c.T = real(v, key);
    else if (key == "grid") c.grid = str(v, key);
    else if (key == "paths") c.paths = count(v, key);
    else if (key == "seed") c.seed = count(v, key);
    else if (key == "scheme") c.scheme = str(v, key);
    else if (key == "out") c.out = str(v, key);
    else if (key == "format") c.format = str(v, key);
    else if (key == "json") c.json = str(v, key);
    else if (key == "cov_out") c.cov_out = str(v, key);
    else if (key == "C") c.C = real(v, key);
    else if (key == "tol") c.tol = real(v, key);
    else if (key == "method") c.method = str(v, key);
    else config_error("unknown config key '" + key + "'");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    config_error("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

BridgeSpec make_spec(const RunConfig& c) {
  if (!c.T || !(*c.T > 0.0)) config_error("config needs a positive T");
  const double T = *c.T;
  if (c.bridge == "alpha") return AlphaBridge(coef::parse(c.alpha, T), T);
  if (c.bridge == "ou") return OUBridge{OUSpec(coef::parse(c.q, T), coef::parse(c.sigma, T), T), c.a, c.b};
  config_error("bridge must be alpha or ou, got '" + c.bridge + "'");
}

TimeGrid make_grid(const std::string& policy, double T, GridUse use) {
  const auto colon = policy.find(':');
  const std::string name = policy.substr(0, colon);
  const std::string_view rest = colon == std::string::npos ? std::string_view{} : std::string_view(policy).substr(colon + 1);
  const bool has_args = colon != std::string::npos;
  auto finish = [&](std::vector<double> pts) {
    if (use == GridUse::Sampling && !pts.empty() && pts.front() > 0.0) pts.insert(pts.begin(), 0.0);
    return TimeGrid(std::move(pts), T);
  };
  auto points_of = [](const TimeGrid& g) { return std::vector<double>(g.points().begin(), g.points().end()); };

  if (name == "default" && !has_args) {
    return use == GridUse::Sampling ? TimeGrid::standard(T) : TimeGrid::interior(T, 32);
  }
  if (name == "uniform") {
    const auto parts = split(rest, ':');
    if (!has_args || parts.size() > 2) config_error("grid uniform:N[:frac]");
    const auto n = to_count(parts[0], "grid");
    const double frac = parts.size() == 2 ? to_number(parts[1], "grid") : 0.9;
    return TimeGrid::uniform(T, n, frac);
  }
  if (name == "endpoint") {
    const int k = has_args ? static_cast<int>(to_count(rest, "grid")) : 18;
    return TimeGrid::endpoint(T, k);
  }
  if (name == "stats") {
    const auto m = has_args ? to_count(rest, "grid") : 32;
    return finish(points_of(TimeGrid::interior(T, m)));
  }
  if (name == "points") {
    if (!has_args || rest.empty()) throw Error(ErrorKind::InvalidGrid, "grid is empty");
    std::vector<double> pts;
    for (auto p : split(rest, ',')) pts.push_back(to_number(p, "grid points"));
    return finish(std::move(pts));
  }
  config_error("unknown grid policy '" + policy + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and identification of alpha-Wiener bridges and OU-type bridges", "bridge-lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bridge-lab 0.1.0");

  Flags sim, ide, mom, cls, eq, left, right;
  auto* s = app.add_subcommand("simulate", "sample paths to CSV or binary, with a JSON sidecar");
  add_spec_flags(s, sim);
  add_run_flags(s, sim);
  s->add_option("--paths", sim.paths, "number of paths");
  s->add_option("--seed", sim.seed, "RNG seed");
  s->add_option("--scheme", sim.scheme, "exact | euler:N");
  s->add_option("--format", sim.format, "csv | binary (default from the --out extension)");

  auto* i = app.add_subcommand("identify", "solve for the OU drift family q_C producing an alpha bridge");
  add_spec_flags(i, ide);
  add_run_flags(i, ide);
  i->add_option("--C", ide.C, "family parameter C in (0, inf); default T");

  auto* m = app.add_subcommand("moments", "mean and variance table, optional pairwise covariances");
  add_spec_flags(m, mom);
  add_run_flags(m, mom);
  m->add_option("--cov-out", mom.cov_out, "pairwise covariance CSV");

  auto* c = app.add_subcommand("classify", "decide whether an OU-type process can share the bridge law");
  add_spec_flags(c, cls);
  c->add_option("--json", cls.json_out, "JSON output path");

  auto* e = app.add_subcommand("equivalence", "compare two bridge laws");
  e->add_option("--config", eq.config, "JSON config with shared settings");
  e->add_option("--T", eq.T, "horizon shared by both sides");
  e->add_option("--grid", eq.grid, "comparison grid policy (default 32 interior points)");
  e->add_option("--tol", eq.tol, "gap tolerance for the analytic method");
  e->add_option("--method", eq.method, "analytic | mc");
  e->add_option("--paths", eq.paths, "paths per side for mc (>= 10000)");
  e->add_option("--seed", eq.seed, "RNG seed for mc");
  e->add_option("--json", eq.json_out, "report path");
  add_spec_flags(e, left, "left-");
  add_spec_flags(e, right, "right-");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  auto current = [&]() -> CLI::App* {
    for (auto* sub : {s, i, m, c, e}) {
      if (sub->parsed()) return sub;
    }
    return &app;
  };
  try {
    app.parse(reversed);
    if (s->parsed()) return cmd_simulate(resolve(sim), out);
    if (i->parsed()) return cmd_identify(resolve(ide), out);
    if (m->parsed()) return cmd_moments(resolve(mom), out);
    if (c->parsed()) return cmd_classify(resolve(cls), out);
    RunConfig shared = resolve(eq);
    if (!eq.paths && !eq.config) shared.paths = 100000;
    return cmd_equivalence(shared, resolve(left), resolve(right), out);
  } catch (const CLI::Success& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << current()->help();
    return 2;
  } catch (const Usage& ex) {
    err << "error: " << ex.what() << "\n\n" << current()->help();
    return 2;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return is_numerical(ex.kind()) ? 3 : 2;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return 3;
  }
}

}  // namespace bridgelab::cli

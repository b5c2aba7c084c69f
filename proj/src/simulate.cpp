#include "bridgelab/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include "bridgelab/rng.hpp"

namespace bridgelab {

namespace {

std::uint64_t stream_id(std::uint64_t family, std::size_t path) {
  return (family << 40) ^ static_cast<std::uint64_t>(path);
}

void check_inputs(const BridgeSpec& spec, const TimeGrid& grid, std::size_t n_paths) {
  if (n_paths == 0) throw Error(ErrorKind::InvalidArgument, "n_paths must be at least 1");
  if (grid.horizon() != horizon(spec)) {
    throw Error(ErrorKind::HorizonMismatch, "grid horizon differs from the bridge horizon");
  }
  if (grid[0] != 0.0) throw Error(ErrorKind::InvalidGrid, "sampling grids must start at t = 0");
}

// Runs body(first, last) over [0, n) split across workers; rethrows the first failure.
template <class Body>
void parallel_paths(std::size_t n, unsigned threads, Body body) {
  unsigned workers = threads == 0 ? worker_threads() : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t first = w * chunk, last = std::min(n, first + chunk);
    if (first >= last) break;
    pool.emplace_back([&, first, last] {
      try {
        body(first, last);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

PathEnsemble make_ensemble(const BridgeSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                           std::uint64_t seed, const SampleOptions& opt, SchemeSpec scheme) {
  PathEnsemble e{grid, n_paths, {}, seed, opt.family, scheme, digest(spec), label(spec)};
  e.values.assign(n_paths * grid.size(), 0.0);
  return e;
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(out, bits);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorKind::Io, "truncated binary ensemble");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace

std::string to_string(const SchemeSpec& s) {
  if (s.kind == Scheme::Exact) return "exact";
  return "euler:" + std::to_string(s.substeps);
}

std::vector<double> PathEnsemble::column(std::size_t time) const {
  std::vector<double> out(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) out[i] = value(i, time);
  return out;
}

unsigned worker_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("BRIDGE_LAB_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return n;
}

PathEnsemble sample_exact(const BridgeSpec& spec, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                          const SampleOptions& opt) {
  check_inputs(spec, grid, n_paths);
  const std::size_t m = grid.size();
  std::vector<Transition> steps(m > 0 ? m - 1 : 0);
  std::vector<double> sd(steps.size());
  for (std::size_t j = 0; j + 1 < m; ++j) {
    steps[j] = transition(spec, grid[j], grid[j + 1]);
    sd[j] = std::sqrt(std::max(0.0, steps[j].variance));
  }
  auto e = make_ensemble(spec, grid, n_paths, seed, opt, {Scheme::Exact, 1});
  const double x0 = initial_value(spec);
  parallel_paths(n_paths, opt.threads, [&](std::size_t first, std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
      RngStream rng(seed, stream_id(opt.family, i));
      double* row = e.values.data() + i * m;
      double x = x0;
      row[0] = x;
      for (std::size_t j = 0; j + 1 < m; ++j) {
        x = steps[j].offset + steps[j].decay * x + sd[j] * rng.normal(j);
        row[j + 1] = x;
      }
    }
  });
  return e;
}

LinearDrift alpha_bridge_drift(const AlphaBridge& spec, double t) {
  if (!(t >= 0.0 && t < spec.T)) throw Error(ErrorKind::InvalidArgument, "drift needs t in [0, T)");
  return {-spec.alpha(t) / (spec.T - t), 0.0};
}

LinearDrift ou_bridge_drift(const OUBridge& spec, double t) {
  const auto& ou = spec.ou;
  const double T = ou.horizon();
  if (!(t >= 0.0 && t < T)) throw Error(ErrorKind::InvalidArgument, "drift needs t in [0, T)");
  const double sg = ou.sigma()(t);
  const double g = ou.gamma(t, T);
  const double lift = std::exp(ou.qbar(T) - ou.qbar(t));
  return {ou.q()(t) - lift * lift * sg * sg / g, lift * sg * sg * spec.b / g};
}

LinearDrift bridge_drift(const BridgeSpec& spec, double t) {
  if (const auto* ab = std::get_if<AlphaBridge>(&spec)) return alpha_bridge_drift(*ab, t);
  return ou_bridge_drift(std::get<OUBridge>(spec), t);
}

PathEnsemble sample_euler(const BridgeSpec& spec, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                          int substeps, const SampleOptions& opt) {
  check_inputs(spec, grid, n_paths);
  if (substeps < 1) throw Error(ErrorKind::InvalidArgument, "substeps must be at least 1");
  const std::size_t m = grid.size();
  const auto sub = static_cast<std::size_t>(substeps);
  const CoefficientFn* sigma = nullptr;
  if (const auto* ob = std::get_if<OUBridge>(&spec)) sigma = &ob->ou.sigma();

  // Per-substep drift and noise scale, shared by every path.
  struct Step {
    LinearDrift drift;
    double dt, noise;
  };
  std::vector<Step> steps;
  steps.reserve((m > 0 ? m - 1 : 0) * sub);
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double dt = (grid[j + 1] - grid[j]) / static_cast<double>(sub);
    for (std::size_t k = 0; k < sub; ++k) {
      const double t = grid[j] + dt * static_cast<double>(k);
      const double s = sigma ? std::abs((*sigma)(t)) : 1.0;
      steps.push_back({bridge_drift(spec, t), dt, s * std::sqrt(dt)});
    }
  }
  auto e = make_ensemble(spec, grid, n_paths, seed, opt, {Scheme::EulerMaruyama, substeps});
  const double x0 = initial_value(spec);
  parallel_paths(n_paths, opt.threads, [&](std::size_t first, std::size_t last) {
    for (std::size_t i = first; i < last; ++i) {
      RngStream rng(seed, stream_id(opt.family, i));
      double* row = e.values.data() + i * m;
      double x = x0;
      row[0] = x;
      std::size_t n = 0;
      for (std::size_t j = 0; j + 1 < m; ++j) {
        for (std::size_t k = 0; k < sub; ++k, ++n) {
          const Step& st = steps[n];
          const double move = st.drift(x) * st.dt;
          if (!(std::abs(move) <= 1e12)) {
            throw Error(ErrorKind::DriftBlowup, "drift step " + std::to_string(move) + " near t=" +
                                                    std::to_string(grid[j]));
          }
          x += move + st.noise * rng.normal(n);
        }
        row[j + 1] = x;
      }
    }
  });
  return e;
}

std::vector<EndpointRow> endpoint_study(const AlphaBridge& spec, std::size_t n_paths, std::uint64_t seed) {
  const auto grid = TimeGrid::endpoint(spec.T, 18);
  const auto e = sample_exact(BridgeSpec{spec}, grid, n_paths, seed);
  std::vector<EndpointRow> rows;
  for (std::size_t j = 1; j < grid.size(); ++j) {
    EndpointRow r;
    r.k = static_cast<int>(j);
    r.t = grid[j];
    for (std::size_t i = 0; i < n_paths; ++i) {
      const double x = e.value(i, j);
      r.mean_abs += std::abs(x);
      r.mean_square += x * x;
    }
    r.mean_abs /= static_cast<double>(n_paths);
    r.mean_square /= static_cast<double>(n_paths);
    r.variance = alpha_transition_variance(spec, 0.0, r.t);
    rows.push_back(r);
  }
  return rows;
}

void write_csv(const PathEnsemble& e, std::ostream& out) {
  out << 't';
  for (std::size_t i = 0; i < e.n_paths; ++i) out << ",path" << i;
  out << '\n';
  char buf[32];
  for (std::size_t j = 0; j < e.grid.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", e.grid[j]);
    out << buf;
    for (std::size_t i = 0; i < e.n_paths; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", e.value(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_binary(const PathEnsemble& e, std::ostream& out) {
  out.write("BRLB", 4);
  const std::uint16_t version = 1;
  const char v[2] = {static_cast<char>(version & 0xff), static_cast<char>(version >> 8)};
  out.write(v, 2);
  put_u64(out, e.grid.size());
  put_u64(out, e.n_paths);
  for (double t : e.grid.points()) put_f64(out, t);
  for (double x : e.values) put_f64(out, x);
}

BinaryEnsemble read_binary(std::istream& in) {
  char magic[4];
  unsigned char v[2];
  if (!in.read(magic, 4) || std::memcmp(magic, "BRLB", 4) != 0) {
    throw Error(ErrorKind::Io, "not a BRLB ensemble");
  }
  if (!in.read(reinterpret_cast<char*>(v), 2) || (v[0] | (v[1] << 8)) != 1) {
    throw Error(ErrorKind::Io, "unsupported BRLB version");
  }
  BinaryEnsemble b;
  const std::uint64_t n_times = get_u64(in);
  b.n_paths = get_u64(in);
  if (n_times > (1u << 28) || b.n_paths > (1u << 28)) throw Error(ErrorKind::Io, "implausible BRLB sizes");
  b.grid.resize(n_times);
  for (auto& t : b.grid) t = get_f64(in);
  b.values.resize(n_times * b.n_paths);
  for (auto& x : b.values) x = get_f64(in);
  return b;
}

}  // namespace bridgelab

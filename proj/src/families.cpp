#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "bridgelab/coeffs.hpp"

namespace bridgelab::coef {

namespace {

// Shortest text that reads back to the same double.
std::string fmt_param(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text, std::string_view context) {
  auto trimmed = text;
  while (!trimmed.empty() && trimmed.front() == ' ') trimmed.remove_prefix(1);
  while (!trimmed.empty() && trimmed.back() == ' ') trimmed.remove_suffix(1);
  double value = 0.0;
  const auto* end = trimmed.data() + trimmed.size();
  const auto [ptr, ec] = std::from_chars(trimmed.data(), end, value);
  if (ec != std::errc() || ptr != end || trimmed.empty() || !std::isfinite(value)) {
    throw Error(ErrorKind::InvalidArgument,
                "bad number '" + std::string(text) + "' in " + std::string(context));
  }
  return value;
}

// x coth x, even in x, equal to 1 at 0.
double x_coth_x(double x) {
  if (x == 0.0) return 1.0;
  return x / std::tanh(x);
}

// x coth x - 1.
double x_coth_x_minus_one(double x) {
  if (std::abs(x) < 0.1) {
    const double x2 = x * x;
    return x2 * (1.0 / 3.0 + x2 * (-1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (-1.0 / 4725.0 + x2 * 2.0 / 93555.0))));
  }
  return x / std::tanh(x) - 1.0;
}

// d/dx [x coth x] = coth x - x / sinh^2 x.
double x_coth_x_prime(double x) {
  if (std::abs(x) < 1e-2) {
    const double x2 = x * x;
    return x * (2.0 / 3.0 + x2 * (-4.0 / 45.0 + x2 * (4.0 / 315.0 - x2 * 8.0 / 4725.0)));
  }
  const double sh = std::sinh(x);
  return 1.0 / std::tanh(x) - x / (sh * sh);
}

}  // namespace

CoefficientFn constant(double c) {
  CoefficientFn f;
  f.eval = [c](double) { return c; };
  f.deriv = [](double) { return 0.0; };
  f.primitive = [c](double s, double t) { return c * (t - s); };
  f.gap_eval = [c](double) { return c; };
  f.gap_origin = kInfinity;
  f.constant_value = c;
  f.gap_excess = [c](double) { return c - 1.0; };
  f.label = "const:" + fmt_param(c);
  return f;
}

CoefficientFn linear(double c0, double c1) {
  CoefficientFn f;
  f.eval = [c0, c1](double t) { return c0 + c1 * t; };
  f.deriv = [c1](double) { return c1; };
  f.primitive = [c0, c1](double s, double t) { return (t - s) * (c0 + 0.5 * c1 * (t + s)); };
  f.label = "lin:" + fmt_param(c0) + "," + fmt_param(c1);
  return f;
}

CoefficientFn reciprocal(double shift) {
  if (shift == 0.0 || !std::isfinite(shift)) {
    throw Error(ErrorKind::InvalidArgument, "reciprocal shift must be finite and nonzero");
  }
  CoefficientFn f;
  f.eval = [shift](double t) { return 1.0 / (t + shift); };
  f.deriv = [shift](double t) { return -1.0 / ((t + shift) * (t + shift)); };
  f.primitive = [shift](double s, double t) { return std::log((t + shift) / (s + shift)); };
  f.domain_end = shift > 0.0 ? kInfinity : -shift;
  f.label = "recip:" + fmt_param(shift);
  return f;
}

CoefficientFn power_offset(int sign, double beta, double T) {
  if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  const double sg = sign >= 0 ? 1.0 : -1.0;
  CoefficientFn f;
  f.eval = [sg, beta, T](double t) { return 1.0 + sg * std::pow(T - t, beta); };
  f.deriv = [sg, beta, T](double t) { return -sg * beta * std::pow(T - t, beta - 1.0); };
  f.primitive = [sg, beta, T](double s, double t) {
    return (t - s) + sg * (std::pow(T - s, beta + 1.0) - std::pow(T - t, beta + 1.0)) / (beta + 1.0);
  };
  f.domain_end = T;
  f.gap_eval = [sg, beta](double tau) { return 1.0 + sg * std::pow(tau, beta); };
  f.gap_excess = [sg, beta](double tau) { return sg * std::pow(tau, beta); };
  f.gap_origin = T;
  f.label = std::string(sg > 0 ? "poly1p:" : "poly1m:") + fmt_param(beta) + "@" + fmt_param(T);
  return f;
}

CoefficientFn coth_drift(double q0, double T) {
  if (q0 == 0.0 || !std::isfinite(q0)) throw Error(ErrorKind::InvalidArgument, "q0 must be nonzero");
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  CoefficientFn f;
  f.eval = [q0, T](double t) { return x_coth_x(q0 * (T - t)); };
  f.deriv = [q0, T](double t) { return -q0 * x_coth_x_prime(q0 * (T - t)); };
  f.domain_end = T;
  f.gap_eval = [q0](double tau) { return x_coth_x(q0 * tau); };
  f.gap_excess = [q0](double tau) { return x_coth_x_minus_one(q0 * tau); };
  f.gap_origin = T;
  f.label = "coth:" + fmt_param(q0) + "@" + fmt_param(T);
  return f;
}

CoefficientFn wiener_identifying(double T, double C) {
  if (!(C > 0.0) || !std::isfinite(C)) throw Error(ErrorKind::InvalidC, "C must lie in (0, inf)");
  if (!(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "T must be positive");
  const double slope = T - C;
  const double offset = C * T;
  CoefficientFn f;
  f.eval = [slope, offset](double t) { return slope / (slope * t + offset); };
  f.deriv = [slope, offset](double t) {
    const double d = slope * t + offset;
    return -slope * slope / (d * d);
  };
  f.primitive = [slope, offset](double s, double t) {
    if (slope == 0.0) return 0.0;
    return std::log((slope * t + offset) / (slope * s + offset));
  };
  // The denominator vanishes at t = CT/(C-T) > T when C > T.
  f.domain_end = slope < 0.0 ? offset / (-slope) : kInfinity;
  f.label = "wiener:" + fmt_param(C) + "@" + fmt_param(T);
  return f;
}

CoefficientFn tabulated(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "table needs at least two (t, value) rows");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "table times must be strictly increasing");
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "table values must be finite");
  }
  // Cumulative trapezoid integrals, exact for the interpolant.
  std::vector<double> cumulative(times.size(), 0.0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
  }
  struct Table {
    std::vector<double> t, y, cum;
    std::size_t segment(double x) const {
      const auto it = std::upper_bound(t.begin(), t.end(), x);
      const auto i = static_cast<std::size_t>(std::distance(t.begin(), it));
      return std::clamp<std::size_t>(i, 1, t.size() - 1) - 1;
    }
    double eval(double x) const {
      if (x <= t.front()) return y.front();
      if (x >= t.back()) return y.back();
      const auto i = segment(x);
      const double w = (x - t[i]) / (t[i + 1] - t[i]);
      return y[i] + w * (y[i + 1] - y[i]);
    }
    double slope(double x) const {
      if (x < t.front() || x > t.back()) return 0.0;
      const auto i = segment(x);
      return (y[i + 1] - y[i]) / (t[i + 1] - t[i]);
    }
    double cumulative(double x) const {
      if (x <= t.front()) return y.front() * (x - t.front());
      if (x >= t.back()) return cum.back() + y.back() * (x - t.back());
      const auto i = segment(x);
      return cum[i] + 0.5 * (y[i] + eval(x)) * (x - t[i]);
    }
  };
  auto table = std::make_shared<const Table>(Table{std::move(times), std::move(values), std::move(cumulative)});

  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](double x) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (std::size_t i = 0; i < table->t.size(); ++i) {
    mix(table->t[i]);
    mix(table->y[i]);
  }

  CoefficientFn f;
  f.eval = [table](double x) { return table->eval(x); };
  f.deriv = [table](double x) { return table->slope(x); };
  f.numeric_deriv = true;
  f.breakpoints = table->t;
  f.primitive = [table](double s, double x) { return table->cumulative(x) - table->cumulative(s); };
  f.domain_end = kInfinity;
  std::ostringstream os;
  os << "table#" << std::hex << h;
  f.label = os.str();
  return f;
}

CoefficientFn from_function(std::function<double(double)> fn, std::string label, double domain_end) {
  CoefficientFn f;
  f.eval = std::move(fn);
  f.label = std::move(label);
  f.domain_end = domain_end;
  return f;
}

namespace {

std::vector<double> split_numbers(std::string_view text, std::string_view context) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(parse_number(piece, context));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

CoefficientFn load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open table file '" + path + "'");
  std::vector<double> t, y;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    if (!(row >> a >> b)) {
      if (t.empty()) continue;  // header
      throw Error(ErrorKind::InvalidArgument, "malformed table row '" + line + "' in " + path);
    }
    t.push_back(a);
    y.push_back(b);
  }
  return tabulated(std::move(t), std::move(y));
}

}  // namespace

CoefficientFn parse(std::string_view spec, double T) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::InvalidArgument, "coefficient spec '" + std::string(spec) +
                                                "' must look like name:params");
  }
  const auto name = spec.substr(0, colon);
  const auto rest = spec.substr(colon + 1);
  auto one = [&]() {
    const auto v = split_numbers(rest, spec);
    if (v.size() != 1) {
      throw Error(ErrorKind::InvalidArgument, "'" + std::string(spec) + "' takes one parameter");
    }
    return v.front();
  };
  if (name == "const") return constant(one());
  if (name == "lin") {
    const auto v = split_numbers(rest, spec);
    if (v.size() != 2) throw Error(ErrorKind::InvalidArgument, "lin takes two parameters");
    return linear(v[0], v[1]);
  }
  if (name == "recip") return reciprocal(one());
  if (name == "poly1p") return power_offset(+1, one(), T);
  if (name == "poly1m") return power_offset(-1, one(), T);
  if (name == "coth") return coth_drift(one(), T);
  if (name == "wiener") return wiener_identifying(T, one());
  if (name == "table") return load_table(std::string(rest));
  throw Error(ErrorKind::InvalidArgument, "unknown coefficient family '" + std::string(name) + "'");
}

}  // namespace bridgelab::coef

#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "waning/errors.hpp"
#include "waning/params.hpp"
#include "waning/quadrature.hpp"
#include "waning/simulator.hpp"

// Plain-text run configuration: one `key = value` per line, `#` starts a
// comment. Numbers may be written as a ratio `a/b`; lists are comma separated.

namespace waning {

struct ConfigError : Error
{
  using Error::Error;
};

struct RunConfig
{
  ModelParams params;

  double r0_lo = 0.95, r0_hi = 1.05;
  int n_steps = 0;  ///< 0: 400 per unit of R0

  SimConfig sim;
  std::optional<double> init_S, init_R;
  double init_E = 0.0, init_A = 0.0, init_I = 10.0;
  std::vector<double> bistab_I{10.0, 1e6};

  QuadConfig quad;
};

namespace detail {

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_plain(const std::string& s)
{
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    return std::nullopt;
  return v;
}

inline std::optional<double> parse_number(const std::string& text)
{
  const std::string s = trim(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos)
    return parse_plain(s);
  const auto num = parse_plain(trim(s.substr(0, slash)));
  const auto den = parse_plain(trim(s.substr(slash + 1)));
  if (!num || !den)
    return std::nullopt;
  return *num / *den;
}

inline std::string format_exact(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry
{
  std::string value;
  int line = 0;
  int column = 0;
};

}  // namespace detail

/// Parses configuration text; `source` prefixes diagnostics.
inline RunConfig parse_config(const std::string& text, const std::string& source = "<config>")
{
  std::map<std::string, detail::Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  auto fail = [&](int line, int col, const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = raw.substr(0, raw.find('#'));
    if (detail::trim(line).empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(lineno, 1, "expected `key = value`");
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty())
      fail(lineno, 1, "missing key");
    if (entries.count(key))
      fail(lineno, 1, "duplicate key " + key);
    const int col = static_cast<int>(line.find_first_not_of(" \t", eq + 1) == std::string::npos
                                         ? eq + 2
                                         : line.find_first_not_of(" \t", eq + 1) + 1);
    entries[key] = {detail::trim(line.substr(eq + 1)), lineno, col};
  }

  auto number = [&](const std::string& key) -> std::optional<double> {
    const auto it = entries.find(key);
    if (it == entries.end())
      return std::nullopt;
    const auto v = detail::parse_number(it->second.value);
    if (!v)
      fail(it->second.line, it->second.column, "cannot parse number for " + key);
    entries.erase(it);
    return v;
  };
  auto list = [&](const std::string& key) -> std::optional<std::vector<double>> {
    const auto it = entries.find(key);
    if (it == entries.end())
      return std::nullopt;
    std::vector<double> out;
    std::istringstream items(it->second.value);
    std::string item;
    while (std::getline(items, item, ',')) {
      const auto v = detail::parse_number(item);
      if (!v)
        fail(it->second.line, it->second.column, "cannot parse list for " + key);
      out.push_back(*v);
    }
    entries.erase(it);
    return out;
  };
  auto required = [&](const std::string& key) {
    const auto v = number(key);
    if (!v)
      throw ConfigError("missing required key " + key);
    return *v;
  };

  RunConfig cfg;
  auto& p = cfg.params;
  p.Lambda = required("Lambda");
  p.beta_s = required("beta_s");
  p.bar_beta = number("bar_beta").value_or(0.0);
  p.theta = required("theta");
  p.epsilon = required("epsilon");
  p.u = required("u");
  p.mu = required("mu");
  p.alpha = required("alpha");
  p.sigma = required("sigma");
  p.rho = required("rho");
  p.gamma_A = required("gamma_A");
  p.gamma_I = required("gamma_I");

  const auto ages = list("kernel_ages");
  const auto values = list("kernel_values");
  if (ages || values) {
    if (!ages || !values)
      throw ConfigError("kernel_ages and kernel_values must be given together");
    p.kernel = ImmunityKernel::tabulated(*ages, *values);
  }
  else
    p.kernel = ImmunityKernel::waning(required("eta"), required("gamma_w"), required("tau_hat"));

  if (auto v = number("r0_lo"))
    cfg.r0_lo = *v;
  if (auto v = number("r0_hi"))
    cfg.r0_hi = *v;
  if (auto v = number("n_steps"))
    cfg.n_steps = static_cast<int>(std::lround(*v));
  if (auto v = number("dt"))
    cfg.sim.dt = *v;
  if (auto v = number("t_end"))
    cfg.sim.t_end = *v;
  if (auto v = number("output_stride"))
    cfg.sim.output_stride = std::lround(*v);
  cfg.sim.tau_cut = number("sim_tau_cut");
  cfg.init_S = number("init_S");
  cfg.init_R = number("init_R");
  cfg.init_E = number("init_E").value_or(cfg.init_E);
  cfg.init_A = number("init_A").value_or(cfg.init_A);
  cfg.init_I = number("init_I").value_or(cfg.init_I);
  if (auto v = list("bistab_I"))
    cfg.bistab_I = *v;
  if (auto v = number("quad_rel_tol"))
    cfg.quad.rel_tol = *v;
  cfg.quad.tau_cut = number("quad_tau_cut");
  if (auto v = number("quad_panel_width"))
    cfg.quad.panel_width = *v;
  if (auto v = number("quad_order"))
    cfg.quad.order = static_cast<int>(std::lround(*v));
  if (auto v = number("quad_max_refinements"))
    cfg.quad.max_refinements = static_cast<int>(std::lround(*v));

  if (!entries.empty()) {
    const auto& [key, e] = *entries.begin();
    fail(e.line, 1, "unknown key " + key);
  }

  validate_params(p);
  validate_quad_config(cfg.quad, p.kernel);
  validate_sim_config(p, cfg.sim);
  if (!(cfg.r0_lo <= cfg.r0_hi))
    throw ParameterError("r0_lo", "r0_lo out of range");
  if (cfg.n_steps != 0 && cfg.n_steps < 2)
    throw ParameterError("n_steps", "n_steps out of range");
  for (double v : {cfg.init_E, cfg.init_A, cfg.init_I, cfg.init_S.value_or(0.0), cfg.init_R.value_or(0.0)})
    if (!(v >= 0.0))
      throw ParameterError("init", "initial compartments must be non-negative");
  return cfg;
}

inline RunConfig load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// Text that parse_config maps back to an identical RunConfig.
inline std::string serialize(const RunConfig& cfg)
{
  using detail::format_exact;
  std::ostringstream os;
  auto put = [&](const std::string& k, double v) { os << k << " = " << format_exact(v) << "\n"; };
  auto put_list = [&](const std::string& k, const std::vector<double>& v) {
    os << k << " =";
    for (std::size_t i = 0; i < v.size(); ++i)
      os << (i ? ", " : " ") << format_exact(v[i]);
    os << "\n";
  };
  const auto& p = cfg.params;
  put("Lambda", p.Lambda);
  put("beta_s", p.beta_s);
  put("bar_beta", p.bar_beta);
  put("theta", p.theta);
  put("epsilon", p.epsilon);
  put("u", p.u);
  put("mu", p.mu);
  put("alpha", p.alpha);
  put("sigma", p.sigma);
  put("rho", p.rho);
  put("gamma_A", p.gamma_A);
  put("gamma_I", p.gamma_I);
  if (p.kernel.is_tabulated()) {
    put_list("kernel_ages", p.kernel.table_ages());
    put_list("kernel_values", p.kernel.table_values());
  }
  else {
    put("eta", p.kernel.eta());
    put("gamma_w", p.kernel.gamma_w());
    put("tau_hat", p.kernel.tau_hat());
  }
  put("r0_lo", cfg.r0_lo);
  put("r0_hi", cfg.r0_hi);
  put("n_steps", cfg.n_steps);
  put("dt", cfg.sim.dt);
  put("t_end", cfg.sim.t_end);
  put("output_stride", static_cast<double>(cfg.sim.output_stride));
  if (cfg.sim.tau_cut)
    put("sim_tau_cut", *cfg.sim.tau_cut);
  if (cfg.init_S)
    put("init_S", *cfg.init_S);
  if (cfg.init_R)
    put("init_R", *cfg.init_R);
  put("init_E", cfg.init_E);
  put("init_A", cfg.init_A);
  put("init_I", cfg.init_I);
  put_list("bistab_I", cfg.bistab_I);
  put("quad_rel_tol", cfg.quad.rel_tol);
  if (cfg.quad.tau_cut)
    put("quad_tau_cut", *cfg.quad.tau_cut);
  put("quad_panel_width", cfg.quad.panel_width);
  put("quad_order", cfg.quad.order);
  put("quad_max_refinements", cfg.quad.max_refinements);
  return os.str();
}

}  // namespace waning

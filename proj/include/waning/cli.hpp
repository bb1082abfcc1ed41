#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include <json.hpp>

#include "waning/config.hpp"
#include "waning/continuation.hpp"
#include "waning/ls_oracle.hpp"
#include "waning/model.hpp"
#include "waning/output.hpp"
#include "waning/simulator.hpp"

namespace waning {

struct CommandOptions
{
  std::filesystem::path out_dir = ".";
  bool label_stability = false;
};

inline SimState configured_initial_state(const RunConfig& cfg, double I0)
{
  const auto& p = cfg.params;
  return initial_state(p, cfg.sim, cfg.init_S.value_or(dfe(p).S0), cfg.init_E, cfg.init_A, I0, cfg.init_R);
}

namespace detail {

inline void command_summary(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out)
{
  const auto& p = cfg.params;
  const auto s = classify(p, cfg.quad);
  const double a_ls = ls::coeff_a_ls(p, cfg.quad);
  const double tv = ls::transversality(p, cfg.quad);
  const auto line = reproduction_line(p, cfg.quad);

  out << "R0 = " << fmt(s.r0_value) << "\n"
      << "R0_at_zero_reinfection = " << fmt(line.intercept) << "\n"
      << "bar_beta_star = " << fmt(s.beta_star) << "\n"
      << "a = " << fmt(s.a_coeff) << "\n"
      << "a_ls = " << fmt(a_ls) << "\n"
      << "transversality = " << fmt(tv) << "\n"
      << "criticality = " << to_string(s.criticality) << "\n";

  auto num = [](double v) { return std::stod(fmt(v)); };
  nlohmann::ordered_json j;
  j["beta_s"] = num(p.beta_s);
  j["bar_beta"] = num(p.bar_beta);
  j["R0"] = num(s.r0_value);
  j["R0_at_zero_reinfection"] = num(line.intercept);
  j["bar_beta_star"] = num(s.beta_star);
  j["a"] = num(s.a_coeff);
  j["a_ls"] = num(a_ls);
  j["transversality"] = num(tv);
  j["criticality"] = to_string(s.criticality);
  write_file(opt.out_dir / "summary.json", j.dump(2) + "\n");
}

inline void command_equilibria(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out)
{
  const auto& p = cfg.params;
  EquilibriumOptions eo;
  eo.quad = cfg.quad;
  const auto eqs = find_equilibria(p, p.bar_beta, eo);
  const auto csv = equilibria_csv(eqs, p.bar_beta, r0(p, p.bar_beta, cfg.quad));
  out << csv;
  write_file(opt.out_dir / "equilibria.csv", csv);
}

inline void command_branch(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out)
{
  const auto& p = cfg.params;
  ContinuationOptions co;
  co.eq.quad = cfg.quad;
  const int n = cfg.n_steps ? cfg.n_steps : default_steps(cfg.r0_lo, cfg.r0_hi);
  auto branch = trace_branch(p, cfg.r0_lo, cfg.r0_hi, n, co);
  if (opt.label_stability)
    branch = label_stability(branch, p, cfg.sim);
  write_file(opt.out_dir / "branch.csv", branch_csv(branch));
  write_file(opt.out_dir / "branch.folds.csv", folds_csv(branch));
  out << "points = " << branch.points.size() << "\n";
  for (const auto& f : branch.folds)
    out << "fold R0 = " << fmt(f.r0_value) << " lambda = " << fmt(f.eq.lam) << " I = " << fmt(f.eq.I) << "\n";
}

inline void command_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out)
{
  const auto& p = cfg.params;
  const auto traj = integrate(p, p.bar_beta, configured_initial_state(cfg, cfg.init_I), cfg.sim);
  write_file(opt.out_dir / "trajectory.csv", trajectory_csv(traj));
  const auto& f = traj.back();
  out << "t = " << fmt(f.t) << " S = " << fmt(f.S) << " E = " << fmt(f.E) << " A = " << fmt(f.A)
      << " I = " << fmt(f.I) << " N = " << fmt(f.N()) << "\n";
}

inline void command_bistab(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out)
{
  const auto& p = cfg.params;
  std::vector<SimState> inits;
  for (double I0 : cfg.bistab_I)
    inits.push_back(configured_initial_state(cfg, I0));
  EquilibriumOptions eo;
  eo.quad = cfg.quad;
  const auto rows = bistability_experiment(p, p.bar_beta, inits, cfg.sim, 1e-2, eo);
  const auto csv = bistability_csv(rows);
  out << csv;
  write_file(opt.out_dir / "bistab.csv", csv);
}

}  // namespace detail

/// Runs one command; library errors propagate as exceptions.
inline void run_command(const std::string& cmd, const RunConfig& cfg, const CommandOptions& opt, std::ostream& out)
{
  std::filesystem::create_directories(opt.out_dir);
  if (cmd == "summary")
    detail::command_summary(cfg, opt, out);
  else if (cmd == "equilibria")
    detail::command_equilibria(cfg, opt, out);
  else if (cmd == "branch")
    detail::command_branch(cfg, opt, out);
  else if (cmd == "simulate")
    detail::command_simulate(cfg, opt, out);
  else if (cmd == "bistab")
    detail::command_bistab(cfg, opt, out);
  else
    throw Error("unknown command " + cmd);
}

}  // namespace waning

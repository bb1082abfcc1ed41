#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "waning/equilibrium.hpp"
#include "waning/errors.hpp"
#include "waning/params.hpp"

namespace waning {

struct SimConfig
{
  double dt = 0.1;
  double t_end = 20000.0;
  std::optional<double> tau_cut;  ///< default: kernel saturation age
  long output_stride = 1000;      ///< steps between stored snapshots
};

/// Dynamic state. r_grid holds cell-average densities on [j dtau, (j+1) dtau).
struct SimState
{
  double t = 0.0;
  double S = 0.0, E = 0.0, A = 0.0, I = 0.0;
  std::vector<double> r_grid;
  double r_tail = 0.0;
  double dtau = 0.0;

  double immune() const
  {
    double s = 0.0;
    for (double v : r_grid)
      s += v;
    return dtau * s + r_tail;
  }
  double N() const { return S + E + A + I + immune(); }
  double infected() const { return E + A + I; }
};

inline double sim_tau_cut(const ModelParams& p, const SimConfig& cfg)
{
  return cfg.tau_cut ? *cfg.tau_cut : p.kernel.saturation_age();
}

inline void validate_sim_config(const ModelParams& p, const SimConfig& cfg)
{
  if (!(cfg.dt > 0.0))
    throw ParameterError("dt", "dt must be positive");
  if (!(cfg.t_end >= 0.0))
    throw ParameterError("t_end", "t_end out of range");
  if (cfg.output_stride < 1)
    throw ParameterError("output_stride", "output_stride must be positive");
  const double tc = sim_tau_cut(p, cfg);
  if (!(tc >= cfg.dt) || tc < p.kernel.saturation_age() - 1e-9)
    throw ParameterError("tau_cut", "tau_cut out of range");
}

/// Exact cell averages of the disease-free profile, exact remainder in the tail.
inline SimState dfe_state(const ModelParams& p, const SimConfig& cfg = {})
{
  validate_sim_config(p, cfg);
  const auto d = dfe(p);
  const double dt = cfg.dt;
  const auto n = static_cast<std::size_t>(std::llround(sim_tau_cut(p, cfg) / dt));
  SimState s;
  s.dtau = dt;
  s.S = d.S0;
  s.r_grid.resize(n);
  const double cell = -std::expm1(-p.u * dt) / (p.u * dt);
  for (std::size_t j = 0; j < n; ++j)
    s.r_grid[j] = d.r0_at_zero * cell * std::exp(-p.u * dt * j);
  s.r_tail = d.r0_at_zero * std::exp(-p.u * dt * n) / p.u;
  return s;
}

/// Discretized equilibrium: midpoint samples of r, analytic remainder beyond the grid.
inline SimState state_from_equilibrium(const Equilibrium& eq, const ModelParams& p, const SimConfig& cfg = {})
{
  validate_sim_config(p, cfg);
  const double dt = cfg.dt;
  const auto n = static_cast<std::size_t>(std::llround(sim_tau_cut(p, cfg) / dt));
  SimState s;
  s.dtau = dt;
  s.S = eq.S;
  s.E = eq.E;
  s.A = eq.A;
  s.I = eq.I;
  s.r_grid.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    s.r_grid[j] = eq.r((j + 0.5) * dt);
  const double T = n * dt;
  s.r_tail = eq.r(T) / (p.u + eq.bar_beta * eq.lam * p.kernel.value(T));
  return s;
}

/**
 * DFE-shaped immune profile scaled to R_total (default: the DFE total) with
 * the requested compartment sizes.
 */
inline SimState initial_state(const ModelParams& p, const SimConfig& cfg, double S, double E, double A, double I,
                              std::optional<double> R_total = std::nullopt)
{
  auto s = dfe_state(p, cfg);
  if (R_total) {
    const double have = s.immune();
    const double f = have > 0.0 ? *R_total / have : 0.0;
    for (auto& v : s.r_grid)
      v *= f;
    s.r_tail *= f;
  }
  s.S = S;
  s.E = E;
  s.A = A;
  s.I = I;
  return s;
}

/**
 * Method of characteristics with dtau = dt. Each cell moves one cell per step
 * and decays by exp(-(bar_beta beta_r0 lam + u) dt); cells leaving the grid
 * merge into a saturated tail. The scalar block advances by explicit
 * midpoint with the reinfection flux of the step held constant.
 */
class Simulator
{
 public:
  Simulator(ModelParams p, double bar_beta, SimConfig cfg = {})
      : p_(std::move(p))
      , bar_beta_(bar_beta)
      , cfg_(cfg)
  {
    validate_sim_config(p_, cfg_);
    if (!(bar_beta_ >= 0.0))
      throw ParameterError("bar_beta", "bar_beta out of range");
    n_ = static_cast<std::size_t>(std::llround(sim_tau_cut(p_, cfg_) / cfg_.dt));
    beta_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j)
      beta_[j] = p_.kernel.value((j + 1) * cfg_.dt);
    beta_tail_ = p_.kernel.value(n_ * cfg_.dt);
    beta_zero_ = p_.kernel.value(0.0);
    decay_.resize(n_);
    lowest_cap_ = std::max(0.0, p_.Lambda / p_.u);
  }

  const ModelParams& params() const { return p_; }
  double bar_beta() const { return bar_beta_; }
  const SimConfig& config() const { return cfg_; }
  std::size_t cells() const { return n_; }

  /// (alpha S + gamma_A A + gamma_I I) dt of the last step.
  double last_boundary_inflow() const { return last_inflow_; }

  void check_state(const SimState& s) const
  {
    if (s.r_grid.size() != n_ || std::abs(s.dtau - cfg_.dt) > 1e-12 * cfg_.dt)
      throw SimulationError("state grid does not match the simulation grid");
    auto bad = [](double v) { return !(v >= 0.0) || !std::isfinite(v); };
    std::string which;
    if (bad(s.S))
      which = "S";
    else if (bad(s.E))
      which = "E";
    else if (bad(s.A))
      which = "A";
    else if (bad(s.I))
      which = "I";
    else if (bad(s.r_tail))
      which = "r_tail";
    else
      for (std::size_t j = 0; j < n_; ++j)
        if (bad(s.r_grid[j])) {
          which = "r_grid[" + std::to_string(j) + "]";
          break;
        }
    if (!which.empty()) {
      std::ostringstream os;
      os << "negative or non-finite " << which << " at t=" << s.t;
      throw SimulationError(os.str());
    }
  }

  void step(SimState& s)
  {
    const double dt = cfg_.dt;
    const double R = s.immune();
    const double N = s.S + s.E + s.A + s.I + R;
    const double lam = N > 0.0 ? (p_.theta * s.E + p_.epsilon * s.A + s.I) / N : 0.0;

    // immune losses over the step, split into reinfection and death
    double reinfected = 0.0;
    double prev_beta = -1.0, f = 1.0, fr = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (beta_[j] != prev_beta) {
        prev_beta = beta_[j];
        const double inf = bar_beta_ * prev_beta * lam;
        f = std::exp(-(inf + p_.u) * dt);
        fr = inf / (inf + p_.u);
      }
      decay_[j] = f;
      reinfected += s.r_grid[j] * dt * (1.0 - f) * fr;
    }
    const double inf_tail = bar_beta_ * beta_tail_ * lam;
    const double f_tail = std::exp(-(inf_tail + p_.u) * dt);
    reinfected += s.r_tail * (1.0 - f_tail) * inf_tail / (inf_tail + p_.u);
    const double q = reinfected / dt;

    auto rhs = [&](const std::array<double, 4>& y) {
      const double n = y[0] + y[1] + y[2] + y[3] + R;
      const double l = n > 0.0 ? (p_.theta * y[1] + p_.epsilon * y[2] + y[3]) / n : 0.0;
      return std::array<double, 4>{
          p_.Lambda - p_.beta_s * l * y[0] - (p_.alpha + p_.u) * y[0],
          p_.beta_s * l * y[0] + q - (p_.sigma + p_.u) * y[1],
          (1.0 - p_.rho) * p_.sigma * y[1] - (p_.gamma_A + p_.u) * y[2],
          p_.rho * p_.sigma * y[1] - (p_.gamma_I + p_.mu + p_.u) * y[3],
      };
    };
    const std::array<double, 4> y0{s.S, s.E, s.A, s.I};
    const auto k1 = rhs(y0);
    std::array<double, 4> yh;
    for (int i = 0; i < 4; ++i)
      yh[i] = y0[i] + 0.5 * dt * k1[i];
    const auto k2 = rhs(yh);

    // newborn cell: inflow at the half step, decaying during its first step
    last_inflow_ = (p_.alpha * yh[0] + p_.gamma_A * yh[2] + p_.gamma_I * yh[3]) * dt;
    const double inf0 = bar_beta_ * beta_zero_ * lam;
    const double k0 = inf0 + p_.u;
    const double kept = -std::expm1(-k0 * dt) / (k0 * dt);
    const double newborn = last_inflow_ * kept;
    const double newborn_reinfected = last_inflow_ * (1.0 - kept) * inf0 / k0;

    s.r_tail = s.r_tail * f_tail + s.r_grid[n_ - 1] * decay_[n_ - 1] * dt;
    for (std::size_t j = n_ - 1; j > 0; --j)
      s.r_grid[j] = s.r_grid[j - 1] * decay_[j - 1];
    s.r_grid[0] = newborn / dt;

    s.S = y0[0] + dt * k2[0];
    s.E = y0[1] + dt * k2[1] + newborn_reinfected;
    s.A = y0[2] + dt * k2[2];
    s.I = y0[3] + dt * k2[3];
    s.t += dt;

    check_state(s);
  }

  /**
   * Advances to t_end (relative to the initial time), storing a snapshot
   * every output_stride steps plus the final state. The observer, if any,
   * sees every step.
   */
  std::vector<SimState> integrate(SimState s, const std::function<bool(const SimState&)>& observer = {})
  {
    check_state(s);
    const double cap = std::max(s.N(), lowest_cap_) * (1.0 + 1e-9);
    const long steps = std::lround(cfg_.t_end / cfg_.dt);
    std::vector<SimState> out{s};
    for (long n = 1; n <= steps; ++n) {
      step(s);
      if (s.N() > cap) {
        std::ostringstream os;
        os << "population bound violated at t=" << s.t << ": N=" << s.N();
        throw SimulationError(os.str());
      }
      const bool keep_going = !observer || observer(s);
      if (n % cfg_.output_stride == 0 || n == steps || !keep_going)
        out.push_back(s);
      if (!keep_going)
        break;
    }
    return out;
  }

 private:
  ModelParams p_;
  double bar_beta_;
  SimConfig cfg_;
  std::size_t n_ = 0;
  std::vector<double> beta_, decay_;
  double beta_tail_ = 0.0, beta_zero_ = 0.0, lowest_cap_ = 0.0;
  double last_inflow_ = 0.0;
};

inline std::vector<SimState> integrate(const ModelParams& p, double bar_beta, const SimState& init,
                                       const SimConfig& cfg = {},
                                       const std::function<bool(const SimState&)>& observer = {})
{
  Simulator sim(p, bar_beta, cfg);
  return sim.integrate(init, observer);
}

/// Max relative deviation of (E, A, I) from an equilibrium.
inline double infected_distance(const SimState& s, const Equilibrium& eq)
{
  return std::max({std::abs(s.E - eq.E) / eq.E, std::abs(s.A - eq.A) / eq.A, std::abs(s.I - eq.I) / eq.I});
}

enum class ProbeResult
{
  Stable,
  Unstable,
  Inconclusive
};

inline std::string to_string(ProbeResult r)
{
  switch (r) {
    case ProbeResult::Stable: return "Stable";
    case ProbeResult::Unstable: return "Unstable";
    default: return "Inconclusive";
  }
}

struct ProbeConfig
{
  double delta = 1e-3;
  double inner = 10.0;   ///< re-entry ball, in units of delta
  double outer = 100.0;  ///< exit ball, in units of delta
  double settle_fraction = 0.1;
};

/**
 * Perturbs E by +-delta (relative) and integrates both runs. Endemic states
 * are judged by relative distance in (E, A, I). The disease-free state gets a
 * single kick E = delta 1e-6 N and is judged by E + A + I against the kick.
 */
inline ProbeResult stability_probe(const Equilibrium& eq, const ModelParams& p, double bar_beta,
                                   const SimConfig& cfg = {}, const ProbeConfig& probe = {})
{
  const bool disease_free = eq.infected() <= 0.0;
  const double kick = probe.delta * 1e-6 * eq.N;
  const double settle_from = cfg.t_end * (1.0 - probe.settle_fraction);
  // deviation in units of the initial perturbation
  auto deviation = [&](const SimState& s) {
    return disease_free ? s.infected() / kick : infected_distance(s, eq) / probe.delta;
  };
  bool all_settled = true;
  for (double sign : {1.0, -1.0}) {
    SimState init;
    if (disease_free) {
      if (sign < 0.0)
        continue;
      init = dfe_state(p, cfg);
      init.E = kick;
    }
    else {
      init = state_from_equilibrium(eq, p, cfg);
      init.E *= 1.0 + sign * probe.delta;
    }
    bool exited = false, settled = true;
    Simulator sim(p, bar_beta, cfg);
    sim.integrate(init, [&](const SimState& s) {
      const double d = deviation(s);
      if (d > probe.outer) {
        exited = true;
        return false;
      }
      if (s.t >= settle_from && d > probe.inner)
        settled = false;
      return true;
    });
    if (exited)
      return ProbeResult::Unstable;
    all_settled = all_settled && settled;
  }
  return all_settled ? ProbeResult::Stable : ProbeResult::Inconclusive;
}

struct BistabilityOutcome
{
  SimState init;
  SimState final_state;
  std::string label;  ///< "DFE", "EE<k>" (index into the equilibria), or "Unresolved"
  int equilibrium_index = -1;
  double distance = 0.0;
};

/**
 * Integrates each init to t_end and names the equilibrium it ends near:
 * an endemic one within `tol` relative distance in (E, A, I), or the DFE when
 * E + A + I is below `tol` of the smallest endemic level (1e-8 N if none).
 */
inline std::vector<BistabilityOutcome> bistability_experiment(const ModelParams& p, double bar_beta,
                                                              const std::vector<SimState>& inits,
                                                              const SimConfig& cfg = {}, double tol = 1e-2,
                                                              const EquilibriumOptions& eopt = {})
{
  const auto eqs = find_equilibria(p, bar_beta, eopt);
  std::vector<BistabilityOutcome> out;
  for (const auto& init : inits) {
    BistabilityOutcome o;
    o.init = init;
    o.final_state = integrate(p, bar_beta, init, cfg).back();
    const auto& f = o.final_state;
    double best = INFINITY;
    for (std::size_t k = 0; k < eqs.size(); ++k) {
      const double d = infected_distance(f, eqs[k]);
      if (d < best) {
        best = d;
        o.equilibrium_index = static_cast<int>(k);
      }
    }
    const double dfe_level = eqs.empty() ? 1e-8 * f.N() : tol * eqs.front().infected();
    if (f.infected() < dfe_level) {
      o.label = "DFE";
      o.equilibrium_index = -1;
      o.distance = f.infected() / f.N();
    }
    else if (best <= tol) {
      o.label = "EE" + std::to_string(o.equilibrium_index);
      o.distance = best;
    }
    else {
      o.label = "Unresolved";
      o.equilibrium_index = -1;
      o.distance = best;
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace waning

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "waning/errors.hpp"
#include "waning/model.hpp"
#include "waning/params.hpp"
#include "waning/quadrature.hpp"

namespace waning {

/// Stationary state of the full system.
struct Equilibrium
{
  double S = 0.0, E = 0.0, A = 0.0, I = 0.0;
  double lam = 0.0;  ///< (theta E + epsilon A + I) / N
  double r_at_zero = 0.0;
  double R_total = 0.0;
  double N = 0.0;
  double bar_beta = 0.0;
  double u = 0.0;
  ImmunityKernel kernel;

  /// Immune density at age tau.
  double r(double tau) const
  {
    return r_at_zero * std::exp(-u * tau - bar_beta * lam * kernel.cumulative(tau));
  }

  double infected() const { return E + A + I; }
};

/// The disease-free state as an Equilibrium record (lam = 0).
inline Equilibrium as_equilibrium(const ModelParams& p, double bar_beta = 0.0)
{
  const auto d = dfe(p);
  Equilibrium eq;
  eq.S = d.S0;
  eq.r_at_zero = d.r0_at_zero;
  eq.R_total = d.r0_at_zero / p.u;
  eq.N = d.N0;
  eq.bar_beta = bar_beta;
  eq.u = p.u;
  eq.kernel = p.kernel;
  return eq;
}

struct EquilibriumOptions
{
  double lam_min = 1e-12;
  int scan_nodes = 2000;
  double polish_rel = 1e-12;
  double dedup_rel = 1e-9;
  QuadConfig quad;
};

/**
 * Stationary problem reduced to the force-of-infection factor lam.
 *
 * For fixed lam the latent/infectious compartments are proportional to E,
 * S = Lambda / (beta_s lam + alpha + u), and the immune profile is
 * r(0) exp(-u tau - bar_beta lam B(tau)). E is eliminated through
 * lam N = K E, leaving one scalar equation (the E balance).
 */
class StationaryProblem
{
 public:
  explicit StationaryProblem(ModelParams p, const QuadConfig& cfg = {})
      : p_(std::move(p))
      , quad_(p_.kernel, cfg)
  {
    kA_ = (1.0 - p_.rho) * p_.sigma / (p_.gamma_A + p_.u);
    kI_ = p_.rho * p_.sigma / (p_.gamma_I + p_.mu + p_.u);
    c_gamma_ = p_.gamma_A * kA_ + p_.gamma_I * kI_;
    K_ = p_.theta + p_.epsilon * kA_ + kI_;
  }

  const ModelParams& params() const { return p_; }
  const AgeQuadrature& quadrature() const { return quad_; }

  /// K - lam (1 + kA + kI + c_gamma Phi); E > 0 iff this is positive.
  double elimination_denominator(double lam, double bar_beta) const
  {
    const auto si = survival_integrals(quad_, p_.u, bar_beta * lam);
    return denominator(lam, si);
  }

  /// E-balance residual (individuals/day); throws when E cannot be eliminated.
  double residual(double lam, double bar_beta) const
  {
    if (!(lam > 0.0 && lam <= 1.0))
      throw ParameterError("lam", "lam must lie in (0, 1]");
    const auto si = survival_integrals(quad_, p_.u, bar_beta * lam);
    const double den = denominator(lam, si);
    if (!(den > 0.0))
      throw Error("lam beyond feasible range");
    const double S = susceptibles(lam);
    const double E = lam * S * (1.0 + p_.alpha * si.Phi) / den;
    const double r_zero = p_.alpha * S + c_gamma_ * E;
    return (p_.beta_s * S + bar_beta * r_zero * si.Psi) * lam - (p_.sigma + p_.u) * E;
  }

  /**
   * residual / ((sigma+u) E), written without forming E so it stays finite
   * across the elimination pole. Tends to R0 - 1 as lam -> 0.
   */
  double normalized_residual(double lam, double bar_beta) const
  {
    const auto si = survival_integrals(quad_, p_.u, bar_beta * lam);
    return normalized(lam, bar_beta, si);
  }

  Equilibrium reconstruct(double lam, double bar_beta) const
  {
    const auto si = survival_integrals(quad_, p_.u, bar_beta * lam);
    const double den = denominator(lam, si);
    if (!(den > 0.0))
      throw Error("lam beyond feasible range");
    Equilibrium eq;
    eq.lam = lam;
    eq.S = susceptibles(lam);
    eq.E = lam * eq.S * (1.0 + p_.alpha * si.Phi) / den;
    eq.A = kA_ * eq.E;
    eq.I = kI_ * eq.E;
    eq.r_at_zero = p_.alpha * eq.S + p_.gamma_A * eq.A + p_.gamma_I * eq.I;
    eq.R_total = eq.r_at_zero * si.Phi;
    eq.N = eq.S + eq.E + eq.A + eq.I + eq.R_total;
    eq.bar_beta = bar_beta;
    eq.u = p_.u;
    eq.kernel = p_.kernel;
    return eq;
  }

  /// All endemic equilibria at bar_beta, ordered by lam.
  std::vector<Equilibrium> find(double bar_beta, const EquilibriumOptions& opt = {}) const
  {
    std::vector<Equilibrium> out;
    const int n = std::max(2, opt.scan_nodes);
    const double log_lo = std::log(opt.lam_min);
    std::vector<double> lam(n), g(n);
    std::vector<bool> feasible(n);
    for (int i = 0; i < n; ++i) {
      lam[i] = (i + 1 == n) ? 1.0 : std::exp(log_lo * (1.0 - static_cast<double>(i) / (n - 1)));
      const auto si = survival_integrals(quad_, p_.u, bar_beta * lam[i]);
      feasible[i] = denominator(lam[i], si) > 0.0;
      g[i] = feasible[i] ? normalized(lam[i], bar_beta, si) : 0.0;
    }
    for (int i = 0; i + 1 < n; ++i) {
      if (!feasible[i] || !feasible[i + 1])
        continue;
      double root;
      if (g[i] == 0.0)
        root = lam[i];
      else if (g[i + 1] == 0.0)
        continue;  // picked up as the left end of the next interval
      else if ((g[i] < 0.0) != (g[i + 1] < 0.0))
        root = polish(lam[i], lam[i + 1], g[i], bar_beta, opt.polish_rel);
      else
        continue;
      if (!out.empty() && std::abs(root - out.back().lam) <= opt.dedup_rel * root)
        continue;
      out.push_back(reconstruct(root, bar_beta));
    }
    if (feasible[n - 1] && g[n - 1] == 0.0
        && (out.empty() || std::abs(1.0 - out.back().lam) > opt.dedup_rel))
      out.push_back(reconstruct(1.0, bar_beta));
    return out;
  }

  /**
   * bar_beta >= 0 for which lam is a stationary force of infection, by
   * bisection at fixed lam. Empty if none exists (or it would be negative).
   */
  std::optional<double> bar_beta_at(double lam, double rel_tol = 1e-15) const
  {
    auto G = [&](double bb) { return normalized_residual(lam, bb); };
    const double g0 = G(0.0);
    if (g0 >= 0.0)
      return g0 == 0.0 ? std::optional<double>(0.0) : std::nullopt;
    double lo = 0.0, hi = 1e-3;
    while (G(hi) < 0.0) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e8)
        return std::nullopt;
    }
    while (hi - lo > rel_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi)
        break;
      (G(mid) < 0.0 ? lo : hi) = mid;
    }
    const double bb = 0.5 * (lo + hi);
    if (!(elimination_denominator(lam, bb) > 0.0))
      return std::nullopt;
    return bb;
  }

 private:
  double susceptibles(double lam) const { return p_.Lambda / (p_.beta_s * lam + p_.alpha + p_.u); }

  double denominator(double lam, const SurvivalIntegrals& si) const
  {
    return K_ - lam * (1.0 + kA_ + kI_ + c_gamma_ * si.Phi);
  }

  double normalized(double lam, double bar_beta, const SurvivalIntegrals& si) const
  {
    const double den = denominator(lam, si);
    const double inflow = (p_.beta_s + bar_beta * p_.alpha * si.Psi) * den / (1.0 + p_.alpha * si.Phi)
                          + bar_beta * c_gamma_ * si.Psi * lam;
    return inflow / (p_.sigma + p_.u) - 1.0;
  }

  double polish(double lo, double hi, double g_lo, double bar_beta, double rel) const
  {
    const bool lo_negative = g_lo < 0.0;
    while (hi - lo > rel * lo) {
      const double mid = std::sqrt(lo * hi);
      if (mid <= lo || mid >= hi)
        break;
      const double gm = normalized_residual(mid, bar_beta);
      if (gm == 0.0)
        return mid;
      ((gm < 0.0) == lo_negative ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  ModelParams p_;
  AgeQuadrature quad_;
  double kA_ = 0.0, kI_ = 0.0, c_gamma_ = 0.0, K_ = 0.0;
};

inline double residual(double lam, const ModelParams& p, double bar_beta, const QuadConfig& cfg = {})
{
  return StationaryProblem(p, cfg).residual(lam, bar_beta);
}

inline std::vector<Equilibrium> find_equilibria(const ModelParams& p, double bar_beta,
                                                const EquilibriumOptions& opt = {})
{
  return StationaryProblem(p, opt.quad).find(bar_beta, opt);
}

/**
 * Max relative residual of the five stationary equations, the boundary
 * condition, and the bookkeeping identities (N, R_total, lam). The transport
 * equation is checked at sampled ages via the exact log-derivative of the profile.
 */
inline double verify_equilibrium(const Equilibrium& eq, const ModelParams& p, double bar_beta,
                                 const QuadConfig& cfg = {})
{
  auto rel = [](std::initializer_list<double> terms) {
    double sum = 0.0, mag = 0.0;
    for (double t : terms) {
      sum += t;
      mag += std::abs(t);
    }
    return mag > 0.0 ? std::abs(sum) / mag : 0.0;
  };

  const AgeQuadrature quad(p.kernel, cfg);
  const auto si = survival_integrals(quad, p.u, bar_beta * eq.lam);
  const double lam_c = eq.N > 0.0 ? (p.theta * eq.E + p.epsilon * eq.A + eq.I) / eq.N : 0.0;
  const double reinfection = bar_beta * eq.r_at_zero * si.Psi;

  double worst = 0.0;
  auto take = [&worst](double v) { worst = std::max(worst, std::isfinite(v) ? v : 1.0); };
  take(rel({p.Lambda, -p.beta_s * eq.S * lam_c, -(p.alpha + p.u) * eq.S}));
  take(rel({p.beta_s * eq.S * lam_c, reinfection * lam_c, -(p.sigma + p.u) * eq.E}));
  take(rel({(1.0 - p.rho) * p.sigma * eq.E, -(p.gamma_A + p.u) * eq.A}));
  take(rel({p.rho * p.sigma * eq.E, -(p.gamma_I + p.mu + p.u) * eq.I}));
  take(rel({eq.r_at_zero, -p.alpha * eq.S, -p.gamma_A * eq.A, -p.gamma_I * eq.I}));
  take(rel({eq.N, -eq.S, -eq.E, -eq.A, -eq.I, -eq.R_total}));
  take(rel({eq.R_total, -eq.r_at_zero * si.Phi}));
  take(rel({eq.lam, -lam_c}));

  const double T = quad.tau_cut();
  for (int k = 0; k <= 64; ++k) {
    const double tau = 3.0 * T * k / 64.0;
    const double beta = p.kernel.value(tau);
    const double dlog_r = -(p.u + bar_beta * eq.lam * beta);
    take(rel({dlog_r, bar_beta * beta * lam_c, p.u}));
  }
  return worst;
}

}  // namespace waning

#pragma once

#include <cmath>
#include <string_view>

#include "waning/errors.hpp"
#include "waning/params.hpp"
#include "waning/quadrature.hpp"

namespace waning {

struct DiseaseFreeEquilibrium
{
  double S0 = 0.0;
  double r0_at_zero = 0.0;
  double N0 = 0.0;
  double u = 0.0;

  /// Immune density by age, r0_at_zero * exp(-u tau).
  double r0(double tau) const { return r0_at_zero * std::exp(-u * tau); }
};

inline DiseaseFreeEquilibrium dfe(const ModelParams& p)
{
  DiseaseFreeEquilibrium d;
  d.u = p.u;
  d.S0 = p.Lambda / (p.alpha + p.u);
  d.r0_at_zero = p.alpha * p.Lambda / (p.alpha + p.u);
  d.N0 = d.S0 * (1.0 + p.alpha / p.u);
  return d;
}

/// R0 as an affine function of bar_beta: intercept + slope * bar_beta.
struct ReproductionLine
{
  double intercept = 0.0;
  double slope = 0.0;

  double at(double bar_beta) const { return intercept + slope * bar_beta; }
};

inline ReproductionLine reproduction_line(const ModelParams& p, double J0)
{
  const auto d = dfe(p);
  const double scale = infectiousness_sum(p) / ((p.sigma + p.u) * d.N0);
  return {p.beta_s * d.S0 * scale, J0 * d.r0_at_zero * scale};
}

inline ReproductionLine reproduction_line(const ModelParams& p, const QuadConfig& cfg = {})
{
  return reproduction_line(p, moment_integrals(p.kernel, p.u, cfg).J0);
}

inline double r0(const ModelParams& p, double bar_beta, const QuadConfig& cfg = {})
{
  if (!(bar_beta >= 0.0))
    throw ParameterError("bar_beta", "bar_beta must be non-negative");
  return reproduction_line(p, cfg).at(bar_beta);
}

inline double beta_star(const ReproductionLine& line)
{
  if (line.intercept >= 1.0)
    throw Error("R0 >= 1 already at bar_beta = 0");
  if (!(line.slope > 0.0))
    throw Error("R0 does not depend on bar_beta (no immune class at the disease-free state)");
  return (1.0 - line.intercept) / line.slope;
}

/// bar_beta at which R0 = 1, by inverting the affine dependence.
inline double beta_star(const ModelParams& p, const QuadConfig& cfg = {})
{
  return beta_star(reproduction_line(p, cfg));
}

/**
 * Quadratic coefficient of the reduced bifurcation equation at (DFE, bar_beta*).
 * Positive means backward, negative forward.
 *
 * The factor multiplying (beta_s + alpha bar_beta* J0) is the total mass of the
 * kernel eigenvector, x1 + x2 + x3 + x4 + int x5 collapsed to
 * 1 + (1-rho) sigma / u + (gamma_I + u) rho sigma / (u (gamma_I + mu + u)).
 */
inline double coeff_a(const ModelParams& p, const MomentIntegrals& m)
{
  const double bstar = beta_star(reproduction_line(p, m.J0));
  const double u = p.u, al = p.alpha, sg = p.sigma, rho = p.rho;
  const double gA = p.gamma_A, gI = p.gamma_I, mu = p.mu;
  const double K = infectiousness_sum(p);

  const double outflow = al * (sg + u) / (al + u) + gA * (1.0 - rho) * sg / (gA + u)
                         + gI * rho * sg / (gI + mu + u);
  const double mass = 1.0 + (1.0 - rho) * sg / u + (gI + u) * rho * sg / (u * (gI + mu + u));

  const double t1 = bstar * outflow * m.J0;
  const double t2 = u / (al + u) * (p.beta_s + al * bstar * m.J0) * mass;
  const double t3 = al * u / (al + u) * bstar * bstar * K * m.J1;
  return 2.0 * u / p.Lambda * K * (t1 - t2 - t3);
}

inline double coeff_a(const ModelParams& p, const QuadConfig& cfg = {})
{
  return coeff_a(p, moment_integrals(p.kernel, p.u, cfg));
}

enum class Criticality
{
  Backward,
  Forward,
  Degenerate
};

inline std::string_view to_string(Criticality c)
{
  switch (c) {
    case Criticality::Backward: return "Backward";
    case Criticality::Forward: return "Forward";
    case Criticality::Degenerate: return "Degenerate";
  }
  return "?";
}

inline Criticality criticality_of(double a, double tol_a = 1e-12)
{
  if (a > tol_a)
    return Criticality::Backward;
  if (a < -tol_a)
    return Criticality::Forward;
  return Criticality::Degenerate;
}

struct BifSummary
{
  double r0_value = 0.0;  ///< R0 at p.bar_beta
  double beta_star = 0.0;
  double a_coeff = 0.0;
  Criticality criticality = Criticality::Degenerate;
};

inline BifSummary classify(const ModelParams& p, const QuadConfig& cfg = {}, double tol_a = 1e-12)
{
  const auto m = moment_integrals(p.kernel, p.u, cfg);
  const auto line = reproduction_line(p, m.J0);
  BifSummary s;
  s.r0_value = line.at(p.bar_beta);
  s.beta_star = beta_star(line);
  s.a_coeff = coeff_a(p, m);
  s.criticality = criticality_of(s.a_coeff, tol_a);
  return s;
}

}  // namespace waning

#pragma once

#include <cmath>
#include <string>

#include "waning/errors.hpp"
#include "waning/kernel.hpp"

namespace waning {

/// Rates are per day, ages and times in days.
struct ModelParams
{
  double Lambda = 0.0;   ///< recruitment (individuals/day)
  double beta_s = 0.0;   ///< transmission to susceptibles
  double bar_beta = 0.0; ///< reinfection scale multiplying the kernel
  double theta = 1.0;    ///< relative infectiousness of latent individuals
  double epsilon = 1.0;  ///< relative infectiousness of asymptomatic individuals
  double u = 0.0;        ///< natural death
  double mu = 0.0;       ///< disease death
  double alpha = 0.0;    ///< vaccination
  double sigma = 0.0;    ///< latency progression
  double rho = 0.5;      ///< symptomatic fraction
  double gamma_A = 0.0;
  double gamma_I = 0.0;
  ImmunityKernel kernel = ImmunityKernel::waning(0.0, 1.0, 0.0);
};

/// Parameter table of the numerical study (beta_s is the regime selector).
inline ModelParams reference_params(double beta_s = 0.1)
{
  ModelParams p;
  p.Lambda = 20000.0;
  p.beta_s = beta_s;
  p.theta = 0.55;
  p.epsilon = 0.55;
  p.u = 1.0 / (75.0 * 365.0);
  p.alpha = 1e-6;
  p.sigma = 1.0 / 5.2;
  p.rho = 0.4;
  p.gamma_A = 1.0 / 14.0;
  p.gamma_I = 1.0 / 7.0;
  p.mu = 0.02;
  p.kernel = ImmunityKernel::waning(0.2, 0.5, 200.0);
  return p;
}

namespace detail {

inline void require_positive(double v, const char* name)
{
  if (!(v > 0.0) || !std::isfinite(v))
    throw ParameterError(name, std::string(name) + " must be positive");
}

inline void require_unit_interval(double v, const char* name, bool closed_right)
{
  const bool ok = closed_right ? (v > 0.0 && v <= 1.0) : (v > 0.0 && v < 1.0);
  if (!ok)
    throw ParameterError(name, std::string(name) + " out of range");
}

}  // namespace detail

/// Returns p unchanged if every documented range holds; otherwise throws a
/// ParameterError naming the first offending field.
inline ModelParams validate_params(const ModelParams& p)
{
  detail::require_positive(p.Lambda, "Lambda");
  detail::require_positive(p.beta_s, "beta_s");
  if (!(p.bar_beta >= 0.0) || !std::isfinite(p.bar_beta))
    throw ParameterError("bar_beta", "bar_beta must be non-negative");
  detail::require_unit_interval(p.theta, "theta", true);
  detail::require_unit_interval(p.epsilon, "epsilon", true);
  detail::require_positive(p.u, "u");
  detail::require_positive(p.mu, "mu");
  detail::require_positive(p.alpha, "alpha");
  detail::require_positive(p.sigma, "sigma");
  detail::require_unit_interval(p.rho, "rho", false);
  detail::require_positive(p.gamma_A, "gamma_A");
  detail::require_positive(p.gamma_I, "gamma_I");
  p.kernel.validate();
  return p;
}

/// theta + (1-rho) sigma epsilon / (gamma_A+u) + rho sigma / (gamma_I+mu+u)
inline double infectiousness_sum(const ModelParams& p)
{
  return p.theta + (1.0 - p.rho) * p.sigma * p.epsilon / (p.gamma_A + p.u)
         + p.rho * p.sigma / (p.gamma_I + p.mu + p.u);
}

}  // namespace waning

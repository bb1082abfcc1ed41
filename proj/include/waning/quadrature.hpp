#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "waning/errors.hpp"
#include "waning/gauss_legendre.hpp"
#include "waning/kernel.hpp"

namespace waning {

struct QuadConfig
{
  double rel_tol = 1e-10;
  /// Defaults to the kernel's saturation age (tau_hat + 40/gamma_w).
  std::optional<double> tau_cut;
  /// Base panel width in days; every kernel breakpoint is a panel boundary.
  double panel_width = 25.0;
  int order = 16;
  /// Number of panel doublings tried before giving up.
  int max_refinements = 6;
};

inline double resolve_tau_cut(const ImmunityKernel& k, const QuadConfig& cfg)
{
  return cfg.tau_cut.value_or(k.saturation_age());
}

inline void validate_quad_config(const QuadConfig& cfg, const ImmunityKernel& k)
{
  if (!(cfg.rel_tol > 0.0 && cfg.rel_tol <= 1e-4))
    throw ParameterError("rel_tol", "rel_tol out of range (0, 1e-4]");
  if (!(resolve_tau_cut(k, cfg) >= k.onset_age()))
    throw ParameterError("tau_cut", "tau_cut must not precede the kernel onset age");
  if (!(cfg.panel_width > 0.0))
    throw ParameterError("panel_width", "panel_width must be positive");
  if (cfg.order < 2)
    throw ParameterError("order", "quadrature order must be at least 2");
  if (cfg.max_refinements < 1)
    throw ParameterError("max_refinements", "max_refinements must be at least 1");
}

struct KernelValue
{
  double value;
  double cumulative;
};

inline KernelValue kernel_eval(const ImmunityKernel& k, double tau)
{
  if (!(tau >= 0.0))
    throw ParameterError("tau", "immune age must be non-negative");
  return {k.value(tau), k.cumulative(tau)};
}

/**
 * Composite Gauss-Legendre rules on [0, tau_cut] at successively doubled panel
 * counts, with kernel values and cumulative integrals cached at every node.
 */
class AgeQuadrature
{
 public:
  struct Level
  {
    std::vector<double> tau;
    std::vector<double> weight;
    std::vector<double> beta;
    std::vector<double> cumulative;
    std::vector<double> panel_edges;
  };

  explicit AgeQuadrature(ImmunityKernel kernel, const QuadConfig& cfg = {})
      : kernel_(std::move(kernel))
      , cfg_(cfg)
  {
    validate_quad_config(cfg_, kernel_);
    tau_cut_ = resolve_tau_cut(kernel_, cfg_);
    beta_cut_ = kernel_.value(tau_cut_);
    cumulative_cut_ = kernel_.cumulative(tau_cut_);

    std::vector<double> edges{0.0};
    for (double b : kernel_.breakpoints(tau_cut_))
      edges.push_back(b);
    if (tau_cut_ > 0.0)
      edges.push_back(tau_cut_);

    const GaussLegendreRule rule(cfg_.order);
    for (int lvl = 0; lvl <= cfg_.max_refinements; ++lvl) {
      Level L;
      L.panel_edges.push_back(0.0);
      for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double a = edges[s], b = edges[s + 1];
        const int base = std::max(1, static_cast<int>(std::ceil((b - a) / cfg_.panel_width)));
        const int n = base << lvl;
        const double h = (b - a) / n;
        for (int i = 0; i < n; ++i) {
          const double lo = a + i * h;
          const double hi = (i + 1 == n) ? b : lo + h;
          L.panel_edges.push_back(hi);
          const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
          for (int q = 0; q < rule.order(); ++q) {
            const double t = mid + half * rule.nodes[q];
            L.tau.push_back(t);
            L.weight.push_back(half * rule.weights[q]);
            L.beta.push_back(kernel_.value(t));
            L.cumulative.push_back(kernel_.cumulative(t));
          }
        }
      }
      levels_.push_back(std::move(L));
    }
  }

  const ImmunityKernel& kernel() const { return kernel_; }
  const QuadConfig& config() const { return cfg_; }
  double tau_cut() const { return tau_cut_; }
  /// Kernel value treated as constant beyond tau_cut.
  double saturated_value() const { return beta_cut_; }
  double cumulative_at_cut() const { return cumulative_cut_; }
  int levels() const { return static_cast<int>(levels_.size()); }
  const Level& level(int k) const { return levels_.at(k); }

  /**
   * Integrates N integrands over [0, tau_cut]. f(tau, beta, cumulative)
   * returns std::array<double, N>. `tail` holds the closed-form contributions
   * from [tau_cut, inf); they enter only the convergence test, the returned
   * values are the finite parts.
   */
  template <std::size_t N, class F>
  std::array<double, N> integrate(F&& f, const std::array<double, N>& tail) const
  {
    std::array<double, N> prev = sum_level<N>(0, f);
    for (int lvl = 1; lvl < levels(); ++lvl) {
      const std::array<double, N> cur = sum_level<N>(lvl, f);
      bool converged = true;
      for (std::size_t c = 0; c < N; ++c) {
        const double scale = std::abs(cur[c] + tail[c]);
        if (std::abs(cur[c] - prev[c]) > cfg_.rel_tol * scale && std::abs(cur[c] - prev[c]) > 1e-300)
          converged = false;
      }
      if (converged)
        return cur;
      prev = cur;
    }
    throw QuadratureError("panel refinement did not converge after "
                          + std::to_string(cfg_.max_refinements) + " doublings");
  }

 private:
  template <std::size_t N, class F>
  std::array<double, N> sum_level(int lvl, F& f) const
  {
    const Level& L = levels_[lvl];
    std::array<double, N> acc{};
    for (std::size_t i = 0; i < L.tau.size(); ++i) {
      const std::array<double, N> v = f(L.tau[i], L.beta[i], L.cumulative[i]);
      for (std::size_t c = 0; c < N; ++c)
        acc[c] += L.weight[i] * v[c];
    }
    return acc;
  }

  ImmunityKernel kernel_;
  QuadConfig cfg_;
  double tau_cut_ = 0.0;
  double beta_cut_ = 1.0;
  double cumulative_cut_ = 0.0;
  std::vector<Level> levels_;
};

struct MomentIntegrals
{
  double J0;  ///< int beta_r0(tau) e^{-u tau}
  double J1;  ///< int beta_r0(tau) e^{-u tau} B(tau)
};

struct SurvivalIntegrals
{
  double Phi;  ///< int exp(-u tau - lam_eff B(tau))
  double Psi;  ///< int beta_r0(tau) exp(-u tau - lam_eff B(tau))
};

inline MomentIntegrals moment_integrals(const AgeQuadrature& q, double u)
{
  if (!(u > 0.0))
    throw ParameterError("u", "u must be positive");
  const double T = q.tau_cut(), bs = q.saturated_value(), BT = q.cumulative_at_cut();
  const double decay = std::exp(-u * T);
  // beyond tau_cut: beta = bs, B(tau) = BT + bs (tau - T)
  const std::array<double, 2> tail{bs * decay / u, bs * decay * (BT / u + bs / (u * u))};
  const auto fin = q.integrate<2>(
      [u](double tau, double beta, double B) {
        const double w = beta * std::exp(-u * tau);
        return std::array<double, 2>{w, w * B};
      },
      tail);
  return {fin[0] + tail[0], fin[1] + tail[1]};
}

inline MomentIntegrals moment_integrals(const ImmunityKernel& k, double u, const QuadConfig& cfg = {})
{
  return moment_integrals(AgeQuadrature(k, cfg), u);
}

inline SurvivalIntegrals survival_integrals(const AgeQuadrature& q, double u, double lam_eff)
{
  if (!(u > 0.0))
    throw ParameterError("u", "u must be positive");
  if (!(lam_eff >= 0.0))
    throw ParameterError("lam_eff", "lam_eff must be non-negative");
  const double T = q.tau_cut(), bs = q.saturated_value(), BT = q.cumulative_at_cut();
  const double edge = std::exp(-u * T - lam_eff * BT) / (u + lam_eff * bs);
  const std::array<double, 2> tail{edge, bs * edge};
  const auto fin = q.integrate<2>(
      [u, lam_eff](double tau, double beta, double B) {
        const double w = std::exp(-u * tau - lam_eff * B);
        return std::array<double, 2>{w, beta * w};
      },
      tail);
  return {fin[0] + tail[0], fin[1] + tail[1]};
}

inline SurvivalIntegrals survival_integrals(const ImmunityKernel& k, double u, double lam_eff,
                                            const QuadConfig& cfg = {})
{
  return survival_integrals(AgeQuadrature(k, cfg), u, lam_eff);
}

}  // namespace waning

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "waning/equilibrium.hpp"
#include "waning/errors.hpp"
#include "waning/model.hpp"
#include "waning/simulator.hpp"

// Endemic branches are graphs over the force-of-infection factor lam: for each
// lam there is at most one bar_beta. Branches are traced on a bar_beta grid,
// ordered by lam, and folds in bar_beta are ordinary extrema of R0(lam).

namespace waning {

enum class Stability
{
  Stable,
  Unstable,
  Unknown
};

inline std::string to_string(Stability s)
{
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    default: return "unknown";
  }
}

struct BranchPoint
{
  double bar_beta = 0.0;
  double r0_value = 0.0;
  Equilibrium eq;
  Stability stability = Stability::Unknown;
};

struct Fold
{
  double r0_value = 0.0;
  double bar_beta = 0.0;
  Equilibrium eq;
};

struct Branch
{
  std::vector<BranchPoint> points;  ///< ordered by lam
  std::vector<Fold> folds;
  std::optional<double> transcritical_bar_beta;  ///< bar_beta* (R0 = 1), when it exists
};

struct ContinuationOptions
{
  EquilibriumOptions eq;
  double fold_tol = 1e-6;     ///< |Delta R0| at which fold refinement stops
  int fold_max_iter = 200;
  double match_rel = 1e-9;    ///< two points closer than this in lam must coincide
};

/// Default grid density: 400 steps per unit of R0.
inline int default_steps(double lo, double hi)
{
  return std::max(2, static_cast<int>(std::ceil(400.0 * (hi - lo))));
}

namespace detail {

inline double branch_r0(const StationaryProblem& sp, const ReproductionLine& line, double lam)
{
  const auto bb = sp.bar_beta_at(lam);
  if (!bb)
    throw Error("fold refinement left the branch");
  return line.at(*bb);
}

/// Golden-section search on log(lam) for an extremum of R0 inside [a, b].
inline Fold refine_fold(const StationaryProblem& sp, const ReproductionLine& line, double a, double b,
                        bool minimum, const ContinuationOptions& opt)
{
  const double sgn = minimum ? 1.0 : -1.0;
  auto f = [&](double x) { return sgn * branch_r0(sp, line, std::exp(x)); };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = std::log(a), hi = std::log(b);
  double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
  double fc = f(c), fd = f(d);
  const double f_lo = f(lo), f_hi = f(hi);
  bool converged = false;
  for (int it = 0; it < opt.fold_max_iter; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = f(c);
    }
    else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = f(d);
    }
    if (std::abs(fc - fd) < opt.fold_tol && hi - lo < 1e-6) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw Error("fold refinement did not converge");
  const double x = fc < fd ? c : d;
  const double fx = std::min(fc, fd);
  if (fx > std::min(f_lo, f_hi))
    throw Error("fold refinement did not converge");
  Fold fold;
  fold.bar_beta = *sp.bar_beta_at(std::exp(x));
  fold.r0_value = line.at(fold.bar_beta);
  fold.eq = sp.reconstruct(std::exp(x), fold.bar_beta);
  return fold;
}

}  // namespace detail

/**
 * Interior extrema of R0 along the lam-ordered branch, each refined by
 * golden-section search over lam with bar_beta recovered by bisection.
 */
inline std::vector<Fold> detect_folds(const Branch& branch, const ModelParams& p,
                                      const ContinuationOptions& opt = {})
{
  std::vector<Fold> folds;
  const auto& pts = branch.points;
  if (pts.size() < 3)
    return folds;
  const StationaryProblem sp(p, opt.eq.quad);
  const auto line = reproduction_line(p, opt.eq.quad);
  // both roots of a fold often sit on the same grid value, so equal
  // neighbours are skipped when looking for a turn
  std::size_t from = 0;
  double last = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double d = pts[i + 1].r0_value - pts[i].r0_value;
    if (d == 0.0)
      continue;
    if (last != 0.0 && (d < 0.0) != (last < 0.0))
      folds.push_back(detail::refine_fold(sp, line, pts[from].eq.lam, pts[i + 1].eq.lam, last < 0.0, opt));
    last = d;
    from = i;
  }
  return folds;
}

/**
 * Endemic equilibria for R0 in [lo, hi] on n_steps evenly spaced values.
 * R0 values that need bar_beta < 0 are evaluated at bar_beta = 0.
 */
inline Branch trace_branch(const ModelParams& p, double lo, double hi, int n_steps,
                           const ContinuationOptions& opt = {})
{
  if (!(lo <= hi))
    throw ParameterError("r0_range", "r0_range out of range");
  if (n_steps < 2)
    throw ParameterError("n_steps", "n_steps must be at least 2");
  const auto line = reproduction_line(p, opt.eq.quad);
  const StationaryProblem sp(p, opt.eq.quad);

  Branch branch;
  if (line.intercept < 1.0 && line.slope > 0.0)
    branch.transcritical_bar_beta = beta_star(line);

  std::vector<BranchPoint>& pts = branch.points;
  double last_bb = -1.0;
  for (int k = 0; k < n_steps; ++k) {
    const double R = lo + (hi - lo) * k / (n_steps - 1);
    const double bb = line.slope > 0.0 ? std::max(0.0, (R - line.intercept) / line.slope) : 0.0;
    if (bb == last_bb)
      continue;
    last_bb = bb;
    for (auto& eq : sp.find(bb, opt.eq))
      pts.push_back({bb, line.at(bb), std::move(eq), Stability::Unknown});
  }
  std::sort(pts.begin(), pts.end(), [](const BranchPoint& a, const BranchPoint& b) { return a.eq.lam < b.eq.lam; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double l0 = pts[i - 1].eq.lam, l1 = pts[i].eq.lam;
    if (l1 - l0 <= opt.match_rel * l1 && pts[i].bar_beta != pts[i - 1].bar_beta) {
      std::ostringstream os;
      os.precision(12);
      os << "branch assembly ambiguity at bar_beta=" << pts[i].bar_beta;
      throw Error(os.str());
    }
  }
  branch.folds = detect_folds(branch, p, opt);
  return branch;
}

inline Branch trace_branch(const ModelParams& p, double lo, double hi, const ContinuationOptions& opt = {})
{
  return trace_branch(p, lo, hi, default_steps(lo, hi), opt);
}

/// Probe every point; inconclusive probes stay Unknown.
inline Branch label_stability(Branch branch, const ModelParams& p, const SimConfig& sim = {},
                              const ProbeConfig& probe = {})
{
  for (auto& pt : branch.points) {
    switch (stability_probe(pt.eq, p, pt.bar_beta, sim, probe)) {
      case ProbeResult::Stable: pt.stability = Stability::Stable; break;
      case ProbeResult::Unstable: pt.stability = Stability::Unstable; break;
      default: pt.stability = Stability::Unknown;
    }
  }
  return branch;
}

}  // namespace waning

// Acceptance criteria, one PASS/FAIL line each. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "waning/continuation.hpp"
#include "waning/ls_oracle.hpp"
#include "waning/simulator.hpp"

using namespace waning;

namespace {

struct Verdict
{
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double max_seconds, const std::function<Verdict()>& body)
{
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  }
  catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream timing;
  timing.precision(3);
  timing << secs << " s";
  if (max_seconds > 0.0) {
    timing << " (limit " << max_seconds << " s)";
    if (secs > max_seconds) {
      v.pass = false;
      v.detail += "; too slow";
    }
  }
  if (!v.pass)
    ++failures;
  std::printf("AC%-2d %s  %s: %s [%s]\n", id, v.pass ? "PASS" : "FAIL", title.c_str(), v.detail.c_str(),
              timing.str().c_str());
  std::fflush(stdout);
}

std::string g(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

double bar_beta_for(const ModelParams& p, double R0)
{
  const auto line = reproduction_line(p);
  return (R0 - line.intercept) / line.slope;
}

ModelParams random_params(std::mt19937& gen)
{
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto p = reference_params(0.1);
  p.theta = 0.2 + 0.7 * U(gen);
  p.epsilon = 0.2 + 0.7 * U(gen);
  p.u = 1.0 / (365.0 * (40.0 + 50.0 * U(gen)));
  p.mu = 0.05 * U(gen);
  p.alpha = std::pow(10.0, -7.0 + 4.0 * U(gen));
  p.sigma = 1.0 / (2.0 + 6.0 * U(gen));
  p.rho = 0.1 + 0.8 * U(gen);
  p.gamma_A = 1.0 / (5.0 + 15.0 * U(gen));
  p.gamma_I = 1.0 / (4.0 + 10.0 * U(gen));
  p.kernel = ImmunityKernel::waning(0.9 * U(gen), std::pow(10.0, -2.0 + 2.0 * U(gen)), 400.0 * U(gen));
  const double target = 0.3 + 0.65 * U(gen);
  p.beta_s = 1.0;
  p.beta_s = target / r0(p, 0.0);
  return p;
}

Verdict a_matches(double beta_s, double expected)
{
  const double a = coeff_a(reference_params(beta_s));
  const double e = rel_err(a, expected);
  return {e <= 1e-3, "a = " + g(a) + ", expected " + g(expected) + ", rel err " + g(e) + " (tol 1e-3)"};
}

std::string fold_list(const Branch& b)
{
  std::string s = "[";
  for (std::size_t i = 0; i < b.folds.size(); ++i)
    s += (i ? ", " : "") + g(b.folds[i].r0_value);
  return s + "]";
}

Verdict folds_match(double beta_s, double lo, double hi, const std::vector<double>& expected)
{
  const auto p = reference_params(beta_s);
  const auto br = trace_branch(p, lo, hi);
  bool ok = br.folds.size() == expected.size();
  for (std::size_t i = 0; ok && i < expected.size(); ++i)
    ok = std::abs(br.folds[i].r0_value - expected[i]) <= 2e-3;
  std::string want = "[";
  for (std::size_t i = 0; i < expected.size(); ++i)
    want += (i ? ", " : "") + g(expected[i]);
  want += "]";
  return {ok, "beta_s=" + g(beta_s) + " folds at R0 " + fold_list(br) + ", expected " + want + " +-0.002"};
}

}  // namespace

int main()
{
  criterion(1, "coefficient a, backward regime", 1.0, [] { return a_matches(0.1, 9.7232e-6); });
  criterion(2, "coefficient a, forward regime", 1.0, [] { return a_matches(0.10345, -1.1558e-5); });

  criterion(3, "LS pairing equals closed-form a", 10.0, [] {
    double worst = 0.0;
    std::string notes;
    int compared = 0;
    auto compare = [&](const ModelParams& p) {
      const double e = rel_err(ls::coeff_a_ls(p), coeff_a(p));
      worst = std::max(worst, e);
      ++compared;
    };
    for (double bs : {0.1, 0.10345}) {
      const auto p = reference_params(bs);
      std::string e1, e2;
      try {
        compare(p);
        continue;
      }
      catch (const Error& e) {
        e1 = e.what();
      }
      try {
        coeff_a(p);
      }
      catch (const Error& e) {
        e2 = e.what();
      }
      try {
        ls::coeff_a_ls(p);
      }
      catch (const Error& e) {
        e1 = e.what();
      }
      if (e1.empty() || e1 != e2)
        return Verdict{false, "beta_s=" + g(bs) + ": only one route failed"};
      notes += "; beta_s=" + g(bs) + " both routes: " + e1;
    }
    compare(reference_params(0.102));
    std::mt19937 gen(2024);
    for (int i = 0; i < 20; ++i)
      compare(random_params(gen));
    return Verdict{worst <= 1e-6, std::to_string(compared) + " parameter sets, max rel diff " + g(worst) + " (tol 1e-6)" + notes};
  });

  criterion(4, "fold locations, backward regime", 120.0, [] { return folds_match(0.1, 0.95, 1.05, {0.9723}); });
  criterion(4, "fold locations, forward regime", 120.0,
            [] { return folds_match(0.10345, 0.99, 1.05, {1.0057, 1.0218}); });

  criterion(5, "equilibrium counts", 30.0, [] {
    struct Sample
    {
      double bs, R0;
      std::size_t want;
    };
    bool ok = true;
    std::string detail;
    for (const auto& s : {Sample{0.1, 0.95, 0}, Sample{0.1, 0.99, 2}, Sample{0.10345, 1.003, 1},
                          Sample{0.10345, 1.012, 3}, Sample{0.10345, 1.05, 1}}) {
      const auto p = reference_params(s.bs);
      const double bb = bar_beta_for(p, s.R0);
      std::size_t n = 0;
      std::string note;
      if (bb < 0.0)
        note = " (needs bar_beta=" + g(bb) + " < 0)";
      else
        n = find_equilibria(p, bb).size();
      ok = ok && n == s.want;
      detail += (detail.empty() ? "" : ", ") + std::string("beta_s=") + g(s.bs) + " R0=" + g(s.R0) + ": "
                + std::to_string(n) + "/" + std::to_string(s.want) + note;
    }
    return Verdict{ok, detail + " (got/expected)"};
  });

  criterion(6, "transcritical anchoring", 0.0, [] {
    bool ok = true;
    std::string detail;
    for (double bs : {0.1, 0.102, 0.10345}) {
      const auto p = reference_params(bs);
      const auto br = trace_branch(p, 1.0 - 1e-3, 1.0 + 1e-3, 41);
      if (br.points.empty())
        return Verdict{false, "beta_s=" + g(bs) + ": empty branch"};
      const auto& first = br.points.front();
      double gap = std::abs(first.r0_value - 1.0);
      const StationaryProblem sp(p);
      if (const auto bb = sp.bar_beta_at(1e-10))
        gap = std::max(gap, std::abs(r0(p, *bb) - 1.0));
      ok = ok && gap < 1e-4 && first.eq.lam < 1e-4;
      detail += (detail.empty() ? "" : ", ") + std::string("beta_s=") + g(bs) + ": lam=" + g(first.eq.lam)
                + " |R0-1|=" + g(gap);
    }
    return Verdict{ok, detail + " (tol 1e-4)"};
  });

  criterion(7, "bistability at R0=0.99, backward regime", 300.0, [] {
    const auto p = reference_params(0.1);
    const double bb = bar_beta_for(p, 0.99);
    SimConfig cfg;
    cfg.dt = 0.5;
    cfg.t_end = 80000.0;
    const double S0 = dfe(p).S0;
    const auto eqs = find_equilibria(p, bb);
    const auto out = bistability_experiment(
        p, bb, {initial_state(p, cfg, S0, 0, 0, 10.0), initial_state(p, cfg, S0, 0, 0, 1e6)}, cfg);
    const bool ok = eqs.size() == 2 && out[0].label == "DFE" && out[1].label == "EE1";
    return Verdict{ok, "endemic equilibria " + std::to_string(eqs.size()) + "; I(0)=10 -> " + out[0].label
                           + ", I(0)=1e6 -> " + out[1].label + " (expected DFE and upper EE)"};
  });

  criterion(8, "residual suite", 0.0, [] {
    double worst_eq = 0.0;
    int n_eq = 0;
    for (double bs : {0.05, 0.1, 0.102, 0.10345}) {
      const auto p = reference_params(bs);
      for (double R : {0.97, 0.99, 0.995, 0.997, 0.999, 1.003, 1.012, 1.05, 1.3, 2.0}) {
        const double bb = bar_beta_for(p, R);
        if (bb < 0.0)
          continue;
        for (const auto& eq : find_equilibria(p, bb)) {
          worst_eq = std::max(worst_eq, verify_equilibrium(eq, p, bb));
          ++n_eq;
        }
      }
      const auto br = trace_branch(p, 0.98, 1.05);
      for (const auto& f : br.folds) {
        worst_eq = std::max(worst_eq, verify_equilibrium(f.eq, p, f.bar_beta));
        ++n_eq;
      }
    }

    // simulations: the integrator aborts on any negative entry or bound violation
    int n_sim = 0;
    double min_entry = INFINITY;
    for (double R : {0.99, 1.2, 3.0}) {
      const auto p = reference_params(0.1);
      SimConfig cfg;
      cfg.t_end = 3000.0;
      auto s = dfe_state(p, cfg);
      s.I = 1e4;
      const double cap = std::max(s.N(), p.Lambda / p.u) * (1.0 + 1e-9);
      integrate(p, bar_beta_for(p, R), s, cfg, [&](const SimState& x) {
        if (x.N() > cap)
          throw SimulationError("bound");
        min_entry = std::min({min_entry, x.S, x.E, x.A, x.I, x.r_tail});
        return true;
      });
      ++n_sim;
    }

    const auto p = reference_params(0.1);
    SimConfig cfg;
    cfg.t_end = 1000.0;
    const auto s0 = dfe_state(p, cfg);
    double drift = 0.0;
    integrate(p, bar_beta_for(p, 0.99), s0, cfg, [&](const SimState& s) {
      drift = std::max({drift, std::abs(s.S - s0.S) / s0.S, s.infected() / s0.N(), std::abs(s.N() - s0.N()) / s0.N()});
      return true;
    });
    const bool ok = worst_eq < 1e-8 && min_entry >= 0.0 && drift < 1e-6;
    return Verdict{ok, std::to_string(n_eq) + " equilibria, max verify " + g(worst_eq) + " (tol 1e-8); "
                           + std::to_string(n_sim) + " simulations non-negative and bounded; DFE drift "
                           + g(drift) + " (tol 1e-6)"};
  });

  criterion(9, "quadrature correctness", 0.0, [] {
    double worst_j0 = 0.0;
    const auto k = ImmunityKernel::waning(0.2, 0.5, 200.0);
    for (double u : {1.0 / 27375.0, 1e-4, 1e-3, 0.01, 0.05})
      worst_j0 = std::max(worst_j0, rel_err(moment_integrals(k, u).J0, oracle::J0_closed_form(0.2, 0.5, 200.0, u)));
    const double u = 1.0 / 27375.0;
    const std::vector<std::pair<ImmunityKernel, double>> samples{
        {k, 0.0},
        {k, 1e-5},
        {k, 1e-3},
        {k, 0.01},
        {k, 0.3},
        {ImmunityKernel::waning(0.6, 0.05, 50.0), 2e-3},
        {ImmunityKernel::waning(0.0, 0.5, 200.0), 0.02},
        {ImmunityKernel::waning(0.9, 1.0, 0.0), 5e-4},
        {ImmunityKernel::tabulated({0, 30, 90, 250}, {0.4, 0.55, 0.9, 1.0}), 3e-3},
        {ImmunityKernel::tabulated({0, 100}, {0.1, 1.0}), 0.05},
    };
    double worst_s = 0.0;
    for (const auto& [kern, L] : samples) {
      const auto s = survival_integrals(kern, u, L);
      worst_s = std::max({worst_s, rel_err(s.Phi, oracle::Phi_brute(kern, u, L)),
                          rel_err(s.Psi, oracle::Psi_brute(kern, u, L))});
    }
    return Verdict{worst_j0 <= 1e-10 && worst_s <= 1e-6, "J0 max rel err " + g(worst_j0) + " (tol 1e-10); Phi/Psi on "
                                                              + std::to_string(samples.size())
                                                              + " samples max rel err " + g(worst_s) + " (tol 1e-6)"};
  });

  criterion(10, "transversality positive", 0.0, [] {
    double lowest = INFINITY;
    int n = 0;
    std::mt19937 gen(77);
    for (int i = 0; i < 50; ++i) {
      lowest = std::min(lowest, ls::transversality(random_params(gen)));
      ++n;
    }
    for (double bs : {0.05, 0.1, 0.102, 0.10345, 0.2}) {
      lowest = std::min(lowest, ls::transversality(reference_params(bs)));
      ++n;
    }
    return Verdict{lowest > 0.0, std::to_string(n) + " parameter sets with alpha > 0, min " + g(lowest)};
  });

  std::printf("%d checks failed\n", failures);
  return failures == 0 ? 0 : 1;
}

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "waning/errors.hpp"
#include "waning/gauss_legendre.hpp"
#include "waning/model.hpp"
#include "waning/params.hpp"
#include "waning/quadrature.hpp"

// Linearization of the stationary problem at the disease-free state and the
// objects of its one-dimensional reduction: kernel and adjoint eigenvectors,
// the second-order forms, and the two pairings that decide the type of the
// transcritical bifurcation. The pairing <F_phiphi[x, x], xi> reproduces the
// closed-form coefficient computed by coeff_a() along an independent route.

namespace waning::ls {

/**
 * Gauss-Legendre panel grid over immune age. On [0, tau_cut] the panels are
 * those of AgeQuadrature (level `level`); beyond, panels grow geometrically up
 * to width 1/u and continue until tau_cut + 60/u.
 */
class AgeGrid
{
 public:
  AgeGrid(const ImmunityKernel& k, double u, const QuadConfig& cfg = {}, int level = 1)
  {
    const AgeQuadrature q(k, cfg);
    const auto& L = q.level(std::min(level, q.levels() - 1));
    std::vector<double> edges = L.panel_edges;
    const double far = q.tau_cut() + 60.0 / u;
    double width = cfg.panel_width;
    while (edges.back() < far) {
      width = std::min(2.0 * width, 1.0 / u);
      edges.push_back(std::min(edges.back() + width, far));
    }

    const GaussLegendreRule rule(cfg.order);
    order_ = rule.order();
    diff_ = differentiation_matrix(rule.nodes);
    legendre_ = legendre_table(rule.nodes);
    ref_weights_ = rule.weights;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double lo = edges[p], hi = edges[p + 1];
      half_width_.push_back(0.5 * (hi - lo));
      for (int i = 0; i < order_; ++i) {
        tau_.push_back(0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[i]);
        weight_.push_back(0.5 * (hi - lo) * rule.weights[i]);
      }
    }
  }

  std::size_t size() const { return tau_.size(); }
  const std::vector<double>& tau() const { return tau_; }
  const std::vector<double>& weights() const { return weight_; }

  std::vector<double> sample(const std::function<double(double)>& f) const
  {
    std::vector<double> out(tau_.size());
    for (std::size_t i = 0; i < tau_.size(); ++i)
      out[i] = f(tau_[i]);
    return out;
  }

  double integrate(std::span<const double> values) const
  {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
      s += weight_[i] * values[i];
    return s;
  }

  /// d/dtau by Lagrange interpolation within each panel.
  std::vector<double> derivative(std::span<const double> values) const
  {
    std::vector<double> out(values.size(), 0.0);
    for (std::size_t p = 0; p < half_width_.size(); ++p) {
      const std::size_t base = p * order_;
      for (int i = 0; i < order_; ++i) {
        double s = 0.0;
        for (int j = 0; j < order_; ++j)
          s += diff_[i * order_ + j] * values[base + j];
        out[base + i] = s / half_width_[p];
      }
    }
    return out;
  }

  /**
   * Largest relative size of the top Legendre coefficient over all panels;
   * small when every panel resolves the profile.
   */
  double resolution_defect(std::span<const double> values) const
  {
    double scale = 0.0;
    for (double v : values)
      scale = std::max(scale, std::abs(v));
    if (scale == 0.0)
      return 0.0;
    double worst = 0.0;
    const int top = order_ - 1;
    for (std::size_t p = 0; p < half_width_.size(); ++p) {
      double c = 0.0;
      for (int i = 0; i < order_; ++i)
        c += ref_weights_[i] * legendre_[i * order_ + top] * values[p * order_ + i];
      c *= 0.5 * (2.0 * top + 1.0);
      worst = std::max(worst, std::abs(c) / scale);
    }
    return worst;
  }

 private:
  static std::vector<double> differentiation_matrix(const std::vector<double>& x)
  {
    const int n = static_cast<int>(x.size());
    std::vector<double> w(n, 1.0), D(n * n, 0.0);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (k != j)
          w[j] /= (x[j] - x[k]);
    for (int i = 0; i < n; ++i) {
      double diag = 0.0;
      for (int j = 0; j < n; ++j) {
        if (i == j)
          continue;
        D[i * n + j] = (w[j] / w[i]) / (x[i] - x[j]);
        diag -= D[i * n + j];
      }
      D[i * n + i] = diag;
    }
    return D;
  }

  static std::vector<double> legendre_table(const std::vector<double>& x)
  {
    const int n = static_cast<int>(x.size());
    std::vector<double> P(n * n);
    for (int i = 0; i < n; ++i) {
      double p0 = 1.0, p1 = x[i];
      P[i * n] = 1.0;
      if (n > 1)
        P[i * n + 1] = p1;
      for (int k = 2; k < n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x[i] * p1 - (k - 1.0) * p0) / k;
        P[i * n + k] = pk;
        p0 = p1;
        p1 = pk;
      }
    }
    return P;
  }

  int order_ = 0;
  std::vector<double> tau_, weight_, half_width_;
  std::vector<double> diff_, legendre_, ref_weights_;
};

/// Element of R^4 x L^1: four compartments plus an immune-age profile on a grid.
struct StateVector
{
  std::array<double, 4> head{};
  std::vector<double> profile;
};

/// Constants of the linearization at (DFE, bar_beta*).
struct Linearization
{
  ModelParams p;
  DiseaseFreeEquilibrium d;
  double bar_beta = 0.0;
  double K = 0.0;  ///< infectiousness sum
  double B = 0.0;  ///< (beta_s S0 + bar_beta int beta_r0 r0) / N0
  double D = 0.0;  ///< beta_s S0 / N0
  AgeGrid grid;
  std::vector<double> beta;      ///< kernel at the grid nodes
  std::vector<double> r0;        ///< DFE immune profile at the grid nodes
  std::vector<double> forcing;   ///< bar_beta beta_r0 r0 / N0 at the grid nodes
  double reinfection_mass = 0.0; ///< int beta_r0 r0

  Linearization(const ModelParams& params, double bar_beta_value, const QuadConfig& cfg = {})
      : p(params)
      , d(dfe(params))
      , bar_beta(bar_beta_value)
      , K(infectiousness_sum(params))
      , grid(params.kernel, params.u, cfg)
  {
    beta = grid.sample([&](double t) { return p.kernel.value(t); });
    r0 = grid.sample([&](double t) { return d.r0(t); });
    forcing.resize(grid.size());
    std::vector<double> br(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      br[i] = beta[i] * r0[i];
      forcing[i] = bar_beta * br[i] / d.N0;
    }
    reinfection_mass = grid.integrate(br);
    D = p.beta_s * d.S0 / d.N0;
    B = (p.beta_s * d.S0 + bar_beta * reinfection_mass) / d.N0;
  }

  double weighted_infectious(const StateVector& x) const
  {
    return p.theta * x.head[1] + p.epsilon * x.head[2] + x.head[3];
  }

  double total(const StateVector& x) const
  {
    return x.head[0] + x.head[1] + x.head[2] + x.head[3] + grid.integrate(x.profile);
  }
};

inline Linearization linearize(const ModelParams& p, const QuadConfig& cfg = {})
{
  return Linearization(p, beta_star(p, cfg), cfg);
}

/// <h, g> = sum_j h_j g_j + int h5 g5.
inline double pairing(const Linearization& lin, const StateVector& h, const StateVector& g)
{
  double s = 0.0;
  for (int j = 0; j < 4; ++j)
    s += h.head[j] * g.head[j];
  std::vector<double> prod(lin.grid.size());
  for (std::size_t i = 0; i < prod.size(); ++i)
    prod[i] = h.profile[i] * g.profile[i];
  return s + lin.grid.integrate(prod);
}

struct Eigenfunctions
{
  StateVector kernel;   ///< spans ker A, normalized by x2 = 1
  StateVector adjoint;  ///< spans ker A*, normalized by xi2 = 1
  double x5_at_zero = 0.0;
  /// Closed-form age profile of the kernel vector.
  std::function<double(double)> x5;
};

inline Eigenfunctions eigenfunctions(const Linearization& lin)
{
  const auto& p = lin.p;
  Eigenfunctions ef;
  const double x1 = -p.beta_s * lin.d.S0 * lin.K / ((p.alpha + p.u) * lin.d.N0);
  const double x3 = (1.0 - p.rho) * p.sigma / (p.gamma_A + p.u);
  const double x4 = p.rho * p.sigma / (p.gamma_I + p.mu + p.u);
  ef.x5_at_zero = p.alpha * x1 + p.gamma_A * x3 + p.gamma_I * x4;
  // int_0^tau beta_r0(h) r0(h) e^{u h} dh = r0(0) B(tau)
  const double slope = lin.bar_beta / lin.d.N0 * lin.K * lin.d.r0_at_zero;
  const double x50 = ef.x5_at_zero, u = p.u;
  const ImmunityKernel k = p.kernel;
  ef.x5 = [x50, slope, u, k](double tau) { return (x50 - slope * k.cumulative(tau)) * std::exp(-u * tau); };
  ef.kernel.head = {x1, 1.0, x3, x4};
  ef.kernel.profile = lin.grid.sample(ef.x5);

  ef.adjoint.head = {0.0, 1.0, p.epsilon * lin.B / (p.gamma_A + p.u), lin.B / (p.gamma_I + p.mu + p.u)};
  ef.adjoint.profile.assign(lin.grid.size(), 0.0);
  return ef;
}

inline Eigenfunctions eigenfunctions(const ModelParams& p, const QuadConfig& cfg = {})
{
  return eigenfunctions(linearize(p, cfg));
}

/// A x with d/dtau taken on the age grid. Throws if the grid cannot resolve x5.
inline StateVector apply_A(const Linearization& lin, const StateVector& x, double resolution_tol = 1e-6)
{
  if (lin.grid.resolution_defect(x.profile) > resolution_tol)
    throw Error("age grid too coarse for the profile");
  const auto& p = lin.p;
  const double W = lin.weighted_infectious(x);
  StateVector y;
  y.head[0] = -(p.alpha + p.u) * x.head[0] - lin.D * W;
  y.head[1] = lin.B * W - (p.sigma + p.u) * x.head[1];
  y.head[2] = (1.0 - p.rho) * p.sigma * x.head[1] - (p.gamma_A + p.u) * x.head[2];
  y.head[3] = p.rho * p.sigma * x.head[1] - (p.gamma_I + p.mu + p.u) * x.head[3];
  const auto dx5 = lin.grid.derivative(x.profile);
  y.profile.resize(x.profile.size());
  for (std::size_t i = 0; i < y.profile.size(); ++i)
    y.profile[i] = -lin.forcing[i] * W - (dx5[i] + p.u * x.profile[i]);
  return y;
}

/// A* xi, with C(xi5) = int E(tau) xi5.
inline StateVector apply_A_adjoint(const Linearization& lin, const StateVector& xi)
{
  const auto& p = lin.p;
  std::vector<double> fx(lin.grid.size());
  for (std::size_t i = 0; i < fx.size(); ++i)
    fx[i] = lin.forcing[i] * xi.profile[i];
  const double C = lin.grid.integrate(fx);
  const auto& h = xi.head;
  StateVector z;
  z.head[0] = -(p.alpha + p.u) * h[0];
  z.head[1] = -p.theta * lin.D * h[0] + (p.theta * lin.B - (p.sigma + p.u)) * h[1]
              + (1.0 - p.rho) * p.sigma * h[2] + p.rho * p.sigma * h[3] - p.theta * C;
  z.head[2] = -p.epsilon * lin.D * h[0] + p.epsilon * lin.B * h[1] - (p.gamma_A + p.u) * h[2] - p.epsilon * C;
  z.head[3] = -lin.D * h[0] + lin.B * h[1] - (p.gamma_I + p.mu + p.u) * h[3] - C;
  const auto dxi = lin.grid.derivative(xi.profile);
  z.profile.resize(xi.profile.size());
  for (std::size_t i = 0; i < z.profile.size(); ++i)
    z.profile[i] = dxi[i] - p.u * xi.profile[i];
  return z;
}

/// Max-norm of a state vector (head entries and profile samples).
inline double max_norm(const StateVector& x)
{
  double m = 0.0;
  for (double v : x.head)
    m = std::max(m, std::abs(v));
  for (double v : x.profile)
    m = std::max(m, std::abs(v));
  return m;
}

inline double H1(const Linearization& lin, const StateVector& x, const StateVector& y)
{
  const double N0 = lin.d.N0, S0 = lin.d.S0;
  return lin.p.beta_s
         * (lin.weighted_infectious(x) * (S0 * lin.total(y) - N0 * y.head[0])
            + lin.weighted_infectious(y) * (S0 * lin.total(x) - N0 * x.head[0]))
         / (N0 * N0);
}

inline double H2(const Linearization& lin, const StateVector& x, const StateVector& y)
{
  const double N0 = lin.d.N0;
  auto reinfection_shift = [&](const StateVector& v) {
    // int beta_r0 [r0 * total(v) - N0 v5]
    std::vector<double> bv(lin.grid.size());
    for (std::size_t i = 0; i < bv.size(); ++i)
      bv[i] = lin.beta[i] * v.profile[i];
    return lin.reinfection_mass * lin.total(v) - N0 * lin.grid.integrate(bv);
  };
  const double part = lin.weighted_infectious(x) * reinfection_shift(y)
                      + lin.weighted_infectious(y) * reinfection_shift(x);
  return -lin.bar_beta * part / (N0 * N0) - H1(lin, x, y);
}

inline std::vector<double> H3(const Linearization& lin, const StateVector& x, const StateVector& y)
{
  const double N0 = lin.d.N0;
  const double Wx = lin.weighted_infectious(x), Wy = lin.weighted_infectious(y);
  const double Tx = lin.total(x), Ty = lin.total(y);
  std::vector<double> out(lin.grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r0 = lin.r0[i];
    out[i] = lin.bar_beta * lin.beta[i]
             * (Wx * (r0 * Ty - N0 * y.profile[i]) + Wy * (r0 * Tx - N0 * x.profile[i])) / (N0 * N0);
  }
  return out;
}

/// F_phiphi(P0, bar_beta)[x, y] = (H1, H2, 0, 0, H3).
inline StateVector second_derivative(const Linearization& lin, const StateVector& x, const StateVector& y)
{
  StateVector out;
  out.head = {H1(lin, x, y), H2(lin, x, y), 0.0, 0.0};
  out.profile = H3(lin, x, y);
  return out;
}

/// F_phi,bar_beta(P0) x.
inline StateVector mixed_derivative(const Linearization& lin, const StateVector& x)
{
  const double W = lin.weighted_infectious(x) / lin.d.N0;
  StateVector out;
  out.head = {0.0, lin.reinfection_mass * W, 0.0, 0.0};
  out.profile.resize(lin.grid.size());
  for (std::size_t i = 0; i < out.profile.size(); ++i)
    out.profile[i] = -lin.beta[i] * lin.r0[i] * W;
  return out;
}

/// <F_phiphi(P0, bar_beta*)[x, x], xi>.
inline double coeff_a_ls(const ModelParams& p, const QuadConfig& cfg = {})
{
  const auto lin = linearize(p, cfg);
  const auto ef = eigenfunctions(lin);
  return pairing(lin, second_derivative(lin, ef.kernel, ef.kernel), ef.adjoint);
}

/**
 * <F_phi,bar_beta(P0, bar_beta*) x, xi>. Only x2..x4 of the kernel vector
 * enter, so this is defined even where bar_beta* is not (e.g. alpha = 0).
 */
inline double transversality(const ModelParams& p, const QuadConfig& cfg = {})
{
  double bstar = 0.0;
  try {
    bstar = beta_star(p, cfg);
  }
  catch (const Error&) {
  }
  const Linearization lin(p, bstar, cfg);
  const auto ef = eigenfunctions(lin);
  return pairing(lin, mixed_derivative(lin, ef.kernel), ef.adjoint);
}

}  // namespace waning::ls

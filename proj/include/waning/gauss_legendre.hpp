#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace waning {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule
{
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendreRule(int order)
  {
    if (order < 1)
      throw std::invalid_argument("Gauss-Legendre order must be positive");
    nodes.resize(order);
    weights.resize(order);
    if (order == 1) {
      nodes[0] = 0.0;
      weights[0] = 2.0;
      return;
    }
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
      // Newton iteration from the Chebyshev-like initial guess
      double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16)
          break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes[i] = -x;
      nodes[order - 1 - i] = x;
      weights[i] = w;
      weights[order - 1 - i] = w;
    }
  }

  int order() const { return static_cast<int>(nodes.size()); }
};

}  // namespace waning

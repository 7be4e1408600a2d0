#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace peierls {

struct GaussRule {
  std::vector<double> x, w;  // nodes and weights on [0, 1]
};

// Gauss-Legendre rule by Newton iteration on the Legendre recurrence.
inline GaussRule gauss_legendre(int n) {
  GaussRule r{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    r.x[i] = 0.5 * (1 - z);
    r.w[i] = 1.0 / ((1 - z * z) * dp * dp);
  }
  return r;
}

inline const GaussRule& gauss16() {
  static const GaussRule rule = gauss_legendre(16);
  return rule;
}

}  // namespace peierls

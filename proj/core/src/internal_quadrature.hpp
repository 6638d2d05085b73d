#pragma once

// Internal helpers shared by the quadrature-based oracles (not installed).

#include <vector>

#include "avgkit/expr.hpp"

namespace avgkit::internal {

inline double factorial_d(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Composite-Simpson total of vector samples on a uniform grid (N even).
inline Vec simpson_total(const std::vector<Vec>& f, double h) {
  const size_t N = f.size() - 1;
  const size_t n = f[0].size();
  Vec acc(n, 0.0);
  for (size_t r = 0; r <= N; ++r) {
    const double w = (r == 0 || r == N) ? 1.0 : (r % 2 == 1 ? 4.0 : 2.0);
    for (size_t i = 0; i < n; ++i) acc[i] += w * f[r][i];
  }
  for (double& v : acc) v *= h / 3.0;
  return acc;
}

// Cumulative integral at every node: pair-Simpson between even nodes, and
// the three-point Newton-Cotes rule 5/12, 8/12, -1/12 for the odd half-step.
inline std::vector<Vec> cumulative_integral(const std::vector<Vec>& f, double h) {
  const size_t N = f.size() - 1;  // even
  const size_t n = f[0].size();
  std::vector<Vec> I(N + 1, Vec(n, 0.0));
  for (size_t r = 0; r + 2 <= N; r += 2) {
    for (size_t i = 0; i < n; ++i) {
      I[r + 1][i] =
          I[r][i] + h / 12.0 * (5.0 * f[r][i] + 8.0 * f[r + 1][i] - f[r + 2][i]);
      I[r + 2][i] = I[r][i] + h / 3.0 * (f[r][i] + 4.0 * f[r + 1][i] + f[r + 2][i]);
    }
  }
  return I;
}

}  // namespace avgkit::internal

#pragma once

#include <vector>

#include "avgkit/expr.hpp"

namespace avgkit {

// A T-periodic perturbed system in standard form,
//   x' = sum_{i=1..k} eps^i F_i(t, x),
// with smooth F_i : R x R^n -> R^n. The O(eps^{k+1}) remainder is taken
// identically zero.
struct System {
  int n = 0;     // dimension, 1..10
  double T = 0;  // period, > 0
  int k = 0;     // perturbation order, 1..5
  std::vector<std::vector<Expr>> F;  // F[i-1] has n components
};

// Validates shapes and ranges and runs the numeric periodicity check:
// |F_i(t+T, x) - F_i(t, x)| < 1e-9 at 64 deterministic sample points.
// Throws std::invalid_argument / Error on violation.
System make_system(int n, double T, int k, std::vector<std::vector<Expr>> F);

// Max deviation |F_i(t+T,x) - F_i(t,x)| over the deterministic sample set
// (the quantity the load-time check compares against 1e-9).
double periodicity_deviation(const System& sys, int samples = 64);

}  // namespace avgkit

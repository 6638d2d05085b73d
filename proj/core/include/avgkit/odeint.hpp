#pragma once

#include <functional>
#include <span>
#include <vector>

#include "avgkit/errors.hpp"
#include "avgkit/expr.hpp"

namespace avgkit {

enum class RkMethod { rk4_fixed, rk4_doubling };

// Integrator settings. For the fixed-step method the step is
// h = period / steps_per_period (scaled to the actual span); for
// step-doubling abs_tol/rel_tol control the local error. Both methods are
// fully deterministic.
struct IntegratorConfig {
  RkMethod method = RkMethod::rk4_fixed;
  int steps_per_period = 2048;   // >= 16
  double period = 6.283185307179586476925286766559;  // span that steps_per_period refers to
  double abs_tol = 1e-10;        // doubling mode, in (0, 1e-2]
  double rel_tol = 1e-10;        // doubling mode, in (0, 1e-2]
  long max_steps = 50'000'000;
};

// Throws std::invalid_argument when a field is out of range.
void validate(const IntegratorConfig& cfg);

using Rhs =
    std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

// Propagate y' = rhs(t, y) from t0 to t1 (t1 < t0 integrates backward).
// Throws NumericsError with the failure time if the state stops being
// finite, and when max_steps is exceeded.
Vec integrate(const Rhs& rhs, double t0, double t1, Vec y0,
              const IntegratorConfig& cfg);

// As integrate, but reports the state at each requested time.
// sample_times must be nondecreasing and within [t0, t1]; the fixed-step
// method lands on each sample exactly.
std::vector<Vec> integrate_dense(const Rhs& rhs, double t0, double t1, Vec y0,
                                 const IntegratorConfig& cfg,
                                 std::span<const double> sample_times);

}  // namespace avgkit

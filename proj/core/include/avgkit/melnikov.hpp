#pragma once

#include <memory>
#include <span>
#include <vector>

#include "avgkit/odeint.hpp"
#include "avgkit/system.hpp"
#include "avgkit/tensor.hpp"

namespace avgkit {

// The stacked integrals y_1(t,z)..y_k(t,z) at time t:
//   y_1(t,z) = int_0^t F_1(s,z) ds,
//   y_i(t,z) = int_0^t ( i! F_i(s,z)
//              + sum_{j=1}^{i-1} sum_{m=1}^{j} (i!/j!) d^m_x F_{i-j}(s,z)
//                  B_{j,m}(y_1,...,y_{j-m+1})(s,z) ) ds.
// All values start at zero at t = 0.
struct YStack {
  Vec z;
  double t = 0;
  std::vector<Vec> values;  // values[i-1] = y_i(t, z)
};

// Averaging engine for one system: owns the symbolic derivative tables of
// the F_i (built once) and produces y-stacks and averaged functions at
// arbitrary base points. All methods are const and thread-safe.
class MelnikovEvaluator {
 public:
  MelnikovEvaluator(const System& sys, IntegratorConfig cfg);
  ~MelnikovEvaluator();
  MelnikovEvaluator(MelnikovEvaluator&&) noexcept;

  const System& system() const;
  const IntegratorConfig& config() const;

  // Integrand of y_i at time t given the lower-order values; i = 1 returns
  // F_1(t, z).
  Vec y_rhs(int i, double t, std::span<const double> z,
            std::span<const Vec> lower_y) const;

  // One stacked ODE solve of all orders simultaneously from 0 to t_end.
  YStack compute_y(std::span<const double> z, double t_end) const;

  // f_i(z) = y_i(T, z) / i!, i = 1..k.
  std::vector<Vec> averaged_f(std::span<const double> z) const;

  // f_2(z) by direct nested Simpson quadrature of
  //   int_0^T ( F_2(t,z) + d_x F_1(t,z) int_0^t F_1(s,z) ds ) dt,
  // independent of the y-stack path; exists as a cross-check oracle.
  // Requires k >= 2.
  Vec f2_direct(std::span<const double> z) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Free-function conveniences that build a throwaway evaluator.
std::vector<Vec> averaged_f(const System& sys, std::span<const double> z,
                            const IntegratorConfig& cfg);
Vec f2_direct(const System& sys, std::span<const double> z,
              const IntegratorConfig& cfg);

}  // namespace avgkit

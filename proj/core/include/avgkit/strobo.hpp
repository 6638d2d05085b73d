#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "avgkit/melnikov.hpp"
#include "avgkit/tpoly.hpp"

namespace avgkit {

// Finite-difference settings for the derivative tensors d^m g_b(z).
// The step is h = noise_b^(1/(m+2)) * (1 + |z|), where noise_b models the
// evaluation noise of g_b: eps_machine for b = 1 and eps_machine^(0.55^(b-1))
// beyond, since g_b is itself FD-built for b >= 2 and each generation keeps
// only a bit over half of the remaining digits. Expect roughly 1e-9 for
// d g_1, 1e-6 for d g_2 / d^2 g_1, decaying further with depth.
struct FdConfig {
  double eps_machine = 1e-16;
  long cost_cap = 200000;  // max number of stacked f-solves per engine
};

// Stroboscopic averaged functions at one base point, with the exact
// t-polynomials behind them:
//   ty_1(t,z) = t g_1(z),
//   ty_i(t,z) = i! t g_i(z) + sum_{j=1}^{i-1} sum_{m=1}^{j} (i!/j!)
//               d^m g_{i-j}(z) int_0^t B_{j,m}(ty_1,...,ty_{j-m+1})(s,z) ds.
struct GSeries {
  Vec z;
  std::vector<Vec> g;          // g_1(z)..g_upto(z)
  std::vector<TPoly> tilde_y;  // ty_1..ty_upto at z
  struct Diagnostics {
    std::vector<double> fd_steps;     // h at the base point per m (first generation)
    std::vector<double> noise_model;  // modeled evaluation noise of g_b, b = 1..
    long f_evals = 0;                 // stacked solves consumed so far
    std::string warning;              // nonempty when the order cap was overridden
  } diagnostics;
};

// Order-vanishing scan: the smallest ell with |f_ell(z)| >= tau_zero(z) for
// some probe z, tau_zero(z) = tau_scale * (1 + |z|). ell == 0 means every
// order vanishes below threshold up to k.
struct VanishingReport {
  int ell = 0;
  std::vector<double> max_abs_f;  // max over probes of |f_i|_inf, i = 1..k
  double tau_scale = 0;
};

// Computes g_1..g_k at base points via the recursion
//   g_1(z) = f_1(z) / T,
//   g_i(z) = ( f_i(z) - sum_{j=1}^{i-1} sum_{m=1}^{j} (1/j!) d^m g_{i-j}(z)
//              int_0^T B_{j,m}(ty_1,...,ty_{j-m+1})(s,z) ds ) / T,
// with the Bell integrals evaluated exactly on the t-polynomials and the
// g-derivative tensors obtained by central finite differences (polarized
// directional stencils) of recursively evaluated lower-order g's.
//
// The engine memoizes f-solves and g-values by exact bit-pattern of the
// point, since FD stencils revisit clustered points. One engine instance is
// confined to a single thread; independent engines are independent.
class StroboEngine {
 public:
  StroboEngine(const System& sys, IntegratorConfig cfg, FdConfig fd = {});
  ~StroboEngine();
  StroboEngine(StroboEngine&&) noexcept;

  // upto_order <= 0 selects the default min(k, 4); asking beyond 4 works but
  // sets a warning in the diagnostics (nested-FD accuracy decays).
  GSeries strobo_g(std::span<const double> z, int upto_order = 0);

  Vec g_value(std::span<const double> z, int order);
  SymTensor g_tensor(std::span<const double> z, int order, int m);
  const std::vector<Vec>& averaged_f(std::span<const double> z);  // memoized

  long f_eval_count() const;
  const System& system() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One step of the tilde-y recursion, exposed for direct testing:
// builds ty_i from g_i(z), a tensor lookup (j, m) -> d^m g_{i-j}(z), and the
// lower polynomials ty_1..ty_{i-1}. The result has zero constant term and
// degree <= i.
TPoly tilde_y_step(int i, const Vec& g_i,
                   const std::function<SymTensor(int j, int m)>& tensors,
                   std::span<const TPoly> lower);

// g_2 by direct quadrature of the classical second-order expression
//   g_2(z) = (1/T) int_0^T ( F_2(t,z)
//            + d_x F_1(t,z) ( int_0^t F_1(s,z) ds - (T/2) g_1(z) ) ) dt,
// an oracle for the recursion at order 2, independent of the y-stack and
// FD machinery. Requires k >= 2.
Vec g2_closed_form(const System& sys, std::span<const double> z,
                   const IntegratorConfig& cfg);

VanishingReport first_nonvanishing(const System& sys,
                                   std::span<const Vec> probes,
                                   const IntegratorConfig& cfg,
                                   double tau_scale = 1e-8);

// Convenience wrapper around a throwaway engine.
GSeries strobo_g(const System& sys, std::span<const double> z,
                 const IntegratorConfig& cfg, FdConfig fd = {},
                 int upto_order = 0);

}  // namespace avgkit

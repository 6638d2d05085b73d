#pragma once

#include <functional>
#include <span>
#include <vector>

#include "avgkit/melnikov.hpp"
#include "avgkit/system.hpp"

namespace avgkit {

struct NewtonOptions {
  double tol = 1e-10;          // converged when |f(z)|_2 < tol
  int max_iter = 50;
  double fd_step_scale = 1e-6; // Jacobian step 1e-6 * (1 + |z|)
  double sigma_min_rel = 1e-6; // simple iff sigma_min > rel * max(|J|_2, 1)
  int max_damping = 8;         // step halvings per iteration
};

// Result of damped Newton on a point function R^n -> R^n.
struct ZeroResult {
  Vec z_star;
  std::vector<double> jacobian;  // n x n, row-major, at z_star
  double residual_norm = 0;
  double sigma_min = 0;          // smallest singular value of jacobian
  bool simple = false;           // jacobian nonsingular per the sigma test
  bool converged = false;
  int iterations = 0;
};

ZeroResult find_zero(const std::function<Vec(const Vec&)>& f, Vec z0,
                     const NewtonOptions& opt = {});

// x(T, z, eps) - z for the full right-hand side sum_i eps^i F_i(t, x).
Vec displacement(const System& sys, std::span<const double> z, double eps,
                 const IntegratorConfig& cfg);

// Per-epsilon fixed points of the time-T map near a simple zero z* of the
// first non-vanishing averaged function, with the certificate
// |x(T, z_eps, eps) - z_eps| < 1e-9 (1 + |z_eps|).
struct OrbitValidation {
  std::vector<double> eps_list;
  std::vector<Vec> z_eps;
  std::vector<bool> ok;                  // converged + certificate holds
  std::vector<double> distances;         // |z_eps - z*|_2
  std::vector<double> displacement_norms;
  std::vector<double> sigma_mins;        // of the displacement Jacobian
  double slope_estimate = 0;             // log-log fit of distance vs eps (NaN if < 2 points)
};

OrbitValidation validate_orbit(const System& sys, const Vec& z_star,
                               std::span<const double> eps_list,
                               const IntegratorConfig& cfg);

// Residual of the time-T expansion, r(eps) = |x(T,z,eps) - z - sum eps^i f_i(z)|_2,
// and the least-squares slope of log r against log eps. Needs >= 3 epsilons.
struct OrderStudy {
  std::vector<double> eps_list;
  std::vector<double> residuals;
  double slope = 0;
};

OrderStudy order_study(const System& sys, std::span<const double> z,
                       std::span<const double> eps_list,
                       const IntegratorConfig& cfg);

// Least-squares slope of log y against log x (x, y > 0).
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace avgkit

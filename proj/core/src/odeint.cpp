#include "avgkit/odeint.hpp"

#include <algorithm>
#include <cmath>

namespace avgkit {

void validate(const IntegratorConfig& cfg) {
  if (cfg.steps_per_period < 16)
    throw std::invalid_argument("steps_per_period must be >= 16");
  if (cfg.period <= 0) throw std::invalid_argument("period must be > 0");
  if (cfg.method == RkMethod::rk4_doubling) {
    if (!(cfg.abs_tol > 0 && cfg.abs_tol <= 1e-2))
      throw std::invalid_argument("abs_tol must be in (0, 1e-2]");
    if (!(cfg.rel_tol > 0 && cfg.rel_tol <= 1e-2))
      throw std::invalid_argument("rel_tol must be in (0, 1e-2]");
  }
  if (cfg.max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
}

namespace {

bool finite(std::span<const double> y) {
  for (double v : y)
    if (!std::isfinite(v)) return false;
  return true;
}

[[noreturn]] void blow_up(double t) {
  throw NumericsError("non-finite state at t = " + std::to_string(t));
}

struct Rk4Scratch {
  Vec k1, k2, k3, k4, tmp;
  explicit Rk4Scratch(size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

void rk4_step(const Rhs& rhs, double t, double h, Vec& y, Rk4Scratch& s) {
  const size_t n = y.size();
  rhs(t, y, s.k1);
  for (size_t i = 0; i < n; ++i) s.tmp[i] = y[i] + 0.5 * h * s.k1[i];
  rhs(t + 0.5 * h, s.tmp, s.k2);
  for (size_t i = 0; i < n; ++i) s.tmp[i] = y[i] + 0.5 * h * s.k2[i];
  rhs(t + 0.5 * h, s.tmp, s.k3);
  for (size_t i = 0; i < n; ++i) s.tmp[i] = y[i] + h * s.k3[i];
  rhs(t + h, s.tmp, s.k4);
  for (size_t i = 0; i < n; ++i)
    y[i] += h / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
}

// Fixed-step RK4 over [t0, t1] with the step count derived from
// steps_per_period scaled to the span. Lands on t1 exactly.
Vec run_fixed(const Rhs& rhs, double t0, double t1, Vec y, long& budget,
              const IntegratorConfig& cfg) {
  const double span = t1 - t0;
  if (span == 0.0) return y;
  const long n_steps = std::max<long>(
      1, (long)std::ceil(std::abs(span) / cfg.period * cfg.steps_per_period));
  if (n_steps > budget) throw NumericsError("max_steps exceeded");
  budget -= n_steps;
  const double h = span / (double)n_steps;
  Rk4Scratch s(y.size());
  for (long i = 0; i < n_steps; ++i) {
    const double t = t0 + h * (double)i;
    rk4_step(rhs, t, h, y, s);
    if (!finite(y)) blow_up(t + h);
  }
  return y;
}

// Classical step-doubling: compare one h-step with two h/2-steps, accept the
// Richardson-corrected value, adapt h deterministically.
Vec run_doubling(const Rhs& rhs, double t0, double t1, Vec y, long& budget,
                 const IntegratorConfig& cfg) {
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  double t = t0;
  double h = dir * cfg.period / cfg.steps_per_period;
  const size_t n = y.size();
  Rk4Scratch s(n);
  Vec full(n), half(n);
  while (dir * (t1 - t) > 0) {
    if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
    if (--budget < 0) throw NumericsError("max_steps exceeded");

    full = y;
    rk4_step(rhs, t, h, full, s);
    half = y;
    rk4_step(rhs, t, 0.5 * h, half, s);
    rk4_step(rhs, t + 0.5 * h, 0.5 * h, half, s);
    if (!finite(full) || !finite(half)) blow_up(t + h);

    double err = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double scale = cfg.abs_tol + cfg.rel_tol * std::abs(half[i]);
      err = std::max(err, std::abs(half[i] - full[i]) / scale);
    }
    if (err <= 1.0) {
      for (size_t i = 0; i < n; ++i) y[i] = half[i] + (half[i] - full[i]) / 15.0;
      t += h;
      if (!finite(y)) blow_up(t);
    }
    const double grow =
        err > 0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
    h *= grow;
  }
  return y;
}

}  // namespace

Vec integrate(const Rhs& rhs, double t0, double t1, Vec y0,
              const IntegratorConfig& cfg) {
  validate(cfg);
  if (!finite(y0)) blow_up(t0);
  long budget = cfg.max_steps;
  if (cfg.method == RkMethod::rk4_fixed)
    return run_fixed(rhs, t0, t1, std::move(y0), budget, cfg);
  return run_doubling(rhs, t0, t1, std::move(y0), budget, cfg);
}

std::vector<Vec> integrate_dense(const Rhs& rhs, double t0, double t1, Vec y0,
                                 const IntegratorConfig& cfg,
                                 std::span<const double> sample_times) {
  validate(cfg);
  const double lo = std::min(t0, t1), hi = std::max(t0, t1);
  double prev_s = t0;
  for (double s : sample_times) {
    if (s < lo || s > hi)
      throw std::invalid_argument("sample time outside integration span");
    if ((t1 >= t0 && s < prev_s) || (t1 < t0 && s > prev_s))
      throw std::invalid_argument("sample times must follow integration direction");
    prev_s = s;
  }
  long budget = cfg.max_steps;
  std::vector<Vec> out;
  out.reserve(sample_times.size());
  Vec y = std::move(y0);
  double t = t0;
  for (double s : sample_times) {
    if (cfg.method == RkMethod::rk4_fixed)
      y = run_fixed(rhs, t, s, std::move(y), budget, cfg);
    else
      y = run_doubling(rhs, t, s, std::move(y), budget, cfg);
    t = s;
    out.push_back(y);
  }
  return out;
}

}  // namespace avgkit

#include "avgkit/orbits.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace avgkit {

namespace {

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Eigen::MatrixXd fd_jacobian(const std::function<Vec(const Vec&)>& f,
                            const Vec& z, double step_scale) {
  const int n = (int)z.size();
  const double h = step_scale * (1.0 + norm2(z));
  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    Vec zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    const Vec fp = f(zp), fm = f(zm);
    for (int i = 0; i < n; ++i) J(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return J;
}

// Bisection fallback for n = 1: expand around z0 for a sign change, then
// bisect to tolerance. Returns false when no bracket is found.
bool bisect_1d(const std::function<Vec(const Vec&)>& f, double z0, double tol,
               double& root) {
  auto f1 = [&](double z) { return f(Vec{z})[0]; };
  const double f0 = f1(z0);
  if (f0 == 0.0) {
    root = z0;
    return true;
  }
  double a = z0, b = z0, fa = f0, fb = f0;
  double d = 0.1 * (1.0 + std::abs(z0));
  for (int i = 0; i < 40; ++i) {
    a = z0 - d;
    fa = f1(a);
    if (fa * f0 < 0) {
      b = z0;
      fb = f0;
      break;
    }
    b = z0 + d;
    fb = f1(b);
    if (fb * f0 < 0) {
      a = z0;
      fa = f0;
      break;
    }
    d *= 2.0;
  }
  if (fa * fb > 0) return false;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (a + b);
    const double fm = f1(mid);
    if (std::abs(fm) < tol || 0.5 * (b - a) < 1e-15 * (1.0 + std::abs(mid))) {
      root = mid;
      return true;
    }
    if (fa * fm <= 0) {
      b = mid;
      fb = fm;
    } else {
      a = mid;
      fa = fm;
    }
  }
  root = 0.5 * (a + b);
  return std::abs(f1(root)) < tol;
}

}  // namespace

ZeroResult find_zero(const std::function<Vec(const Vec&)>& f, Vec z0,
                     const NewtonOptions& opt) {
  const int n = (int)z0.size();
  ZeroResult res;
  Vec z = std::move(z0);
  Vec fz = f(z);
  double fnorm = norm2(fz);

  // Polish well past the nominal tolerance: the simplicity test needs the
  // iterate close enough that a collapsing derivative is visible.
  const double polish = opt.tol * 1e-3;
  int it = 0;
  for (; it < opt.max_iter && fnorm >= polish; ++it) {
    const Eigen::MatrixXd J = fd_jacobian(f, z, opt.fd_step_scale);
    Eigen::Map<const Eigen::VectorXd> rhs(fz.data(), n);
    const Eigen::VectorXd step = J.fullPivLu().solve(-rhs);
    if (!step.allFinite()) break;

    // Damping: halve until the residual actually decreases.
    double lambda = 1.0;
    bool accepted = false;
    Vec z_new(n);
    for (int d = 0; d <= opt.max_damping; ++d) {
      for (int i = 0; i < n; ++i) z_new[i] = z[i] + lambda * step(i);
      Vec f_new;
      try {
        f_new = f(z_new);
      } catch (const Error&) {
        lambda *= 0.5;
        continue;
      }
      const double norm_new = norm2(f_new);
      if (norm_new < fnorm) {
        z = z_new;
        fz = std::move(f_new);
        fnorm = norm_new;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      if (n == 1 && fnorm >= opt.tol) {
        double root;
        if (bisect_1d(f, z[0], opt.tol, root)) {
          z = {root};
          fz = f(z);
          fnorm = norm2(fz);
        }
      }
      break;  // Newton stalled
    }
  }

  res.z_star = z;
  res.residual_norm = fnorm;
  res.converged = fnorm < opt.tol;
  res.iterations = it;

  const Eigen::MatrixXd J = fd_jacobian(f, z, opt.fd_step_scale);
  res.jacobian.resize(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) res.jacobian[i * n + j] = J(i, j);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  res.sigma_min = svd.singularValues()(n - 1);
  const double sigma_max = svd.singularValues()(0);
  // The scale floor keeps a collapsing derivative (double root) from
  // passing the relative test.
  res.simple = res.sigma_min > opt.sigma_min_rel * std::max(sigma_max, 1.0);
  return res;
}

Vec displacement(const System& sys, std::span<const double> z, double eps,
                 const IntegratorConfig& cfg) {
  if ((int)z.size() != sys.n) throw std::invalid_argument("z dimension mismatch");
  IntegratorConfig c = cfg;
  c.period = sys.T;
  validate(c);

  // Full right-hand side sum_i eps^i F_i(t, x), evaluated along the orbit.
  const Rhs rhs = [&sys, eps](double t, std::span<const double> x,
                              std::span<double> dx) {
    for (int c2 = 0; c2 < sys.n; ++c2) dx[c2] = 0.0;
    double w = 1.0;
    for (int i = 0; i < sys.k; ++i) {
      w *= eps;
      for (int c2 = 0; c2 < sys.n; ++c2) dx[c2] += w * sys.F[i][c2].eval(t, x);
    }
  };
  const Vec xT = integrate(rhs, 0.0, sys.T, Vec(z.begin(), z.end()), c);
  Vec out(sys.n);
  for (int i = 0; i < sys.n; ++i) out[i] = xT[i] - z[i];
  return out;
}

OrbitValidation validate_orbit(const System& sys, const Vec& z_star,
                               std::span<const double> eps_list,
                               const IntegratorConfig& cfg) {
  OrbitValidation val;
  val.slope_estimate = std::numeric_limits<double>::quiet_NaN();
  for (double eps : eps_list) {
    val.eps_list.push_back(eps);
    // A failure at one epsilon is recorded in its entry, never fatal.
    try {
      const auto disp = [&](const Vec& z) { return displacement(sys, z, eps, cfg); };
      NewtonOptions opt;
      opt.tol = 1e-12 * (1.0 + norm2(z_star));
      opt.max_iter = 60;
      ZeroResult zr = find_zero(disp, z_star, opt);

      const double orbit_tol = 1e-9 * (1.0 + norm2(zr.z_star));
      const double dnorm = norm2(disp(zr.z_star));
      Vec dist(sys.n);
      for (int i = 0; i < sys.n; ++i) dist[i] = zr.z_star[i] - z_star[i];

      val.z_eps.push_back(zr.z_star);
      val.ok.push_back(zr.converged && dnorm < orbit_tol);
      val.distances.push_back(norm2(dist));
      val.displacement_norms.push_back(dnorm);
      val.sigma_mins.push_back(zr.sigma_min);
    } catch (const Error&) {
      val.z_eps.push_back(Vec(sys.n, std::numeric_limits<double>::quiet_NaN()));
      val.ok.push_back(false);
      val.distances.push_back(std::numeric_limits<double>::quiet_NaN());
      val.displacement_norms.push_back(std::numeric_limits<double>::quiet_NaN());
      val.sigma_mins.push_back(0.0);
    }
  }
  std::vector<double> xs, ys;
  for (size_t i = 0; i < val.eps_list.size(); ++i)
    if (val.ok[i] && val.distances[i] > 0) {
      xs.push_back(val.eps_list[i]);
      ys.push_back(val.distances[i]);
    }
  if (xs.size() >= 2) val.slope_estimate = fit_loglog_slope(xs, ys);
  return val;
}

OrderStudy order_study(const System& sys, std::span<const double> z,
                       std::span<const double> eps_list,
                       const IntegratorConfig& cfg) {
  if (eps_list.size() < 3)
    throw std::invalid_argument("order study needs >= 3 epsilon values");
  IntegratorConfig c = cfg;
  c.period = sys.T;
  const auto fs = averaged_f(sys, z, c);

  OrderStudy study;
  for (double eps : eps_list) {
    const Vec d = displacement(sys, z, eps, c);
    Vec r = d;
    double w = 1.0;
    for (int i = 0; i < sys.k; ++i) {
      w *= eps;
      for (int cc = 0; cc < sys.n; ++cc) r[cc] -= w * fs[i][cc];
    }
    study.eps_list.push_back(eps);
    study.residuals.push_back(norm2(r));
  }
  study.slope = fit_loglog_slope(study.eps_list, study.residuals);
  return study;
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("slope fit needs >= 2 matched points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = (double)x.size();
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0))
      throw std::invalid_argument("slope fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace avgkit

#include "avgkit/melnikov.hpp"

#include <cmath>

#include "avgkit/bell.hpp"
#include "internal_quadrature.hpp"

namespace avgkit {

using internal::cumulative_integral;
using internal::factorial_d;
using internal::simpson_total;

struct MelnikovEvaluator::Impl {
  System sys;
  IntegratorConfig cfg;
  std::vector<FrechetTable> tables;  // tables[d-1] for F_d, orders 0..k-d

  Impl(const System& s, IntegratorConfig c) : sys(s), cfg(std::move(c)) {
    validate(cfg);
    cfg.period = sys.T;
    tables.reserve(sys.k);
    for (int d = 1; d <= sys.k; ++d)
      tables.emplace_back(sys.F[d - 1], sys.n, std::max(0, sys.k - d));
  }

  // The double sum of the y_i integrand for one i given all tensors at
  // (t, z) and the lower-order values.
  Vec rhs_order(int i, std::span<const Vec> fields,
                const std::vector<std::vector<SymTensor>>& tens,
                std::span<const Vec> y) const {
    Vec out = fields[i - 1];
    const double ifac = factorial_d(i);
    for (double& v : out) v *= ifac;
    for (int j = 1; j <= i - 1; ++j) {
      const double w = ifac / factorial_d(j);
      for (int m = 1; m <= j; ++m) {
        const Vec term =
            bell_apply(j, m, y.first(j - m + 1), tens[i - j - 1][m - 1]);
        for (int c = 0; c < sys.n; ++c) out[c] += w * term[c];
      }
    }
    return out;
  }

  void stacked_rhs(double t, std::span<const double> z,
                   std::span<const double> Y, std::span<double> dY) const {
    const int n = sys.n, k = sys.k;
    std::vector<Vec> fields(k);
    for (int d = 1; d <= k; ++d) fields[d - 1] = tables[d - 1].eval_field(t, z);
    // tens[d-1][m-1] = d^m_x F_d(t, z), needed for d + m <= k
    std::vector<std::vector<SymTensor>> tens(std::max(0, k - 1));
    for (int d = 1; d <= k - 1; ++d) {
      tens[d - 1].reserve(k - d);
      for (int m = 1; m <= k - d; ++m) tens[d - 1].push_back(tables[d - 1].eval(m, t, z));
    }
    std::vector<Vec> y(k);
    for (int i = 1; i <= k; ++i)
      y[i - 1] = Vec(Y.begin() + (i - 1) * n, Y.begin() + i * n);
    for (int i = 1; i <= k; ++i) {
      const Vec out = rhs_order(i, fields, tens, std::span<const Vec>(y.data(), i));
      std::copy(out.begin(), out.end(), dY.begin() + (i - 1) * n);
    }
  }
};

MelnikovEvaluator::MelnikovEvaluator(const System& sys, IntegratorConfig cfg)
    : impl_(std::make_unique<Impl>(sys, std::move(cfg))) {}
MelnikovEvaluator::~MelnikovEvaluator() = default;
MelnikovEvaluator::MelnikovEvaluator(MelnikovEvaluator&&) noexcept = default;

const System& MelnikovEvaluator::system() const { return impl_->sys; }
const IntegratorConfig& MelnikovEvaluator::config() const { return impl_->cfg; }

Vec MelnikovEvaluator::y_rhs(int i, double t, std::span<const double> z,
                             std::span<const Vec> lower_y) const {
  if (i < 1 || i > impl_->sys.k)
    throw std::invalid_argument("order index out of range");
  if ((int)lower_y.size() < i - 1)
    throw std::invalid_argument("y_rhs needs all lower-order values");
  std::vector<Vec> fields(i);
  for (int d = 1; d <= i; ++d) fields[d - 1] = impl_->tables[d - 1].eval_field(t, z);
  std::vector<std::vector<SymTensor>> tens(std::max(0, i - 1));
  for (int d = 1; d <= i - 1; ++d)
    for (int m = 1; m <= i - d; ++m)
      tens[d - 1].push_back(impl_->tables[d - 1].eval(m, t, z));
  return impl_->rhs_order(i, fields, tens, lower_y);
}

YStack MelnikovEvaluator::compute_y(std::span<const double> z,
                                    double t_end) const {
  const auto& sys = impl_->sys;
  if ((int)z.size() != sys.n) throw std::invalid_argument("z dimension mismatch");
  const Vec zv(z.begin(), z.end());
  Vec Y0(sys.k * sys.n, 0.0);
  const Rhs rhs = [this, &zv](double t, std::span<const double> Y,
                              std::span<double> dY) {
    impl_->stacked_rhs(t, zv, Y, dY);
  };
  const Vec Y = integrate(rhs, 0.0, t_end, std::move(Y0), impl_->cfg);
  YStack out;
  out.z = zv;
  out.t = t_end;
  out.values.resize(sys.k);
  for (int i = 1; i <= sys.k; ++i)
    out.values[i - 1] = Vec(Y.begin() + (i - 1) * sys.n, Y.begin() + i * sys.n);
  return out;
}

std::vector<Vec> MelnikovEvaluator::averaged_f(std::span<const double> z) const {
  YStack ys = compute_y(z, impl_->sys.T);
  for (int i = 1; i <= impl_->sys.k; ++i) {
    const double inv = 1.0 / factorial_d(i);
    for (double& v : ys.values[i - 1]) v *= inv;
  }
  return std::move(ys.values);
}

Vec MelnikovEvaluator::f2_direct(std::span<const double> z) const {
  const auto& sys = impl_->sys;
  if (sys.k < 2) throw std::invalid_argument("f2_direct requires k >= 2");
  if ((int)z.size() != sys.n) throw std::invalid_argument("z dimension mismatch");

  size_t N = (size_t)impl_->cfg.steps_per_period;
  if (N % 2) ++N;
  const double h = sys.T / (double)N;

  std::vector<Vec> f1(N + 1);
  for (size_t r = 0; r <= N; ++r) f1[r] = impl_->tables[0].eval_field(h * (double)r, z);
  const std::vector<Vec> y1 = cumulative_integral(f1, h);

  std::vector<Vec> integrand(N + 1, Vec(sys.n));
  for (size_t r = 0; r <= N; ++r) {
    const double t = h * (double)r;
    const Vec f2v = impl_->tables[1].eval_field(t, z);
    const SymTensor jac = impl_->tables[0].eval(1, t, z);
    const Vec jy = jac.apply(std::span<const Vec>(&y1[r], 1));
    for (int i = 0; i < sys.n; ++i) integrand[r][i] = f2v[i] + jy[i];
  }
  return simpson_total(integrand, h);
}

std::vector<Vec> averaged_f(const System& sys, std::span<const double> z,
                            const IntegratorConfig& cfg) {
  return MelnikovEvaluator(sys, cfg).averaged_f(z);
}

Vec f2_direct(const System& sys, std::span<const double> z,
              const IntegratorConfig& cfg) {
  return MelnikovEvaluator(sys, cfg).f2_direct(z);
}

}  // namespace avgkit

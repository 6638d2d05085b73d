#include "avgkit/strobo.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <unordered_map>

#include "avgkit/bell.hpp"
#include "internal_quadrature.hpp"

namespace avgkit {

using internal::cumulative_integral;
using internal::factorial_d;
using internal::simpson_total;

namespace {

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Memo keys compare the exact bit pattern of the point, since FD stencils
// revisit identical doubles.
struct PointKey {
  Vec v;
  bool operator==(const PointKey& o) const {
    if (v.size() != o.v.size()) return false;
    return std::memcmp(v.data(), o.v.data(), v.size() * sizeof(double)) == 0;
  }
};

struct PointKeyHash {
  size_t operator()(const PointKey& k) const {
    // FNV-1a over the raw bytes
    size_t h = 1469598103934665603ull;
    const unsigned char* p = reinterpret_cast<const unsigned char*>(k.v.data());
    for (size_t i = 0; i < k.v.size() * sizeof(double); ++i)
      h = (h ^ p[i]) * 1099511628211ull;
    return h;
  }
};

struct TensorKey {
  PointKey z;
  int order, m;
  bool operator==(const TensorKey& o) const {
    return order == o.order && m == o.m && z == o.z;
  }
};

struct TensorKeyHash {
  size_t operator()(const TensorKey& k) const {
    return PointKeyHash{}(k.z) ^ (size_t)(k.order * 131 + k.m);
  }
};

// Central finite-difference weights for the m-th directional derivative,
// as (offset, weight / h^m) pairs.
struct Stencil {
  std::vector<std::pair<int, double>> taps;
};

Stencil directional_stencil(int m) {
  switch (m) {
    case 1: return {{{1, 0.5}, {-1, -0.5}}};
    case 2: return {{{1, 1.0}, {0, -2.0}, {-1, 1.0}}};
    case 3: return {{{2, 0.5}, {1, -1.0}, {-1, 1.0}, {-2, -0.5}}};
    case 4: return {{{2, 1.0}, {1, -4.0}, {0, 6.0}, {-1, -4.0}, {-2, 1.0}}};
    default: throw std::invalid_argument("FD tensors support m = 1..4");
  }
}

}  // namespace

struct StroboEngine::Impl {
  System sys;
  IntegratorConfig cfg;
  FdConfig fd;
  MelnikovEvaluator mel;
  long f_evals = 0;

  std::unordered_map<PointKey, std::vector<Vec>, PointKeyHash> f_memo;
  struct GEntry {
    std::vector<Vec> g;
    std::vector<TPoly> ty;
  };
  std::unordered_map<PointKey, GEntry, PointKeyHash> g_memo;
  std::unordered_map<TensorKey, SymTensor, TensorKeyHash> tensor_memo;

  Impl(const System& s, IntegratorConfig c, FdConfig f)
      : sys(s), cfg(std::move(c)), fd(f), mel(s, cfg) {
    cfg.period = sys.T;
  }

  const std::vector<Vec>& f_at(const Vec& z) {
    auto it = f_memo.find(PointKey{z});
    if (it != f_memo.end()) return it->second;
    if (++f_evals > fd.cost_cap)
      throw NumericsError("stroboscopic recursion cost cap exceeded (" +
                          std::to_string(fd.cost_cap) + " f-solves)");
    return f_memo.emplace(PointKey{z}, mel.averaged_f(z)).first->second;
  }

  // g_order is itself FD-built for order >= 2, so its evaluation noise is
  // no longer machine epsilon: each differentiation generation keeps only
  // a bit over half of the remaining digits (optimal central step turns
  // noise delta into ~delta^(2/3), with scale factors eating the rest).
  // The step for d^m g_b must be tuned to that generation's noise or the
  // quotient amplifies roundoff by orders of magnitude.
  double fd_noise(int order) const {
    double delta = fd.eps_machine;
    for (int b = 2; b <= order; ++b) delta = std::pow(delta, 0.55);
    return delta;
  }

  double fd_step(int m, int order, const Vec& z) const {
    return std::pow(fd_noise(order), 1.0 / (m + 2)) * (1.0 + norm2(z));
  }

  // g_order evaluated at z (building lower orders as needed).
  const Vec& g_value(const Vec& z, int order) {
    return ensure_g(z, order).g[order - 1];
  }

  const GEntry& ensure_g(const Vec& z, int upto) {
    // Reference stability of unordered_map entries lets the recursion
    // insert stencil points while this entry is being extended.
    GEntry& e = g_memo[PointKey{z}];
    const double T = sys.T;
    for (int i = (int)e.g.size() + 1; i <= upto; ++i) {
      const std::vector<Vec>& fs = f_at(z);
      if (i == 1) {
        Vec g1 = fs[0];
        for (double& v : g1) v /= T;
        e.ty.push_back(TPoly::monomial(1, g1));
        e.g.push_back(std::move(g1));
        continue;
      }
      Vec acc = fs[i - 1];  // f_i(z) minus the Bell corrections, then / T
      TPoly ty_extra(sys.n);
      for (int j = 1; j <= i - 1; ++j) {
        for (int m = 1; m <= j; ++m) {
          const SymTensor& tn = g_deriv(z, i - j, m);
          const TPoly B = bell_apply_tpoly(
              j, m, std::span<const TPoly>(e.ty.data(), j - m + 1), tn);
          const TPoly P = B.integral_from_zero();
          const Vec PT = P.eval(T);
          const double wj = 1.0 / factorial_d(j);
          for (int c = 0; c < sys.n; ++c) acc[c] -= wj * PT[c];
          ty_extra.add_scaled(P, factorial_d(i) / factorial_d(j));
        }
      }
      Vec gi = acc;
      for (double& v : gi) v /= T;
      Vec lead = gi;
      for (double& v : lead) v *= factorial_d(i);
      ty_extra.add_term(1, lead);
      ty_extra.trim();
      if (ty_extra.degree() > i)
        throw Error("tilde-y degree bound violated (internal)");
      e.ty.push_back(std::move(ty_extra));
      e.g.push_back(std::move(gi));
    }
    return e;
  }

  // d^m g_order(z) by polarized central differences. Each sorted index
  // tuple's entry is recovered from directional derivatives
  //   A(v_1..v_m) = (1/m!) sum_{S != empty} (-1)^{m-|S|} Q(sum_{l in S} v_l)
  // with Q(u) the m-th derivative of g along u.
  const SymTensor& g_deriv(const Vec& z, int order, int m) {
    const TensorKey key{PointKey{z}, order, m};
    auto it = tensor_memo.find(key);
    if (it != tensor_memo.end()) return it->second;

    const int n = sys.n;
    const double h = fd_step(m, order, z);
    const Stencil st = directional_stencil(m);

    std::map<std::vector<int>, Vec> q_cache;  // direction -> Q(u)
    auto Q = [&](const std::vector<int>& u) -> const Vec& {
      auto qit = q_cache.find(u);
      if (qit != q_cache.end()) return qit->second;
      Vec acc(n, 0.0);
      for (const auto& [off, w] : st.taps) {
        Vec p(z);
        for (int c = 0; c < n; ++c) p[c] += off * h * u[c];
        const Vec gv = g_value(p, order);
        for (int c = 0; c < n; ++c) acc[c] += w * gv[c];
      }
      const double hm = std::pow(h, m);
      for (double& v : acc) v /= hm;
      return q_cache.emplace(u, std::move(acc)).first->second;
    };

    SymTensor out(n, m);
    std::vector<int> idx(m, 0);
    // iterate sorted tuples; fill all permutations of each
    std::vector<int> tup(m, 0);
    const double mfac = factorial_d(m);
    auto fill_perms = [&](const std::vector<int>& tuple, const Vec& val) {
      // enumerate all full index tuples, set those whose sorted form matches
      std::vector<int> full(m, 0);
      for (;;) {
        std::vector<int> s = full;
        std::sort(s.begin(), s.end());
        if (s == tuple)
          for (int i = 0; i < n; ++i) out.set_entry(i, full, val[i]);
        int l = m - 1;
        for (; l >= 0; --l) {
          if (++full[l] < n) break;
          full[l] = 0;
        }
        if (l < 0) break;
      }
    };
    std::function<void(int, int)> rec = [&](int pos, int lo) {
      if (pos == m) {
        Vec val(n, 0.0);
        const int subsets = 1 << m;
        for (int mask = 1; mask < subsets; ++mask) {
          std::vector<int> u(n, 0);
          int bits = 0;
          for (int l = 0; l < m; ++l)
            if (mask & (1 << l)) {
              ++u[tup[l]];
              ++bits;
            }
          const double sign = ((m - bits) % 2 == 0) ? 1.0 : -1.0;
          const Vec& q = Q(u);
          for (int c = 0; c < n; ++c) val[c] += sign * q[c];
        }
        for (double& v : val) v /= mfac;
        fill_perms(tup, val);
        return;
      }
      for (int i = lo; i < n; ++i) {
        tup[pos] = i;
        rec(pos + 1, i);
      }
    };
    rec(0, 0);
    return tensor_memo.emplace(key, std::move(out)).first->second;
  }
};

StroboEngine::StroboEngine(const System& sys, IntegratorConfig cfg, FdConfig fd)
    : impl_(std::make_unique<Impl>(sys, std::move(cfg), fd)) {}
StroboEngine::~StroboEngine() = default;
StroboEngine::StroboEngine(StroboEngine&&) noexcept = default;

const System& StroboEngine::system() const { return impl_->sys; }
long StroboEngine::f_eval_count() const { return impl_->f_evals; }

const std::vector<Vec>& StroboEngine::averaged_f(std::span<const double> z) {
  return impl_->f_at(Vec(z.begin(), z.end()));
}

Vec StroboEngine::g_value(std::span<const double> z, int order) {
  if (order < 1 || order > impl_->sys.k)
    throw std::invalid_argument("g order out of range");
  return impl_->g_value(Vec(z.begin(), z.end()), order);
}

SymTensor StroboEngine::g_tensor(std::span<const double> z, int order, int m) {
  if (order < 1 || order > impl_->sys.k)
    throw std::invalid_argument("g order out of range");
  return impl_->g_deriv(Vec(z.begin(), z.end()), order, m);
}

GSeries StroboEngine::strobo_g(std::span<const double> z, int upto_order) {
  const int k = impl_->sys.k;
  int upto = upto_order > 0 ? upto_order : std::min(k, 4);
  if (upto > k) throw std::invalid_argument("requested order beyond system k");
  GSeries out;
  out.z = Vec(z.begin(), z.end());
  if (upto_order > 4)
    out.diagnostics.warning =
        "orders beyond 4 use deeply nested finite differences; expect reduced accuracy";
  const auto& e = impl_->ensure_g(out.z, upto);
  out.g.assign(e.g.begin(), e.g.begin() + upto);
  out.tilde_y.assign(e.ty.begin(), e.ty.begin() + upto);
  for (int m = 1; m <= std::max(1, upto - 1); ++m)
    out.diagnostics.fd_steps.push_back(impl_->fd_step(m, 1, out.z));
  for (int b = 1; b <= upto; ++b)
    out.diagnostics.noise_model.push_back(impl_->fd_noise(b));
  out.diagnostics.f_evals = impl_->f_evals;
  return out;
}

TPoly tilde_y_step(int i, const Vec& g_i,
                   const std::function<SymTensor(int j, int m)>& tensors,
                   std::span<const TPoly> lower) {
  if (i < 1) throw std::invalid_argument("order must be >= 1");
  if ((int)lower.size() < i - 1)
    throw std::invalid_argument("tilde_y_step needs ty_1..ty_{i-1}");
  const int n = (int)g_i.size();
  TPoly out(n);
  for (int j = 1; j <= i - 1; ++j) {
    for (int m = 1; m <= j; ++m) {
      const SymTensor tn = tensors(j, m);
      if (tn.order() != m || tn.dim() != n)
        throw std::invalid_argument("tensor shape mismatch in tilde_y_step");
      const TPoly B = bell_apply_tpoly(j, m, lower.first(j - m + 1), tn);
      out.add_scaled(B.integral_from_zero(),
                     factorial_d(i) / factorial_d(j));
    }
  }
  Vec lead = g_i;
  for (double& v : lead) v *= factorial_d(i);
  out.add_term(1, lead);
  out.trim();
  if (out.degree() > i) throw Error("tilde-y degree bound violated (internal)");
  return out;
}

Vec g2_closed_form(const System& sys, std::span<const double> z,
                   const IntegratorConfig& cfg) {
  if (sys.k < 2) throw std::invalid_argument("g2_closed_form requires k >= 2");
  if ((int)z.size() != sys.n) throw std::invalid_argument("z dimension mismatch");
  validate(cfg);

  FrechetTable t1(sys.F[0], sys.n, 1);
  FrechetTable t2(sys.F[1], sys.n, 0);

  size_t N = (size_t)cfg.steps_per_period;
  if (N % 2) ++N;
  const double h = sys.T / (double)N;

  std::vector<Vec> f1(N + 1);
  for (size_t r = 0; r <= N; ++r) f1[r] = t1.eval_field(h * (double)r, z);
  const std::vector<Vec> y1 = cumulative_integral(f1, h);

  Vec g1 = simpson_total(f1, h);
  for (double& v : g1) v /= sys.T;

  // (1/T) int_0^T [ F_2 + dF_1 ( int_0^t F_1 ds - (T/2) g_1 ) ] dt.
  std::vector<Vec> integrand(N + 1, Vec(sys.n));
  for (size_t r = 0; r <= N; ++r) {
    const double t = h * (double)r;
    Vec inner = y1[r];
    for (int i = 0; i < sys.n; ++i) inner[i] -= 0.5 * sys.T * g1[i];
    const SymTensor jac = t1.eval(1, t, z);
    const Vec jy = jac.apply(std::span<const Vec>(&inner, 1));
    const Vec f2v = t2.eval_field(t, z);
    for (int i = 0; i < sys.n; ++i) integrand[r][i] = f2v[i] + jy[i];
  }
  Vec g2 = simpson_total(integrand, h);
  for (double& v : g2) v /= sys.T;
  return g2;
}

VanishingReport first_nonvanishing(const System& sys,
                                   std::span<const Vec> probes,
                                   const IntegratorConfig& cfg,
                                   double tau_scale) {
  if (probes.empty()) throw std::invalid_argument("probe set must be nonempty");
  MelnikovEvaluator mel(sys, cfg);
  VanishingReport rep;
  rep.tau_scale = tau_scale;
  rep.max_abs_f.assign(sys.k, 0.0);
  std::vector<bool> significant(sys.k, false);
  for (const Vec& z : probes) {
    const double tau = tau_scale * (1.0 + norm2(z));
    const auto fs = mel.averaged_f(z);
    for (int i = 0; i < sys.k; ++i) {
      double a = 0;
      for (double v : fs[i]) a = std::max(a, std::abs(v));
      rep.max_abs_f[i] = std::max(rep.max_abs_f[i], a);
      if (a >= tau) significant[i] = true;
    }
  }
  for (int i = 0; i < sys.k; ++i)
    if (significant[i]) {
      rep.ell = i + 1;
      break;
    }
  return rep;
}

GSeries strobo_g(const System& sys, std::span<const double> z,
                 const IntegratorConfig& cfg, FdConfig fd, int upto_order) {
  StroboEngine engine(sys, cfg, fd);
  return engine.strobo_g(z, upto_order);
}

}  // namespace avgkit

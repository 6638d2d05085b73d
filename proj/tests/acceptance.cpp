// Acceptance suite: each check prints a single PASS/FAIL line; the binary
// exits nonzero if any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "avgkit/bell.hpp"
#include "avgkit/melnikov.hpp"
#include "avgkit/odeint.hpp"
#include "avgkit/orbits.hpp"
#include "avgkit/strobo.hpp"
#include "oracles.hpp"

using namespace avgkit;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

IntegratorConfig cfg(int steps, double period = kTwoPi) {
  IntegratorConfig c;
  c.steps_per_period = steps;
  c.period = period;
  return c;
}

double maxdiff(const Vec& a, const Vec& b) {
  double m = 0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double maxabs(const Vec& a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool cond, const std::string& why) {
    if (!cond && pass) {
      pass = false;
      detail = why;
    }
  }
};

// --------------------------------------------------------------------------
// 1. Bell combinatorics against the set-partition / Bell-triangle oracles.

Outcome criterion_bell() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto bell = oracles::bell_numbers(8);
  const std::uint64_t expected[] = {1, 2, 5, 15, 52, 203, 877, 4140};
  for (int p = 1; p <= 8; ++p)
    o.require(bell[p - 1] == expected[p - 1], "Bell triangle oracle mismatch");

  for (int p = 1; p <= 8 && o.pass; ++p) {
    const auto counts = oracles::partition_counts(p);
    double row_sum = 0;
    for (int q = 1; q <= p; ++q) {
      const auto& terms = bell_terms(p, q);
      const auto& expect_q = counts.at(q);
      o.require(terms.size() == expect_q.size(),
                "term count mismatch at p=" + std::to_string(p));
      for (const BellTerm& term : terms) {
        const auto it = expect_q.find(term.factor_list);
        o.require(it != expect_q.end() && term.coefficient == it->second,
                  "coefficient mismatch at p=" + std::to_string(p));
        row_sum += (double)term.coefficient;
      }
    }
    o.require(row_sum == (double)expected[p - 1],
              "row sum != Bell number at p=" + std::to_string(p));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < 1.0, "runtime over 1 s");
  if (o.pass) o.detail = "p <= 8 complete, row sums 1..4140";
  return o;
}

// --------------------------------------------------------------------------
// 2. f_1 = T g_1 to 1e-12 relative on every corpus system.

Outcome criterion_f1_Tg1() {
  Outcome o;
  double worst = 0;
  for (const auto& name : oracles::corpus_all()) {
    const System s = oracles::load_corpus(name).system;
    StroboEngine engine(s, cfg(2048, s.T));
    oracles::Rng rng(17);
    for (int trial = 0; trial < 3; ++trial) {
      Vec z(s.n);
      for (double& v : z) v = rng.uniform(-1, 1);
      const Vec f1 = engine.averaged_f(z)[0];
      const Vec g1 = engine.g_value(z, 1);
      for (int c = 0; c < s.n; ++c) {
        const double rel =
            std::abs(f1[c] - s.T * g1[c]) / std::max(1e-30, std::abs(f1[c]));
        worst = std::max(worst, rel);
        o.require(rel < 1e-12, name + ": |f1 - T g1| relative " + std::to_string(rel));
      }
    }
  }
  if (o.pass) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst relative deviation %.2e", worst);
    o.detail = buf;
  }
  return o;
}

// --------------------------------------------------------------------------
// 3. Vanishing lower orders force f_i = T g_i on the corpus.

Outcome criterion_vanishing_identity() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst2 = 0;
  for (const auto& name : {"fzero_a", "fzero_b", "fzero_c"}) {
    const System s = oracles::load_corpus(name).system;
    StroboEngine engine(s, cfg(2048, s.T));
    oracles::Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
      Vec z(s.n);
      for (double& v : z) v = rng.uniform(-1, 1);
      const auto& fs = engine.averaged_f(z);
      const double tau = 1e-8 * (1.0 + maxabs(z));
      o.require(maxabs(fs[0]) < tau, std::string(name) + ": f1 not vanishing");
      const GSeries gs = engine.strobo_g(z, 2);
      Vec Tg2 = gs.g[1];
      for (double& v : Tg2) v *= s.T;
      const double dev = maxdiff(fs[1], Tg2);
      worst2 = std::max(worst2, dev);
      o.require(dev < 1e-6, std::string(name) + ": |f2 - T g2| = " + std::to_string(dev));
    }
  }
  // f_1 = f_2 = 0 system at order 3 (nested-FD tolerance)
  {
    const System s = oracles::load_corpus("f12zero").system;
    StroboEngine engine(s, cfg(2048, s.T));
    oracles::Rng rng(29);
    double worst3 = 0;
    for (int trial = 0; trial < 10; ++trial) {
      const Vec z = {rng.uniform(-1, 1)};
      const auto& fs = engine.averaged_f(z);
      const GSeries gs = engine.strobo_g(z, 3);
      Vec Tg3 = gs.g[2];
      for (double& v : Tg3) v *= s.T;
      worst3 = std::max(worst3, maxdiff(fs[2], Tg3));
    }
    o.require(worst3 < 1e-4, "order 3: |f3 - T g3| = " + std::to_string(worst3));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < 30.0, "runtime over 30 s");
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "3 systems x 10 z at order 2 (worst %.2e), order 3 ok",
                  worst2);
    o.detail = buf;
  }
  return o;
}

// --------------------------------------------------------------------------
// 4. g_2 two-path agreement on the full k >= 2 corpus.

Outcome criterion_g2_two_path() {
  Outcome o;
  double worst = 0;
  for (const auto& name : oracles::corpus_k2()) {
    const System s = oracles::load_corpus(name).system;
    StroboEngine engine(s, cfg(2048, s.T));
    oracles::Rng rng(41);
    for (int trial = 0; trial < 3; ++trial) {
      Vec z(s.n);
      for (double& v : z) v = rng.uniform(-0.8, 0.8);
      const Vec a = engine.strobo_g(z, 2).g[1];
      const Vec b = g2_closed_form(s, z, cfg(2048, s.T));
      const double dev = maxdiff(a, b);
      worst = std::max(worst, dev);
      o.require(dev < 1e-6, name + ": two-path deviation " + std::to_string(dev));
    }
  }
  if (o.pass) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst deviation %.2e", worst);
    o.detail = buf;
  }
  return o;
}

// --------------------------------------------------------------------------
// 5. Time-T expansion residual slopes near k + 1.

Outcome criterion_order_slopes() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> eps = {1e-2, std::pow(10.0, -2.5), 1e-3,
                                   std::pow(10.0, -3.5)};
  const std::pair<const char*, int> cases[] = {
      {"ord1_contract", 1}, {"ord2_contract", 2}, {"ord3_generic", 3}};
  std::string detail;
  for (const auto& [name, k] : cases) {
    const System s = oracles::load_corpus(name).system;
    const OrderStudy st = order_study(s, Vec{0.4}, eps, cfg(4096, s.T));
    char buf[48];
    std::snprintf(buf, sizeof buf, "k=%d slope %.3f  ", k, st.slope);
    detail += buf;
    o.require(st.slope > k + 0.7 && st.slope < k + 1.3,
              std::string(name) + ": slope " + std::to_string(st.slope));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < 60.0, "runtime over 60 s");
  if (o.pass) o.detail = detail;
  return o;
}

// --------------------------------------------------------------------------
// 6. Stacked-ODE f_2 vs direct quadrature.

Outcome criterion_f2_cross() {
  Outcome o;
  double worst = 0;
  for (const auto& name : oracles::corpus_k2()) {
    const System s = oracles::load_corpus(name).system;
    const MelnikovEvaluator mel(s, cfg(2048, s.T));
    oracles::Rng rng(59);
    for (int trial = 0; trial < 3; ++trial) {
      Vec z(s.n);
      for (double& v : z) v = rng.uniform(-1, 1);
      const double dev = maxdiff(mel.averaged_f(z)[1], mel.f2_direct(z));
      worst = std::max(worst, dev);
      o.require(dev < 1e-8, name + ": f2 cross-formula deviation " + std::to_string(dev));
    }
  }
  if (o.pass) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "worst deviation %.2e", worst);
    o.detail = buf;
  }
  return o;
}

// --------------------------------------------------------------------------
// 7. Van der Pol radial: simple zero at r = 2 and validated fixed points.

Outcome criterion_vdp() {
  Outcome o;
  const System s = oracles::load_corpus("vdp_radial").system;
  const IntegratorConfig c = cfg(2048, s.T);
  const MelnikovEvaluator mel(s, c);
  const auto f = [&](const Vec& z) { return mel.averaged_f(z)[0]; };
  const ZeroResult zr = find_zero(f, Vec{1.2});
  o.require(zr.converged && zr.simple, "zero finding failed");
  o.require(std::abs(zr.z_star[0] - 2.0) < 1e-8,
            "r* = " + std::to_string(zr.z_star[0]));

  // Independent oracle: settle a long trajectory at eps = 0.05; the
  // stroboscopic state converges to the fixed point of the time-T map.
  const double eps0 = 0.05;
  const Rhs full = [&](double t, std::span<const double> x, std::span<double> dx) {
    dx[0] = eps0 * s.F[0][0].eval(t, x);
  };
  const Vec settled = integrate(full, 0.0, 200.0 * s.T, Vec{1.0}, c);

  const std::vector<double> eps = {0.05, 0.02, 0.01};
  const OrbitValidation val = validate_orbit(s, zr.z_star, eps, c);
  for (size_t i = 0; i < eps.size(); ++i) {
    o.require(val.ok[i], "no certified fixed point at eps = " + std::to_string(eps[i]));
    o.require(val.displacement_norms[i] < 1e-9,
              "displacement " + std::to_string(val.displacement_norms[i]));
  }
  o.require(std::abs(settled[0] - val.z_eps[0][0]) < 1e-6,
            "settling oracle disagrees: " + std::to_string(settled[0]) + " vs " +
                std::to_string(val.z_eps[0][0]));
  o.require(val.distances[0] > val.distances[1] && val.distances[1] > val.distances[2],
            "distances not decreasing");
  o.require(val.slope_estimate >= 0.8,
            "slope " + std::to_string(val.slope_estimate));
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "r* = %.10f, distance slope %.2f, settling ok",
                  zr.z_star[0], val.slope_estimate);
    o.detail = buf;
  }
  return o;
}

// --------------------------------------------------------------------------
// 8. Full vs truncated-averaged trajectories stay eps^k close over 1/eps.

Outcome criterion_closeness() {
  Outcome o;
  const std::vector<double> eps_list = {1e-2, std::pow(10.0, -2.5), 1e-3};
  const std::pair<const char*, int> cases[] = {{"ord1_contract", 1},
                                               {"ord2_contract", 2}};
  std::string detail;
  for (const auto& [name, k] : cases) {
    const System s = oracles::load_corpus(name).system;
    const IntegratorConfig c = cfg(1024, s.T);
    // quadrature error in g enters the deviation as eps * err * t_end,
    // orders of magnitude below the eps^k signal at 512 steps
    StroboEngine engine(s, cfg(512, s.T), FdConfig{1e-16, 5'000'000});
    const Vec z0(s.n, 0.3);

    std::vector<double> devs;
    for (double eps : eps_list) {
      const double t_end = 1.0 / eps;
      // stroboscopic sample times j T up to 1/eps
      std::vector<double> samples;
      for (double t = 0.0; t <= t_end; t += s.T) samples.push_back(t);

      const Rhs full = [&](double t, std::span<const double> x, std::span<double> dx) {
        double w = 1.0;
        for (int c2 = 0; c2 < s.n; ++c2) dx[c2] = 0.0;
        for (int i = 0; i < s.k; ++i) {
          w *= eps;
          for (int c2 = 0; c2 < s.n; ++c2) dx[c2] += w * s.F[i][c2].eval(t, x);
        }
      };
      const auto xs = integrate_dense(full, 0.0, t_end, z0, c, samples);

      // truncated averaged equation xi' = sum eps^i g_i(xi)
      const Rhs avg = [&](double, std::span<const double> xi, std::span<double> dxi) {
        const Vec p(xi.begin(), xi.end());
        for (int c2 = 0; c2 < s.n; ++c2) dxi[c2] = 0.0;
        double w = 1.0;
        for (int i = 1; i <= s.k; ++i) {
          w *= eps;
          const Vec gi = engine.g_value(p, i);
          for (int c2 = 0; c2 < s.n; ++c2) dxi[c2] += w * gi[c2];
        }
      };
      // The averaged field is autonomous, O(eps)-slow, and smooth; the RK4
      // error h^4 eps^4 is far below the eps^k signal even at h = T/16.
      IntegratorConfig ac = cfg(16, s.T);
      ac.max_steps = 100'000'000;
      const auto xis = integrate_dense(avg, 0.0, t_end, z0, ac, samples);

      double dev = 0;
      for (size_t j = 0; j < samples.size(); ++j) dev = std::max(dev, maxdiff(xs[j], xis[j]));
      devs.push_back(dev);
    }
    const double slope = fit_loglog_slope(eps_list, devs);
    char buf[48];
    std::snprintf(buf, sizeof buf, "k=%d slope %.3f  ", k, slope);
    detail += buf;
    o.require(slope >= k - 0.3, std::string(name) + ": slope " + std::to_string(slope));
  }
  if (o.pass) o.detail = detail;
  return o;
}

// --------------------------------------------------------------------------
// 9. Expression layer: derivative agreement and parser fuzzing.

Outcome criterion_expr() {
  Outcome o;
  std::vector<std::string> corpus;
  // 50 expressions assembled from a few families
  const char* unary[] = {"sin", "cos", "tan", "exp", "sqrt", "abs"};
  for (const char* f : unary) {
    corpus.push_back(std::string(f) + "(0.7 + x1*0.3)");
    corpus.push_back(std::string(f) + "(2 + sin(t)*x2)");
  }
  for (int d = 1; d <= 6; ++d)
    corpus.push_back("x1^" + std::to_string(d) + " + x2^" + std::to_string(d));
  corpus.insert(corpus.end(),
                {"x1*x2*sin(t)", "x1/(2 + x2^2)", "log(3 + x1^2)",
                 "exp(0.2*x1)*cos(t) - x2", "sqrt(5 + x2^2)/(2 + cos(t))",
                 "(x1 + x2)^3", "sin(x1*cos(t)) + cos(x2*sin(t))",
                 "tan(0.3*x1)/(2 + x2^2)", "abs(3 + x1^4)", "pi*x1 - t*0",
                 "1/(1 + exp(-x1))", "x1^2*x2^3 - x2*0.5",
                 "cos(t)^2*(1 - x1^2)", "sin(t)^2*x1*(1 - x2^2/4)",
                 "(1 + x1^2)/(1 + x2^2)", "exp(sin(t))*x1",
                 "log(2 + cos(t) + x1^2)", "sqrt(1 + (x1 - x2)^2)",
                 "x1 - x1^3/6 + x1^5/120", "cos(2*t)*x2^2 - sin(3*t)*x1",
                 "0.5*(x1 + abs(2 + x1^2))", "x2/(3 + sin(t))",
                 "(2 + x1)^(-2)", "x1*exp(-0.1*x2^2)", "t*0 + x1*x2",
                 "sin(t + 0.5)*x1^2"});
  while (corpus.size() < 50) corpus.push_back("x1 + " + std::to_string(corpus.size()));
  o.require(corpus.size() >= 50, "corpus too small");

  oracles::Rng rng(1013);
  double worst = 0;
  for (const auto& src : corpus) {
    const Expr e = parse_expr(src, 2);
    for (int var = 0; var <= 2; ++var) {
      const Expr de = e.diff(var);
      int checked = 0;
      for (int s = 0; s < 100; ++s) {
        const double t = rng.uniform(-2, 2);
        const Vec x = {rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
        double sym, fd;
        try {
          sym = de.eval(t, x);
          fd = oracles::fd_derivative(e, var, t, x);
        } catch (const DomainError&) {
          continue;  // sampled a singular point of this expression
        }
        ++checked;
        const double rel = std::abs(sym - fd) / std::max(1.0, std::abs(fd));
        worst = std::max(worst, rel);
        o.require(rel < 1e-6, src + ": derivative mismatch " + std::to_string(rel));
      }
      o.require(checked > 60, src + ": too many singular samples");
    }
  }

  // fuzz: 1e5 random inputs must parse or raise ParseError
  std::mt19937 gen(0xACCE57);
  const std::string alphabet = "x12tpi+-*/^()sincoateqrlgb. eE";
  std::uniform_int_distribution<int> len(0, 64);
  std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> raw(0, 255);
  long crashes = 0;
  for (int it = 0; it < 100000; ++it) {
    std::string sfz;
    const int L = len(gen);
    for (int i = 0; i < L; ++i)
      sfz += (it % 5 == 0) ? (char)raw(gen) : alphabet[pick(gen)];
    try {
      (void)parse_expr(sfz, 2);
    } catch (const ParseError&) {
    } catch (...) {
      ++crashes;
    }
  }
  o.require(crashes == 0, std::to_string(crashes) + " fuzz escapes");
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "50 expressions, worst FD deviation %.2e; 1e5 fuzz inputs clean", worst);
    o.detail = buf;
  }
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"bell enumeration vs partition oracle", criterion_bell},
      {"f1 = T g1 on the corpus", criterion_f1_Tg1},
      {"f_i = T g_i under vanishing lower orders", criterion_vanishing_identity},
      {"g2 recursion vs classical quadrature", criterion_g2_two_path},
      {"time-T residual slopes near k+1", criterion_order_slopes},
      {"f2 stacked vs direct quadrature", criterion_f2_cross},
      {"van der Pol radial orbit validation", criterion_vdp},
      {"averaging closeness over 1/eps", criterion_closeness},
      {"expression derivatives and parser fuzz", criterion_expr},
  };

  int failures = 0;
  int idx = 0;
  for (const auto& [name, fn] : criteria) {
    ++idx;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%d] %s  %-45s (%.2f s)%s%s\n", idx, o.pass ? "PASS" : "FAIL",
                name, secs, o.detail.empty() ? "" : "  ", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  if (failures) std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

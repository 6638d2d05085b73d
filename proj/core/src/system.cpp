#include "avgkit/system.hpp"

#include <cmath>
#include <random>

namespace avgkit {

System make_system(int n, double T, int k, std::vector<std::vector<Expr>> F) {
  if (n < 1 || n > 10) throw std::invalid_argument("dimension n must be 1..10");
  if (k < 1 || k > 5) throw std::invalid_argument("order k must be 1..5");
  if (!(T > 0)) throw std::invalid_argument("period T must be > 0");
  if ((int)F.size() != k) throw std::invalid_argument("F must have k vector fields");
  for (int i = 0; i < k; ++i) {
    if ((int)F[i].size() != n)
      throw std::invalid_argument("F_" + std::to_string(i + 1) +
                                  " must have n components");
    for (const Expr& e : F[i]) {
      if (e.empty())
        throw std::invalid_argument("empty expression in F_" + std::to_string(i + 1));
      if (e.max_x_index() > n)
        throw std::invalid_argument("F_" + std::to_string(i + 1) +
                                    " references x beyond dimension " +
                                    std::to_string(n));
    }
  }
  System sys{n, T, k, std::move(F)};
  const double dev = periodicity_deviation(sys);
  if (!(dev < 1e-9))
    throw Error("periodicity check failed: max |F(t+T,x) - F(t,x)| = " +
                std::to_string(dev));
  return sys;
}

double periodicity_deviation(const System& sys, int samples) {
  // Deterministic sample points; a fixed seed keeps loads reproducible.
  std::mt19937 rng(0x9E3779B9u);
  std::uniform_real_distribution<double> ut(0.0, sys.T);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);

  double worst = 0.0;
  int got = 0, attempts = 0;
  Vec x(sys.n);
  while (got < samples && attempts < samples * 4) {
    ++attempts;
    const double t = ut(rng);
    for (double& xi : x) xi = ux(rng);
    try {
      for (const auto& field : sys.F)
        for (const Expr& e : field) {
          const double a = e.eval(t, x);
          const double b = e.eval(t + sys.T, x);
          worst = std::max(worst, std::abs(b - a));
        }
      ++got;
    } catch (const DomainError&) {
      // expression not defined at this sample; draw another point
    }
  }
  if (got == 0) throw Error("periodicity check could not sample the system");
  return worst;
}

}  // namespace avgkit

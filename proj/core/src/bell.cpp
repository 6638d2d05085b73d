#include "avgkit/bell.hpp"

#include <array>
#include <stdexcept>

namespace avgkit {

namespace {

constexpr int kMaxP = 12;  // 12! still exact in 64-bit through the divisions

std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Enumerate multiplicity tuples (b_1..b_L), L = p-q+1, with
// sum b_j = q and sum j b_j = p, lexicographically ascending, and attach
// the exact coefficients.
void enumerate(int p, int q, int j, int rem_q, int rem_p, std::vector<int>& b,
               std::vector<BellTerm>& out) {
  const int L = p - q + 1;
  if (j > L) {
    if (rem_q != 0 || rem_p != 0) return;
    BellTerm term;
    term.multiplicities = b;
    // coefficient = p! / (prod b_j! * prod (j!)^{b_j}); always an integer.
    unsigned __int128 den = 1;
    for (int jj = 1; jj <= L; ++jj) {
      den *= factorial(b[jj - 1]);
      const std::uint64_t jf = factorial(jj);
      for (int c = 0; c < b[jj - 1]; ++c) den *= jf;
    }
    const std::uint64_t num = factorial(p);
    if (num % (std::uint64_t)den != 0)
      throw std::logic_error("Bell coefficient not integral");
    term.coefficient = num / (std::uint64_t)den;
    for (int jj = 1; jj <= L; ++jj)
      for (int c = 0; c < b[jj - 1]; ++c) term.factor_list.push_back(jj);
    out.push_back(std::move(term));
    return;
  }
  const int max_b = std::min(rem_q, rem_p / j);
  for (int c = 0; c <= max_b; ++c) {
    b[j - 1] = c;
    enumerate(p, q, j + 1, rem_q - c, rem_p - j * c, b, out);
  }
  b[j - 1] = 0;
}

using BellTable = std::array<std::array<std::vector<BellTerm>, kMaxP + 1>, kMaxP + 1>;

const BellTable& table() {
  static const BellTable t = [] {
    BellTable t;
    for (int p = 1; p <= kMaxP; ++p)
      for (int q = 1; q <= p; ++q) {
        std::vector<int> b(p - q + 1, 0);
        enumerate(p, q, 1, q, p, b, t[p][q]);
      }
    return t;
  }();
  return t;
}

}  // namespace

const std::vector<BellTerm>& bell_terms(int p, int q) {
  if (q < 1 || q > p) throw std::invalid_argument("bell_terms requires 1 <= q <= p");
  if (p > kMaxP) throw std::invalid_argument("bell_terms supports p <= 12");
  return table()[p][q];
}

Vec bell_apply(int p, int q, std::span<const Vec> factors,
               const SymTensor& tensor) {
  const auto& terms = bell_terms(p, q);
  if ((int)factors.size() < p - q + 1)
    throw std::invalid_argument("bell_apply needs p-q+1 factors");
  if (tensor.order() != q)
    throw std::invalid_argument("bell_apply tensor arity must equal q");

  Vec out(tensor.dim(), 0.0);
  std::vector<Vec> args(q);
  for (const BellTerm& term : terms) {
    for (int l = 0; l < q; ++l) args[l] = factors[term.factor_list[l] - 1];
    const Vec v = tensor.apply(args);
    for (size_t i = 0; i < out.size(); ++i) out[i] += (double)term.coefficient * v[i];
  }
  return out;
}

TPoly bell_apply_tpoly(int p, int q, std::span<const TPoly> factors,
                       const SymTensor& tensor) {
  const auto& terms = bell_terms(p, q);
  if ((int)factors.size() < p - q + 1)
    throw std::invalid_argument("bell_apply_tpoly needs p-q+1 factors");
  if (tensor.order() != q)
    throw std::invalid_argument("bell_apply_tpoly tensor arity must equal q");

  const int n = tensor.dim();
  TPoly out(n);
  std::vector<Vec> args(q);
  std::vector<int> deg(q);
  for (const BellTerm& term : terms) {
    // Convolve the q polynomial factors through the tensor: iterate all
    // degree choices (d_1..d_q), one from each factor.
    std::vector<const TPoly*> fs(q);
    bool empty = false;
    for (int l = 0; l < q; ++l) {
      fs[l] = &factors[term.factor_list[l] - 1];
      if (fs[l]->degree() < 0) empty = true;
    }
    if (empty) continue;
    std::fill(deg.begin(), deg.end(), 0);
    for (;;) {
      int total = 0;
      for (int l = 0; l < q; ++l) {
        args[l] = fs[l]->coeff(deg[l]);
        total += deg[l];
      }
      Vec v = tensor.apply(args);
      for (double& x : v) x *= (double)term.coefficient;
      out.add_term(total, v);
      int l = q - 1;
      for (; l >= 0; --l) {
        if (++deg[l] <= fs[l]->degree()) break;
        deg[l] = 0;
      }
      if (l < 0) break;
    }
  }
  out.trim();
  return out;
}

}  // namespace avgkit

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "avgkit/tensor.hpp"
#include "avgkit/tpoly.hpp"

namespace avgkit {

// One monomial of the partial Bell polynomial B_{p,q}: an exact integer
// coefficient p! / (b_1! ... b_L! * prod_j (j!)^{b_j}) together with the
// multiplicity tuple (b_1..b_L), L = p-q+1, satisfying
//   b_1 + b_2 + ... + b_L = q   and   b_1 + 2 b_2 + ... + L b_L = p.
// factor_list expands the multiplicities into the q factor indices
// (index j repeated b_j times, ascending).
struct BellTerm {
  std::uint64_t coefficient;
  std::vector<int> multiplicities;
  std::vector<int> factor_list;  // 1-based, size q
};

// Complete, duplicate-free enumeration of the terms of B_{p,q}, ordered
// lexicographically (ascending) in the multiplicity tuple. Requires
// 1 <= q <= p <= 12 (coefficients stay exact in 64-bit through p = 12).
const std::vector<BellTerm>& bell_terms(int p, int q);

// Evaluate the tensor-contracted Bell sum: for each term, apply the
// symmetric q-linear map to the factor vectors named by factor_list and
// accumulate with the integer coefficient. factors[j-1] is the j-th factor;
// at least p-q+1 entries are required and tensor.order() must equal q.
Vec bell_apply(int p, int q, std::span<const Vec> factors,
               const SymTensor& tensor);

// Same sum with polynomial factors: degrees add and the coefficient of t^d
// collects the tensor applied to every composition of d over the chosen
// factors. Exact polynomial arithmetic, no quadrature.
TPoly bell_apply_tpoly(int p, int q, std::span<const TPoly> factors,
                       const SymTensor& tensor);

}  // namespace avgkit

#pragma once

#include <span>
#include <vector>

#include "avgkit/expr.hpp"

namespace avgkit {

// Dense symmetric m-linear map (R^n)^m -> R^n.
//
// Storage is the full n^(m+1) array of entries, out-index major and the m
// input indices row-major. m = 0 degenerates to a plain vector in R^n.
class SymTensor {
 public:
  SymTensor() : n_(0), m_(0) {}
  SymTensor(int n, int m);

  int dim() const { return n_; }
  int order() const { return m_; }

  double entry(int out, std::span<const int> idx) const;
  void set_entry(int out, std::span<const int> idx, double v);

  // Contract with m vectors of length n. args.size() must equal order().
  Vec apply(std::span<const Vec> args) const;

  std::span<const double> raw() const { return data_; }
  std::span<double> raw() { return data_; }

 private:
  std::size_t flat(int out, std::span<const int> idx) const;
  int n_, m_;
  std::vector<double> data_;
};

// Symbolic mixed partials of a vector field F : R x R^n -> R^n with respect
// to x, prepared once and evaluated at many (t, z).
//
// Derivatives are computed symbolically per sorted index tuple (mixed
// partials commute) and the dense symmetric tensor is filled from them.
class FrechetTable {
 public:
  FrechetTable(std::vector<Expr> field, int n, int max_m);

  int dim() const { return n_; }
  int max_order() const { return max_m_; }

  // The full tensor of order-m partials at (t, z); m = 0 gives F(t, z)
  // itself (as a 0-linear tensor).
  SymTensor eval(int m, double t, std::span<const double> z) const;

  // Convenience fast path for m = 0.
  Vec eval_field(double t, std::span<const double> z) const;

 private:
  int n_, max_m_;
  std::vector<std::vector<std::vector<int>>> tuples_;   // [m][tuple] sorted
  std::vector<std::vector<std::vector<Expr>>> dexprs_;  // [m][out][tuple]
  std::vector<std::vector<int>> full_to_tuple_;         // [m][flat full index]
};

// One-shot version: the symmetric tensor of order-m partials of `field`
// evaluated at (t, z). Builds a FrechetTable ad hoc; prefer the table when
// evaluating repeatedly.
SymTensor frechet_tensor(std::span<const Expr> field, int n, int m, double t,
                         std::span<const double> z);

}  // namespace avgkit

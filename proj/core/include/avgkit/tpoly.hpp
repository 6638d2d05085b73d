#pragma once

#include <span>
#include <vector>

#include "avgkit/expr.hpp"

namespace avgkit {

// Polynomial in t with coefficients in R^n, exact up to floating point.
// coeff(d) multiplies t^d. The zero polynomial has degree() == -1.
class TPoly {
 public:
  explicit TPoly(int n) : n_(n) {}
  static TPoly monomial(int degree, Vec c);

  int dim() const { return n_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  // Coefficient of t^d (zero vector beyond the degree).
  Vec coeff(int d) const;

  void add_term(int degree, std::span<const double> c);
  void add_scaled(const TPoly& other, double s);
  void scale(double s);

  Vec eval(double t) const;

  // Termwise antiderivative with zero constant term:
  // c t^d  ->  c/(d+1) t^(d+1).
  TPoly integral_from_zero() const;
  TPoly derivative() const;

  // Drop trailing coefficients that are exactly zero.
  void trim();

 private:
  int n_;
  std::vector<Vec> coeffs_;  // coeffs_[d] has length n_
};

}  // namespace avgkit

#include "avgkit/tpoly.hpp"

#include <algorithm>
#include <stdexcept>

namespace avgkit {

TPoly TPoly::monomial(int degree, Vec c) {
  if (degree < 0) throw std::invalid_argument("degree must be >= 0");
  TPoly p((int)c.size());
  p.coeffs_.assign(degree + 1, Vec(c.size(), 0.0));
  p.coeffs_[degree] = std::move(c);
  return p;
}

Vec TPoly::coeff(int d) const {
  if (d < 0 || d > degree()) return Vec(n_, 0.0);
  return coeffs_[d];
}

void TPoly::add_term(int degree, std::span<const double> c) {
  if ((int)c.size() != n_) throw std::invalid_argument("coefficient dimension mismatch");
  if (degree < 0) throw std::invalid_argument("degree must be >= 0");
  if (degree > this->degree()) coeffs_.resize(degree + 1, Vec(n_, 0.0));
  for (int i = 0; i < n_; ++i) coeffs_[degree][i] += c[i];
}

void TPoly::add_scaled(const TPoly& other, double s) {
  if (other.n_ != n_) throw std::invalid_argument("polynomial dimension mismatch");
  if (other.degree() > degree()) coeffs_.resize(other.degree() + 1, Vec(n_, 0.0));
  for (int d = 0; d <= other.degree(); ++d)
    for (int i = 0; i < n_; ++i) coeffs_[d][i] += s * other.coeffs_[d][i];
}

void TPoly::scale(double s) {
  for (auto& c : coeffs_)
    for (double& v : c) v *= s;
}

Vec TPoly::eval(double t) const {
  Vec out(n_, 0.0);
  // Horner over vector coefficients
  for (int d = degree(); d >= 0; --d)
    for (int i = 0; i < n_; ++i) out[i] = out[i] * t + coeffs_[d][i];
  return out;
}

TPoly TPoly::integral_from_zero() const {
  TPoly out(n_);
  if (degree() < 0) return out;
  out.coeffs_.assign(degree() + 2, Vec(n_, 0.0));
  for (int d = 0; d <= degree(); ++d)
    for (int i = 0; i < n_; ++i) out.coeffs_[d + 1][i] = coeffs_[d][i] / (d + 1);
  return out;
}

TPoly TPoly::derivative() const {
  TPoly out(n_);
  if (degree() < 1) return out;
  out.coeffs_.assign(degree(), Vec(n_, 0.0));
  for (int d = 1; d <= degree(); ++d)
    for (int i = 0; i < n_; ++i) out.coeffs_[d - 1][i] = coeffs_[d][i] * d;
  return out;
}

void TPoly::trim() {
  while (!coeffs_.empty() &&
         std::all_of(coeffs_.back().begin(), coeffs_.back().end(),
                     [](double v) { return v == 0.0; }))
    coeffs_.pop_back();
}

}  // namespace avgkit

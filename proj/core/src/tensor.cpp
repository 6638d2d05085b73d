#include "avgkit/tensor.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <stdexcept>

namespace avgkit {

namespace {

size_t ipow(size_t base, int e) {
  size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void check_dims(int n, int m) {
  if (n < 1 || n > 10) throw std::invalid_argument("tensor dimension must be 1..10");
  if (m < 0 || m > 12) throw std::invalid_argument("tensor order must be 0..12");
  if (ipow(n, m) > 1'000'000)
    throw std::invalid_argument("dense tensor would exceed the size cap");
}

}  // namespace

SymTensor::SymTensor(int n, int m) : n_(n), m_(m) {
  check_dims(n, m);
  data_.assign(n * ipow(n, m), 0.0);
}

size_t SymTensor::flat(int out, std::span<const int> idx) const {
  size_t f = out;
  for (int l = 0; l < m_; ++l) f = f * n_ + idx[l];
  return f;
}

double SymTensor::entry(int out, std::span<const int> idx) const {
  return data_[flat(out, idx)];
}

void SymTensor::set_entry(int out, std::span<const int> idx, double v) {
  data_[flat(out, idx)] = v;
}

Vec SymTensor::apply(std::span<const Vec> args) const {
  if ((int)args.size() != m_)
    throw std::invalid_argument("tensor arity mismatch");
  for (const Vec& a : args)
    if ((int)a.size() != n_)
      throw std::invalid_argument("tensor argument dimension mismatch");

  Vec out(n_, 0.0);
  if (m_ == 0) {
    std::copy(data_.begin(), data_.end(), out.begin());
    return out;
  }
  // Canonicalize the argument order (symmetry makes it a mathematical no-op)
  // so permuting the inputs yields bit-identical sums.
  std::vector<const Vec*> as(m_);
  for (int l = 0; l < m_; ++l) as[l] = &args[l];
  std::sort(as.begin(), as.end(), [this](const Vec* a, const Vec* b) {
    return std::memcmp(a->data(), b->data(), n_ * sizeof(double)) < 0;
  });

  const size_t block = ipow(n_, m_);
  std::vector<int> idx(m_, 0);
  for (size_t f = 0; f < block; ++f) {
    double w = 1.0;
    for (int l = 0; l < m_; ++l) w *= (*as[l])[idx[l]];
    for (int i = 0; i < n_; ++i) out[i] += data_[i * block + f] * w;
    // odometer over the m input indices
    for (int l = m_ - 1; l >= 0; --l) {
      if (++idx[l] < n_) break;
      idx[l] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Nondecreasing index tuples of length m over {0..n-1}, lexicographic.
void enumerate_sorted(int n, int m, std::vector<int>& cur,
                      std::vector<std::vector<int>>& out) {
  if ((int)cur.size() == m) {
    out.push_back(cur);
    return;
  }
  const int lo = cur.empty() ? 0 : cur.back();
  for (int i = lo; i < n; ++i) {
    cur.push_back(i);
    enumerate_sorted(n, m, cur, out);
    cur.pop_back();
  }
}

}  // namespace

FrechetTable::FrechetTable(std::vector<Expr> field, int n, int max_m)
    : n_(n), max_m_(max_m) {
  check_dims(n, max_m);
  if (max_m > 4)
    throw std::invalid_argument("derivative tables support orders 0..4");
  if ((int)field.size() != n)
    throw std::invalid_argument("field must have n components");
  for (const Expr& e : field)
    if (e.max_x_index() > n)
      throw std::invalid_argument("field references x beyond dimension");

  tuples_.resize(max_m + 1);
  dexprs_.resize(max_m + 1);
  full_to_tuple_.resize(max_m + 1);

  tuples_[0] = {{}};
  dexprs_[0].resize(n);
  for (int i = 0; i < n; ++i) dexprs_[0][i] = {field[i]};
  full_to_tuple_[0] = {0};

  for (int m = 1; m <= max_m; ++m) {
    std::vector<int> cur;
    enumerate_sorted(n, m, cur, tuples_[m]);
    std::map<std::vector<int>, int> rank;
    for (size_t ti = 0; ti < tuples_[m].size(); ++ti) rank[tuples_[m][ti]] = (int)ti;

    std::map<std::vector<int>, int> prev_rank;
    for (size_t ti = 0; ti < tuples_[m - 1].size(); ++ti)
      prev_rank[tuples_[m - 1][ti]] = (int)ti;

    // Mixed partials commute, so each sorted tuple is differentiated once:
    // the sorted prefix's expression by the tuple's last (largest) index.
    dexprs_[m].resize(n);
    for (int i = 0; i < n; ++i) {
      auto& row = dexprs_[m][i];
      row.resize(tuples_[m].size());
      for (size_t ti = 0; ti < tuples_[m].size(); ++ti) {
        const auto& tup = tuples_[m][ti];
        std::vector<int> prefix(tup.begin(), tup.end() - 1);
        const Expr& base = dexprs_[m - 1][i][prev_rank.at(prefix)];
        row[ti] = base.diff(tup.back() + 1);  // x indices are 1-based
      }
    }

    // Map every full multi-index to its sorted tuple.
    const size_t total = ipow(n, m);
    full_to_tuple_[m].resize(total);
    std::vector<int> idx(m, 0);
    for (size_t f = 0; f < total; ++f) {
      std::vector<int> sorted = idx;
      std::sort(sorted.begin(), sorted.end());
      full_to_tuple_[m][f] = rank.at(sorted);
      for (int l = m - 1; l >= 0; --l) {
        if (++idx[l] < n) break;
        idx[l] = 0;
      }
    }
  }
}

SymTensor FrechetTable::eval(int m, double t, std::span<const double> z) const {
  if (m < 0 || m > max_m_)
    throw std::invalid_argument("derivative order beyond table");
  SymTensor out(n_, m);
  const auto& exprs = dexprs_[m];
  const auto& remap = full_to_tuple_[m];
  auto raw = out.raw();
  const size_t block = remap.size();
  std::vector<double> vals(tuples_[m].size());
  for (int i = 0; i < n_; ++i) {
    for (size_t ti = 0; ti < vals.size(); ++ti) vals[ti] = exprs[i][ti].eval(t, z);
    for (size_t f = 0; f < block; ++f) raw[i * block + f] = vals[remap[f]];
  }
  return out;
}

Vec FrechetTable::eval_field(double t, std::span<const double> z) const {
  Vec out(n_);
  for (int i = 0; i < n_; ++i) out[i] = dexprs_[0][i][0].eval(t, z);
  return out;
}

SymTensor frechet_tensor(std::span<const Expr> field, int n, int m, double t,
                         std::span<const double> z) {
  FrechetTable table(std::vector<Expr>(field.begin(), field.end()), n, m);
  return table.eval(m, t, z);
}

}  // namespace avgkit

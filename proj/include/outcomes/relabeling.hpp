#pragma once

// Deterministic classical post-processing from n-outcome measurements to m labels.
//
// Each n-outcome measurement is attached to an increasing n-subset x = (x_1 < ... < x_n) of
// the m labels, and sub-outcome a is reported as label x_a. Only these injective relabelings
// are enumerated: a relabeling that merges sub-outcomes is reproduced by an n-outcome
// measurement whose merged effects are summed and whose spare effects are zero.
//
// Indices are 0-based throughout the API (labels 0..m-1, sub-outcomes 0..n-1).

#include <cstdint>
#include <span>
#include <vector>

#include "outcomes/errors.hpp"
#include "outcomes/quantum.hpp"

namespace outcomes {

inline std::uint64_t binomial(int m, int n) {
  if (n < 0 || n > m) return 0;
  n = std::min(n, m - n);
  std::uint64_t r = 1;
  for (int i = 1; i <= n; ++i) r = r * static_cast<std::uint64_t>(m - n + i) / static_cast<std::uint64_t>(i);
  return r;
}

using Combination = std::vector<int>;

class RelabelingScheme {
public:
  /// All C(m, n) increasing n-subsets of {0..m-1}, in lexicographic order.
  static RelabelingScheme enumerate(int m, int n) {
    if (n < 1 || n > m) throw DomainError("RelabelingScheme: need 1 <= n <= m");
    RelabelingScheme s;
    s.m_ = m;
    s.n_ = n;
    Combination c(n);
    for (int i = 0; i < n; ++i) c[i] = i;
    while (true) {
      s.combinations_.push_back(c);
      int i = n - 1;
      while (i >= 0 && c[i] == m - n + i) --i;
      if (i < 0) break;
      ++c[i];
      for (int j = i + 1; j < n; ++j) c[j] = c[j - 1] + 1;
    }
    return s;
  }

  int m() const { return m_; }
  int n() const { return n_; }
  int size() const { return static_cast<int>(combinations_.size()); }
  const std::vector<Combination>& combinations() const { return combinations_; }
  const Combination& operator[](int x) const { return combinations_.at(x); }

  /// D(b|a,x): 1 iff sub-outcome a of combination x is reported as label b.
  int d_value(int b, int a, int x) const {
    if (b < 0 || b >= m_ || a < 0 || a >= n_ || x < 0 || x >= size())
      throw DomainError("RelabelingScheme::d_value: index out of range");
    return combinations_[x][a] == b ? 1 : 0;
  }

  /// Label that sub-outcome a of combination x is mapped to.
  int label(int a, int x) const { return combinations_.at(x).at(a); }

private:
  int m_ = 0;
  int n_ = 0;
  std::vector<Combination> combinations_;
};

/// O_b = sum_{a,x} p(x) D(b|a,x) Q_{a|x}.
inline Povm simulate(const RelabelingScheme& scheme, std::span<const Povm> sub_povms,
                     std::span<const double> weights) {
  if (static_cast<int>(sub_povms.size()) != scheme.size() ||
      static_cast<int>(weights.size()) != scheme.size())
    throw DomainError("simulate: need one sub-POVM and one weight per combination");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DomainError("simulate: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("simulate: weights do not sum to one");

  const int d = sub_povms.front().dim();
  std::vector<CMatrix> out(scheme.m(), CMatrix::Zero(d, d));
  for (int x = 0; x < scheme.size(); ++x) {
    const auto& q = sub_povms[x];
    if (q.dim() != d) throw DomainError("simulate: sub-POVMs of mixed dimension");
    if (q.outcomes() != scheme.n()) throw DomainError("simulate: sub-POVM must have n outcomes");
    for (int a = 0; a < scheme.n(); ++a) out[scheme.label(a, x)] += weights[x] * q[a].matrix();
  }
  std::vector<HermitianMatrix> effects;
  for (auto& o : out) effects.push_back(HermitianMatrix::hermitian_part(o));
  return Povm(std::move(effects));
}

} // namespace outcomes

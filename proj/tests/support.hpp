#pragma once

// Test-side generators and closed-form oracles. Deliberately independent of
// outcomes::catalog so property tests do not share code with the library under test.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "outcomes/quantum.hpp"
#include "outcomes/relabeling.hpp"

namespace testing_support {

using outcomes::CMatrix;
using outcomes::Complex;
using outcomes::Ensemble;
using outcomes::HermitianMatrix;
using outcomes::Povm;

/// splitmix64 stream.
class Gen {
public:
  explicit Gen(std::uint64_t seed) : state_(seed * 0x2545F4914F6CDD1Dull + 0x1234567ull) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  double gauss() {
    double u = 0.0;
    while (u <= 0.0) u = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * uniform());
  }
  CMatrix complex_matrix(int r, int c) {
    CMatrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = Complex(gauss(), gauss());
    return m;
  }

private:
  std::uint64_t state_;
};

inline HermitianMatrix random_hermitian(Gen& g, int d) {
  const CMatrix a = g.complex_matrix(d, d);
  return HermitianMatrix::hermitian_part(a + a.adjoint());
}

inline HermitianMatrix random_psd(Gen& g, int d, int rank = -1) {
  if (rank < 0) rank = d;
  const CMatrix a = g.complex_matrix(d, rank);
  return HermitianMatrix::hermitian_part(a * a.adjoint());
}

inline HermitianMatrix random_density(Gen& g, int d, int rank = -1) {
  const auto p = random_psd(g, d, rank);
  return p / p.trace();
}

/// Random m-outcome POVM from random PSD operators, square-root normalized.
inline Povm random_povm(Gen& g, int d, int m, int rank = -1) {
  std::vector<CMatrix> w;
  CMatrix s = CMatrix::Zero(d, d);
  for (int b = 0; b < m; ++b) {
    w.push_back(random_psd(g, d, rank).matrix());
    s += w.back();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
  const CMatrix is = es.operatorInverseSqrt();
  std::vector<HermitianMatrix> eff;
  for (const auto& x : w) eff.push_back(HermitianMatrix::hermitian_part(is * x * is));
  return Povm::sanitized(eff);
}

inline Ensemble random_ensemble(Gen& g, int d, int m, int rank = -1) {
  std::vector<HermitianMatrix> st;
  double total = 0.0;
  std::vector<double> w(m);
  for (auto& x : w) total += (x = g.uniform(0.05, 1.0));
  for (int b = 0; b < m; ++b) st.push_back(random_density(g, d, rank) * (w[b] / total));
  return Ensemble::normalized(st);
}

inline std::vector<double> random_simplex(Gen& g, int k) {
  std::vector<double> w(k);
  double t = 0.0;
  for (auto& x : w) t += (x = -std::log(std::max(1e-300, g.uniform())));
  for (auto& x : w) x /= t;
  return w;
}

/// A member of the n-outcome-simulable set: random sub-POVMs on every combination.
inline Povm random_simulable(Gen& g, int d, int m, int n) {
  const auto scheme = outcomes::RelabelingScheme::enumerate(m, n);
  std::vector<Povm> subs;
  for (int x = 0; x < scheme.size(); ++x) subs.push_back(random_povm(g, d, n));
  const auto w = random_simplex(g, scheme.size());
  return outcomes::simulate(scheme, subs, w);
}

/// Sum of absolute eigenvalues, computed directly with Eigen.
inline double trace_norm_oracle(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

/// Minimum-error discrimination of two subnormalized states.
inline double helstrom(const HermitianMatrix& r0, const HermitianMatrix& r1) {
  return 0.5 * ((r0.matrix() + r1.matrix()).trace().real() + trace_norm_oracle(r0.matrix() - r1.matrix()));
}

/// Classical (all-diagonal) ensembles: the best k-outcome-simulable guess commits to a
/// k-subset of labels and, on each basis vector, names the heaviest label in the subset.
inline double classical_free_guess(const std::vector<std::vector<double>>& p, int k) {
  const int m = static_cast<int>(p.size());
  const int d = static_cast<int>(p.front().size());
  double best = 0.0;
  const auto scheme = outcomes::RelabelingScheme::enumerate(m, k);
  for (const auto& x : scheme.combinations()) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      double top = 0.0;
      for (int a : x) top = std::max(top, p[a][i]);
      s += top;
    }
    best = std::max(best, s);
  }
  return best;
}

inline Ensemble diagonal_ensemble(const std::vector<std::vector<double>>& p) {
  std::vector<HermitianMatrix> st;
  for (const auto& row : p) st.push_back(HermitianMatrix::diagonal(row));
  return Ensemble(st);
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace testing_support

#pragma once

// Canonical measurements and ensembles, plus reproducible random instances.
//
// Random draws use std::mt19937_64 (its output sequence is fixed by the standard) and
// hand-written Box-Muller / inverse-CDF transforms, because the standard library
// distributions are implementation-defined. Same seed, same bits, on every platform.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "outcomes/errors.hpp"
#include "outcomes/quantum.hpp"

namespace outcomes::catalog {

inline constexpr const char* kRngName = "mt19937_64+box-muller/v1";

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do u1 = uniform(); while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  Complex complex_normal() { return {normal() / std::sqrt(2.0), normal() / std::sqrt(2.0)}; }

  CMatrix ginibre(int rows, int cols) {
    CMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) g(i, j) = complex_normal();
    return g;
  }

  /// Exponential(1), used for flat Dirichlet weights.
  double exponential() {
    double u = 0.0;
    do u = uniform(); while (u <= 0.0);
    return -std::log(u);
  }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a base seed with a stream index (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline Eigen::VectorXcd basis_ket(int d, int i) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
  v(i) = 1.0;
  return v;
}

/// Computational-basis projectors, zero-padded to m outcomes (m defaults to d).
inline Povm projective_basis(int d, int m = -1) {
  if (m < 0) m = d;
  if (d < 1 || m < d) throw DomainError("projective_basis: need d >= 1 and m >= d");
  std::vector<HermitianMatrix> effects;
  for (int i = 0; i < d; ++i) effects.push_back(HermitianMatrix::projector(basis_ket(d, i)));
  return Povm(std::move(effects)).padded(m);
}

/// (1/2)(I + r . sigma) style qubit effect with weight w: w (I + r.sigma).
inline HermitianMatrix bloch_effect(double w, double rx, double ry, double rz) {
  CMatrix m(2, 2);
  m << Complex(1 + rz, 0), Complex(rx, -ry), Complex(rx, ry), Complex(1 - rz, 0);
  return HermitianMatrix::hermitian_part(w * m);
}

/// (2/3)|psi_k><psi_k| with Bloch vectors 120 degrees apart on the x-z great circle.
inline Povm trine() {
  std::vector<HermitianMatrix> effects;
  for (int k = 0; k < 3; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 3.0;
    effects.push_back(bloch_effect(1.0 / 3.0, std::sin(th), 0.0, std::cos(th)));
  }
  return Povm(std::move(effects));
}

/// Tetrahedral qubit SIC-POVM, effects (1/4)(I + n_k . sigma).
inline Povm sic_qubit() {
  const double s2 = std::sqrt(2.0);
  const double v[4][3] = {{0, 0, 1},
                          {2 * s2 / 3, 0, -1.0 / 3},
                          {-s2 / 3, std::sqrt(2.0 / 3.0), -1.0 / 3},
                          {-s2 / 3, -std::sqrt(2.0 / 3.0), -1.0 / 3}};
  std::vector<HermitianMatrix> effects;
  for (const auto& n : v) effects.push_back(bloch_effect(0.25, n[0], n[1], n[2]));
  return Povm(std::move(effects));
}

/// m orthogonal basis states with prior 1/m each (needs d >= m).
inline Ensemble uniform_orthogonal_ensemble(int d, int m) {
  if (m < 1 || d < m) throw DomainError("uniform_orthogonal_ensemble: need 1 <= m <= d");
  std::vector<HermitianMatrix> states;
  for (int i = 0; i < m; ++i) states.push_back(HermitianMatrix::projector(basis_ket(d, i)) / m);
  return Ensemble(std::move(states));
}

/// M_b = S^{-1/2} G_b G_b^dag S^{-1/2} with S = sum_b G_b G_b^dag and Ginibre G_b of shape
/// d x rank (rank < 0 means d). A singular S re-draws with the next seed.
inline Povm random_povm(int d, int m, std::uint64_t seed, int rank = -1) {
  if (rank < 0) rank = d;
  if (d < 1 || m < 1 || rank < 1 || rank > d) throw DomainError("random_povm: need d, m >= 1 and 1 <= rank <= d");
  if (rank * m < d) throw DomainError("random_povm: effects of this rank cannot sum to the identity (need rank * m >= d)");
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed + attempt);
    std::vector<CMatrix> w;
    CMatrix s = CMatrix::Zero(d, d);
    for (int b = 0; b < m; ++b) {
      const CMatrix g = rng.ginibre(d, rank);
      w.push_back(g * g.adjoint());
      s += w.back();
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
    if (es.eigenvalues().minCoeff() < 1e-10) continue;
    const CMatrix inv_sqrt = es.operatorInverseSqrt();
    std::vector<HermitianMatrix> effects;
    CMatrix total = CMatrix::Zero(d, d);
    for (const auto& wb : w) {
      effects.push_back(HermitianMatrix::hermitian_part(inv_sqrt * wb * inv_sqrt));
      total += effects.back().matrix();
    }
    // Fold the rounding residual of sum_b M_b - I into the effects proportionally.
    const CMatrix fix = CMatrix::Identity(d, d) - total;
    for (auto& e : effects) e = HermitianMatrix::hermitian_part(e.matrix() + fix / double(m));
    return Povm::sanitized(effects);
  }
}

/// Normalized Wishart states with uniform priors, or flat-Dirichlet priors when requested.
inline Ensemble random_ensemble(int d, int m, std::uint64_t seed, bool dirichlet = false) {
  if (d < 1 || m < 1) throw DomainError("random_ensemble: need d, m >= 1");
  Rng rng(seed);
  std::vector<CMatrix> rho;
  for (int b = 0; b < m; ++b) {
    const CMatrix g = rng.ginibre(d, d);
    CMatrix w = g * g.adjoint();
    rho.push_back(w / w.trace().real());
  }
  std::vector<double> prior(m, 1.0 / m);
  if (dirichlet) {
    double total = 0.0;
    for (auto& p : prior) total += (p = rng.exponential());
    for (auto& p : prior) p /= total;
  }
  std::vector<HermitianMatrix> states;
  for (int b = 0; b < m; ++b) states.push_back(HermitianMatrix::hermitian_part(prior[b] * rho[b]));
  return Ensemble::normalized(states);
}

enum class Kind { projective_basis, trine, sic_qubit, uniform_orthogonal_ensemble, random_povm, random_ensemble };

inline Kind parse_kind(const std::string& s) {
  if (s == "projective-basis") return Kind::projective_basis;
  if (s == "trine") return Kind::trine;
  if (s == "sic-qubit") return Kind::sic_qubit;
  if (s == "uniform-orthogonal-ensemble") return Kind::uniform_orthogonal_ensemble;
  if (s == "random-povm") return Kind::random_povm;
  if (s == "random-ensemble") return Kind::random_ensemble;
  throw DomainError("unknown catalog kind: " + s);
}

struct InstanceSpec {
  Kind kind = Kind::projective_basis;
  int d = 2;
  int m = -1;  // -1: kind default
  std::uint64_t seed = 0;
  bool dirichlet = false;
};

using Instance = std::variant<Povm, Ensemble>;

inline Instance make(const InstanceSpec& s) {
  switch (s.kind) {
    case Kind::projective_basis:
      return projective_basis(s.d, s.m);
    case Kind::trine:
      if (s.d != 2 || (s.m != -1 && s.m != 3)) throw DomainError("trine requires d = 2, m = 3");
      return trine();
    case Kind::sic_qubit:
      if (s.d != 2 || (s.m != -1 && s.m != 4)) throw DomainError("sic-qubit requires d = 2, m = 4");
      return sic_qubit();
    case Kind::uniform_orthogonal_ensemble:
      return uniform_orthogonal_ensemble(s.d, s.m < 0 ? s.d : s.m);
    case Kind::random_povm:
      if (s.m < 1) throw DomainError("random-povm requires m >= 1");
      return random_povm(s.d, s.m, s.seed);
    case Kind::random_ensemble:
      if (s.m < 1) throw DomainError("random-ensemble requires m >= 1");
      return random_ensemble(s.d, s.m, s.seed, s.dirichlet);
  }
  throw DomainError("unknown catalog kind");
}

} // namespace outcomes::catalog

#pragma once

// Dense complex Hermitian operators and the measurement/state types built on them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "outcomes/errors.hpp"

namespace outcomes {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kSumTol = 1e-9;

/// Complex d x d Hermitian operator. Immutable once built; Hermiticity is checked on
/// construction to kHermitianTol and the stored entries are exactly Hermitian afterwards.
class HermitianMatrix {
public:
  HermitianMatrix() : m_(CMatrix::Zero(1, 1)) {}

  explicit HermitianMatrix(CMatrix m, double tol = kHermitianTol) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols())
      throw InvariantError("HermitianMatrix: expected a non-empty square matrix");
    if ((m_ - m_.adjoint()).cwiseAbs().maxCoeff() > tol)
      throw InvariantError("HermitianMatrix: matrix is not Hermitian");
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
  }

  /// Builds from the Hermitian part of `m` without checking.
  static HermitianMatrix hermitian_part(const CMatrix& m) {
    HermitianMatrix h;
    h.m_ = 0.5 * (m + m.adjoint());
    return h;
  }

  static HermitianMatrix zero(int d) { return HermitianMatrix(CMatrix::Zero(d, d)); }
  static HermitianMatrix identity(int d) { return HermitianMatrix(CMatrix::Identity(d, d)); }

  static HermitianMatrix diagonal(std::span<const double> diag) {
    CMatrix m = CMatrix::Zero(static_cast<int>(diag.size()), static_cast<int>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return HermitianMatrix(std::move(m));
  }
  static HermitianMatrix diagonal(std::initializer_list<double> diag) {
    return diagonal(std::span<const double>(diag.begin(), diag.size()));
  }

  /// |v><v| for a (not necessarily normalized) vector.
  static HermitianMatrix projector(const Eigen::VectorXcd& v) {
    return hermitian_part(v * v.adjoint());
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }

  HermitianMatrix operator+(const HermitianMatrix& o) const { return hermitian_part(m_ + o.m_); }
  HermitianMatrix operator-(const HermitianMatrix& o) const { return hermitian_part(m_ - o.m_); }
  HermitianMatrix operator-() const { return hermitian_part(-m_); }
  HermitianMatrix operator*(double s) const { return hermitian_part(s * m_); }
  friend HermitianMatrix operator*(double s, const HermitianMatrix& h) { return h * s; }
  HermitianMatrix operator/(double s) const { return hermitian_part(m_ / s); }
  HermitianMatrix& operator+=(const HermitianMatrix& o) { return *this = *this + o; }

  /// Largest absolute entrywise difference.
  double max_abs_diff(const HermitianMatrix& o) const { return (m_ - o.m_).cwiseAbs().maxCoeff(); }

private:
  CMatrix m_;
};

/// Re tr(A B); real for Hermitian arguments.
inline double trace_product(const HermitianMatrix& a, const HermitianMatrix& b) {
  return (a.matrix().cwiseProduct(b.matrix().transpose())).sum().real();
}

struct Eigendecomposition {
  RVector eigenvalues;   // descending
  CMatrix eigenvectors;  // orthonormal columns, matching eigenvalues
};

inline Eigendecomposition eigendecompose(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  if (es.info() != Eigen::Success) throw InvariantError("eigendecompose: decomposition failed");
  const int d = h.dim();
  Eigendecomposition out{RVector(d), CMatrix(d, d)};
  for (int i = 0; i < d; ++i) {
    out.eigenvalues(i) = es.eigenvalues()(d - 1 - i);
    out.eigenvectors.col(i) = es.eigenvectors().col(d - 1 - i);
  }
  return out;
}

inline double min_eigenvalue(const HermitianMatrix& h) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(h.matrix(), Eigen::EigenvaluesOnly).eigenvalues()(0);
}

inline double trace_norm(const HermitianMatrix& h) {
  return Eigen::SelfAdjointEigenSolver<CMatrix>(h.matrix(), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .cwiseAbs()
      .sum();
}

inline bool is_psd(const HermitianMatrix& h, double tol = kPsdTol) { return min_eigenvalue(h) >= -tol; }

/// Clamps eigenvalues in [-tol, 0) to zero. Anything more negative is rejected.
inline HermitianMatrix sanitize_psd(const HermitianMatrix& h, double tol = kPsdTol) {
  auto [vals, vecs] = eigendecompose(h);
  if (vals.minCoeff() < -tol) throw InvariantError("sanitize_psd: eigenvalue below -tol");
  RVector clamped = vals.cwiseMax(0.0);
  return HermitianMatrix::hermitian_part(vecs * clamped.cast<Complex>().asDiagonal() * vecs.adjoint());
}

inline HermitianMatrix sum(std::span<const HermitianMatrix> ops, int dim) {
  CMatrix acc = CMatrix::Zero(dim, dim);
  for (const auto& op : ops) acc += op.matrix();
  return HermitianMatrix::hermitian_part(acc);
}

namespace detail {

inline int common_dim(std::span<const HermitianMatrix> ops, const char* what) {
  if (ops.empty()) throw InvariantError(std::string(what) + ": needs at least one operator");
  const int d = ops.front().dim();
  for (const auto& op : ops)
    if (op.dim() != d) throw InvariantError(std::string(what) + ": operators of mixed dimension");
  return d;
}

} // namespace detail

/// Ordered list of PSD effects summing to the identity. Zero effects are allowed.
class Povm {
public:
  explicit Povm(std::vector<HermitianMatrix> effects, double psd_tol = kPsdTol)
      : effects_(std::move(effects)) {
    dim_ = detail::common_dim(effects_, "Povm");
    for (const auto& e : effects_)
      if (!is_psd(e, psd_tol)) throw InvariantError("Povm: effect is not positive semidefinite");
    const auto total = sum(effects_, dim_);
    if (total.max_abs_diff(HermitianMatrix::identity(dim_)) > kSumTol)
      throw InvariantError("Povm: effects do not sum to the identity");
  }

  /// Clamps slightly negative eigenvalues of each effect, then validates as usual.
  static Povm sanitized(const std::vector<HermitianMatrix>& effects, double psd_tol = kPsdTol) {
    std::vector<HermitianMatrix> clean;
    clean.reserve(effects.size());
    for (const auto& e : effects) clean.push_back(sanitize_psd(e, psd_tol));
    return Povm(std::move(clean), psd_tol);
  }

  int dim() const { return dim_; }
  int outcomes() const { return static_cast<int>(effects_.size()); }
  const std::vector<HermitianMatrix>& effects() const { return effects_; }
  const HermitianMatrix& operator[](int b) const { return effects_.at(b); }

  /// The same measurement with effects listed in the order given by `perm` (new b = old perm[b]).
  Povm permuted(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != outcomes()) throw DomainError("Povm::permuted: wrong length");
    std::vector<HermitianMatrix> out;
    for (int p : perm) out.push_back(effects_.at(p));
    return Povm(std::move(out));
  }

  /// Adds zero effects until there are `m` outcomes.
  Povm padded(int m) const {
    if (m < outcomes()) throw DomainError("Povm::padded: cannot shrink");
    auto out = effects_;
    while (static_cast<int>(out.size()) < m) out.push_back(HermitianMatrix::zero(dim_));
    return Povm(std::move(out));
  }

private:
  std::vector<HermitianMatrix> effects_;
  int dim_ = 0;
};

/// lambda * a + (1 - lambda) * b, outcome by outcome.
inline Povm mix(const Povm& a, const Povm& b, double lambda) {
  if (a.dim() != b.dim() || a.outcomes() != b.outcomes()) throw DomainError("mix: shape mismatch");
  std::vector<HermitianMatrix> out;
  for (int i = 0; i < a.outcomes(); ++i) out.push_back(lambda * a[i] + (1.0 - lambda) * b[i]);
  return Povm(std::move(out));
}

/// Subnormalized states p(b) rho_b with the prior folded in; traces sum to one.
class Ensemble {
public:
  explicit Ensemble(std::vector<HermitianMatrix> states, double psd_tol = kPsdTol)
      : states_(std::move(states)) {
    dim_ = detail::common_dim(states_, "Ensemble");
    double total = 0.0;
    for (const auto& s : states_) {
      if (!is_psd(s, psd_tol)) throw InvariantError("Ensemble: state is not positive semidefinite");
      total += s.trace();
    }
    if (std::abs(total - 1.0) > kSumTol) throw InvariantError("Ensemble: total trace is not one");
  }

  /// Rescales a family of PSD operators to unit total trace (after clamping tiny negative
  /// eigenvalues).
  static Ensemble normalized(const std::vector<HermitianMatrix>& ops, double psd_tol = kPsdTol) {
    std::vector<HermitianMatrix> clean;
    double total = 0.0;
    for (const auto& o : ops) {
      clean.push_back(sanitize_psd(o, psd_tol));
      total += clean.back().trace();
    }
    if (!(total > 0.0)) throw InvariantError("Ensemble::normalized: zero total trace");
    for (auto& c : clean) c = c / total;
    return Ensemble(std::move(clean), psd_tol);
  }

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(states_.size()); }
  const std::vector<HermitianMatrix>& states() const { return states_; }
  const HermitianMatrix& operator[](int b) const { return states_.at(b); }
  double prior(int b) const { return states_.at(b).trace(); }

private:
  std::vector<HermitianMatrix> states_;
  int dim_ = 0;
};

/// One POVM per setting y, all on the same space.
class MeasurementAssemblage {
public:
  explicit MeasurementAssemblage(std::vector<Povm> settings) : settings_(std::move(settings)) {
    if (settings_.empty()) throw InvariantError("MeasurementAssemblage: no settings");
    for (const auto& s : settings_)
      if (s.dim() != settings_.front().dim())
        throw InvariantError("MeasurementAssemblage: settings of mixed dimension");
  }

  int dim() const { return settings_.front().dim(); }
  int settings() const { return static_cast<int>(settings_.size()); }
  const std::vector<Povm>& povms() const { return settings_; }
  const Povm& operator[](int y) const { return settings_.at(y); }

private:
  std::vector<Povm> settings_;
};

/// Number of effects with trace above eps. A necessary proxy only; the simulability-based
/// count lives in robustness.hpp.
inline int effective_outcome_count(const Povm& m, double eps = 1e-9) {
  return static_cast<int>(std::count_if(m.effects().begin(), m.effects().end(),
                                        [eps](const HermitianMatrix& e) { return e.trace() > eps; }));
}

} // namespace outcomes

#pragma once

// Linear prepare-and-measure scores S = sum_{x,y,b} c[x][y][b] p(x) p(b|x,y) and the
// linear map f: {M_{b|y}} -> {N_x = sum_{y,b} c[x][y][b] M_{b|y}} that turns them into
// S = sum_x p(x) tr(rho_x N_x). A separating witness {W_x} between f(M) and the images of
// free assemblages becomes a preparation ensemble after shifting by the most negative
// eigenvalue and normalizing.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "outcomes/conic.hpp"
#include "outcomes/errors.hpp"
#include "outcomes/quantum.hpp"

namespace outcomes {

class ScoreCoefficients {
public:
  ScoreCoefficients(int x, int y, int b) : nx_(x), ny_(y), nb_(b), c_(static_cast<std::size_t>(x) * y * b, 0.0) {
    if (x < 1 || y < 1 || b < 1) throw InvariantError("ScoreCoefficients: index ranges must be positive");
  }

  /// Single setting, c[x][0][b] = delta_{x,b}: plain minimum-error discrimination.
  static ScoreCoefficients discrimination(int outcomes) {
    ScoreCoefficients c(outcomes, 1, outcomes);
    for (int b = 0; b < outcomes; ++b) c.at(b, 0, b) = 1.0;
    return c;
  }

  /// x = (w, a) flattened as w * outcomes + a, c = delta_{b,a} delta_{w,y}: the announced
  /// setting w tells which measurement to use, a is the state to name.
  static ScoreCoefficients pre_measurement_info(int settings, int outcomes) {
    ScoreCoefficients c(settings * outcomes, settings, outcomes);
    for (int w = 0; w < settings; ++w)
      for (int a = 0; a < outcomes; ++a) c.at(w * outcomes + a, w, a) = 1.0;
    return c;
  }

  int x_range() const { return nx_; }
  int y_range() const { return ny_; }
  int b_range() const { return nb_; }

  double& at(int x, int y, int b) { return c_.at(index(x, y, b)); }
  double at(int x, int y, int b) const { return c_.at(index(x, y, b)); }

  ScoreCoefficients scaled(double gamma) const {
    auto out = *this;
    for (auto& v : out.c_) v *= gamma;
    return out;
  }

  /// X x (Y*B) matrix of the map on outcome labels; f acts as this matrix tensored with the
  /// identity on Hermitian operators.
  RMatrix as_matrix() const {
    RMatrix m(nx_, ny_ * nb_);
    for (int x = 0; x < nx_; ++x)
      for (int y = 0; y < ny_; ++y)
        for (int b = 0; b < nb_; ++b) m(x, y * nb_ + b) = at(x, y, b);
    return m;
  }

private:
  std::size_t index(int x, int y, int b) const {
    if (x < 0 || x >= nx_ || y < 0 || y >= ny_ || b < 0 || b >= nb_) throw DomainError("ScoreCoefficients: index out of range");
    return (static_cast<std::size_t>(x) * ny_ + y) * nb_ + b;
  }

  int nx_, ny_, nb_;
  std::vector<double> c_;
};

namespace detail {

inline void check_shapes(const ScoreCoefficients& c, const MeasurementAssemblage& a) {
  if (a.settings() != c.y_range()) throw DomainError("score: assemblage has the wrong number of settings");
  for (const auto& p : a.povms())
    if (p.outcomes() != c.b_range()) throw DomainError("score: setting has the wrong number of outcomes");
}

} // namespace detail

/// S = sum_{x,y,b} c[x][y][b] tr(rho~_x M_{b|y}) with rho~_x = p(x) rho_x.
inline double score(const ScoreCoefficients& c, const Ensemble& preparations, const MeasurementAssemblage& a) {
  detail::check_shapes(c, a);
  if (preparations.size() != c.x_range()) throw DomainError("score: need one preparation per x");
  if (preparations.dim() != a.dim()) throw DomainError("score: dimension mismatch");
  double s = 0.0;
  for (int x = 0; x < c.x_range(); ++x)
    for (int y = 0; y < c.y_range(); ++y)
      for (int b = 0; b < c.b_range(); ++b) {
        const double cv = c.at(x, y, b);
        if (cv != 0.0) s += cv * trace_product(preparations[x], a[y][b]);
      }
  return s;
}

/// N_x = sum_{y,b} c[x][y][b] M_{b|y}.
inline std::vector<HermitianMatrix> apply_f(const ScoreCoefficients& c, const MeasurementAssemblage& a) {
  detail::check_shapes(c, a);
  std::vector<HermitianMatrix> out;
  for (int x = 0; x < c.x_range(); ++x) {
    CMatrix acc = CMatrix::Zero(a.dim(), a.dim());
    for (int y = 0; y < c.y_range(); ++y)
      for (int b = 0; b < c.b_range(); ++b) acc += c.at(x, y, b) * a[y][b].matrix();
    out.push_back(HermitianMatrix::hermitian_part(acc));
  }
  return out;
}

/// sum_x tr(rho~_x N_x).
inline double pairing(const Ensemble& e, const std::vector<HermitianMatrix>& n) {
  if (static_cast<int>(n.size()) != e.size()) throw DomainError("pairing: length mismatch");
  double s = 0.0;
  for (int x = 0; x < e.size(); ++x) s += trace_product(e[x], n[x]);
  return s;
}

struct Bijectivity {
  int rank = 0;
  int domain = 0;    // Y * B label pairs
  int codomain = 0;  // X
  bool injective = false;
  bool bijective = false;
};

/// Numerical rank of the label map; f is bijective on Hermitian families iff it is square
/// and full rank.
inline Bijectivity check_bijective(const ScoreCoefficients& c) {
  const RMatrix m = c.as_matrix();
  Eigen::ColPivHouseholderQR<RMatrix> qr(m);
  qr.setThreshold(1e-10);
  Bijectivity r;
  r.rank = static_cast<int>(qr.rank());
  r.domain = static_cast<int>(m.cols());
  r.codomain = static_cast<int>(m.rows());
  r.injective = r.rank == r.domain;
  r.bijective = r.injective && r.domain == r.codomain;
  return r;
}

struct WitnessFamily {
  std::vector<HermitianMatrix> raw;
  std::vector<HermitianMatrix> shifted;  // raw + shift * I, all PSD
  double shift = 0.0;                    // |lambda_min| over the family, 0 if already PSD
};

struct WitnessEnsemble {
  Ensemble ensemble;  // shifted / sum_x tr(shifted_x)
  WitnessFamily family;
};

/// Shifts a Hermitian family by one multiple of the identity so every member is PSD and
/// normalizes it into preparations. For competitors with equal sum_x tr(N_x), the shift
/// adds the same constant to every pairing, so strict orderings are preserved.
inline WitnessEnsemble witness_to_ensemble(const std::vector<HermitianMatrix>& w) {
  if (w.empty()) throw InvariantError("witness_to_ensemble: empty family");
  const int d = detail::common_dim(w, "witness_to_ensemble");
  double lmin = std::numeric_limits<double>::infinity();
  for (const auto& wx : w) lmin = std::min(lmin, min_eigenvalue(wx));
  WitnessFamily fam;
  fam.raw = w;
  fam.shift = lmin < 0.0 ? -lmin : 0.0;
  double total = 0.0;
  for (const auto& wx : w) {
    fam.shifted.push_back(wx + HermitianMatrix::identity(d) * fam.shift);
    total += fam.shifted.back().trace();
  }
  if (!(total > 1e-12)) throw InvariantError("witness_to_ensemble: degenerate witness (zero total trace after shift)");
  return WitnessEnsemble{Ensemble::normalized(fam.shifted), std::move(fam)};
}

/// Best witness separating f(A) from the sampled f(O_k): maximize
/// sum_x tr(W_x N_x) - t with sum_x tr(W_x N^k_x) <= t and -I <= W_x <= I.
inline std::pair<std::vector<HermitianMatrix>, double> separating_witness(
    const std::vector<HermitianMatrix>& target, const std::vector<std::vector<HermitianMatrix>>& samples, double tol = 1e-8) {
  const int nx = static_cast<int>(target.size());
  const int d = target.front().dim();
  const auto id = HermitianMatrix::identity(d);
  const auto one = HermitianMatrix::identity(1);
  conic::SdpProblem p;
  std::vector<int> w(nx);
  for (int x = 0; x < nx; ++x) w[x] = p.add_free("W[" + std::to_string(x) + "]", d);
  const int t = p.add_free("t", 1);
  for (int x = 0; x < nx; ++x) {
    conic::HermExpr upper(d), lower(d);
    upper.add_constant(id).add(w[x], -1.0);
    lower.add_constant(id).add(w[x], 1.0);
    p.add_lmi(std::move(upper));
    p.add_lmi(std::move(lower));
  }
  for (const auto& s : samples) {
    conic::HermExpr e(1);
    e.add(t, 1.0);
    for (int x = 0; x < nx; ++x) e.add_trace(w[x], -s[x], one);
    p.add_lmi(std::move(e));
  }
  conic::ScalarExpr obj;
  for (int x = 0; x < nx; ++x) obj.add(w[x], target[x]);
  obj.add(t, -one);
  p.set_objective(conic::Sense::maximize, std::move(obj));
  const auto sol = conic::solve_or_throw(p, tol, "separating witness");
  return {std::vector<HermitianMatrix>(sol.values.begin(), sol.values.begin() + nx), sol.objective_value};
}

struct GeneralizedAdvantage {
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double resource_score = 0.0;
  double best_free_score = 0.0;
  int best_free_index = -1;
  std::optional<Ensemble> ensemble;
  std::optional<WitnessFamily> witness;
  double separation = 0.0;  // witness margin, when the witness was computed here
  bool degenerate = false;  // best free score <= 0: ratio undefined
  Bijectivity bijectivity;
  std::vector<std::string> warnings;
};

/// S(E, A) / max_k S(E, O_k) over explicitly sampled free assemblages O_k. Without an
/// ensemble, one is built from the best separating witness against the samples.
inline GeneralizedAdvantage generalized_advantage(const ScoreCoefficients& c, const MeasurementAssemblage& a,
                                                  const std::vector<MeasurementAssemblage>& free_samples,
                                                  std::optional<Ensemble> ensemble = std::nullopt,
                                                  double tol = 1e-8) {
  if (free_samples.empty()) throw DomainError("generalized_advantage: need at least one free sample");
  GeneralizedAdvantage out;
  out.bijectivity = check_bijective(c);
  if (!out.bijectivity.bijective)
    out.warnings.push_back("coefficient map is not bijective (rank " + std::to_string(out.bijectivity.rank) + " of " +
                           std::to_string(out.bijectivity.domain) + " -> " + std::to_string(out.bijectivity.codomain) + ")");

  const auto target = apply_f(c, a);
  std::vector<std::vector<HermitianMatrix>> images;
  for (const auto& s : free_samples) images.push_back(apply_f(c, s));

  if (!ensemble) {
    auto [w, margin] = separating_witness(target, images, tol);
    out.separation = margin;
    if (margin <= 1e-9) out.warnings.push_back("no separation from the sampled free assemblages");
    auto we = witness_to_ensemble(w);
    ensemble = std::move(we.ensemble);
    out.witness = std::move(we.family);
  }
  out.ensemble = ensemble;
  out.resource_score = score(c, *ensemble, a);
  out.best_free_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < free_samples.size(); ++k) {
    const double s = score(c, *ensemble, free_samples[k]);
    if (s > out.best_free_score) {
      out.best_free_score = s;
      out.best_free_index = static_cast<int>(k);
    }
  }
  if (out.best_free_score <= 0.0) {
    out.degenerate = true;
    out.warnings.push_back("best free score is not positive; ratio undefined");
    return out;
  }
  out.ratio = out.resource_score / out.best_free_score;
  return out;
}

} // namespace outcomes

#pragma once

// Robustness of an m-outcome POVM with respect to the set of measurements simulable by
// n-outcome ones, through the primal and dual semidefinite programs.
//
// Primal (variables Qt[a|x] = (1+t) p(x) Q_{a|x}, PSD):
//   minimize   (1/d) sum_{a,x,b} D(b|a,x) tr Qt[a|x]
//   subject to sum_{a,x} D(b|a,x) Qt[a|x] - M_b >= 0                 for each b
//              sum_a Qt[a|x] - (1/d) sum_a tr(Qt[a|x]) I = 0          for each x
// Dual (Y_b PSD, Z_x free Hermitian):
//   maximize   sum_b tr(M_b Y_b)
//   subject to Z_x - (1/d) tr(Z_x) I + sum_b D(b|a,x) Y_b <= (1/d) sum_b D(b|a,x) I
//
// The primal optimum is 1 + R. Normalizing the dual witness Y gives the state
// discrimination instance on which M beats every simulable measurement by exactly 1 + R.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "outcomes/conic.hpp"
#include "outcomes/errors.hpp"
#include "outcomes/quantum.hpp"
#include "outcomes/relabeling.hpp"

namespace outcomes {

struct RobustnessOptions {
  double solver_tol = 1e-8;
  double gap_tol = 1e-6;
  double simulability_threshold = 1e-7;  // robustness at or below this counts as simulable
};

struct RobustnessResult {
  int m = 0, n = 0, d = 0;
  double robustness = 0.0;     // t = primal_value - 1
  double primal_value = 0.0;   // 1 + R
  double dual_value = 0.0;
  double gap = 0.0;            // |primal_value - dual_value|
  double solver_tol = 0.0;
  RelabelingScheme scheme;
  std::vector<std::vector<HermitianMatrix>> scaled_sub_povms;  // [x][a] = Qt[a|x]
  std::vector<HermitianMatrix> witness_effects;                // Y_b
  std::vector<HermitianMatrix> free_duals;                     // Z_x
  std::optional<Ensemble> extracted_ensemble;                  // Y_b / tr(sum_b Y_b)
  // Decomposition recovered from the primal: weights p(x) and sub-POVMs Q_{.|x}
  // (absent when p(x) < 1e-12), plus the noise t N_b = sum D Qt - M_b. The noise is one
  // optimal choice; it is not unique in general.
  std::vector<double> weights;
  std::vector<std::optional<Povm>> sub_povms;
  std::vector<HermitianMatrix> noise_effects;
  std::vector<std::string> warnings;
  int primal_iterations = 0;
  int dual_iterations = 0;
};

inline conic::SdpProblem build_robustness_primal(const Povm& povm, int n) {
  const int m = povm.outcomes();
  const int d = povm.dim();
  const auto scheme = RelabelingScheme::enumerate(m, n);
  const auto id = HermitianMatrix::identity(d);

  conic::SdpProblem p;
  std::vector<std::vector<int>> q(scheme.size(), std::vector<int>(n));
  for (int x = 0; x < scheme.size(); ++x)
    for (int a = 0; a < n; ++a) q[x][a] = p.add_psd("Qt[" + std::to_string(a) + "|" + std::to_string(x) + "]", d);

  for (int b = 0; b < m; ++b) {
    conic::HermExpr e(d);
    for (int x = 0; x < scheme.size(); ++x)
      for (int a = 0; a < n; ++a)
        if (scheme.d_value(b, a, x)) e.add(q[x][a], 1.0);
    e.add_constant(-povm[b]);
    p.add_lmi(std::move(e), "dominates[" + std::to_string(b) + "]");
  }
  for (int x = 0; x < scheme.size(); ++x) {
    conic::HermExpr e(d);
    for (int a = 0; a < n; ++a) e.add(q[x][a], 1.0).add_trace(q[x][a], id, id * (-1.0 / d));
    p.add_equality(std::move(e), "proportional_to_identity[" + std::to_string(x) + "]");
  }
  conic::ScalarExpr obj;
  for (int x = 0; x < scheme.size(); ++x)
    for (int a = 0; a < n; ++a) {
      int hits = 0;
      for (int b = 0; b < m; ++b) hits += scheme.d_value(b, a, x);
      obj.add(q[x][a], id * (hits / double(d)));
    }
  p.set_objective(conic::Sense::minimize, std::move(obj));
  return p;
}

inline conic::SdpProblem build_robustness_dual(const Povm& povm, int n) {
  const int m = povm.outcomes();
  const int d = povm.dim();
  const auto scheme = RelabelingScheme::enumerate(m, n);
  const auto id = HermitianMatrix::identity(d);

  conic::SdpProblem p;
  std::vector<int> y(m), z(scheme.size());
  for (int b = 0; b < m; ++b) y[b] = p.add_psd("Y[" + std::to_string(b) + "]", d);
  for (int x = 0; x < scheme.size(); ++x) z[x] = p.add_free("Z[" + std::to_string(x) + "]", d);

  for (int x = 0; x < scheme.size(); ++x)
    for (int a = 0; a < n; ++a) {
      // (1/d) sum_b D I - Z_x + (1/d) tr(Z_x) I - sum_b D Y_b >= 0
      conic::HermExpr e(d);
      int hits = 0;
      for (int b = 0; b < m; ++b)
        if (scheme.d_value(b, a, x)) {
          e.add(y[b], -1.0);
          ++hits;
        }
      e.add_constant(id * (hits / double(d)));
      e.add(z[x], -1.0).add_trace(z[x], id, id * (1.0 / d));
      p.add_lmi(std::move(e), "witness_bound[" + std::to_string(a) + "|" + std::to_string(x) + "]");
    }
  conic::ScalarExpr obj;
  for (int b = 0; b < m; ++b) obj.add(y[b], povm[b]);
  p.set_objective(conic::Sense::maximize, std::move(obj));
  return p;
}

inline RobustnessResult robustness(const Povm& povm, int n, const RobustnessOptions& opt = {}) {
  const int m = povm.outcomes();
  const int d = povm.dim();
  if (n < 1 || n > m) throw DomainError("robustness: need 1 <= n <= m");

  RobustnessResult r;
  r.m = m;
  r.n = n;
  r.d = d;
  r.solver_tol = opt.solver_tol;
  r.scheme = RelabelingScheme::enumerate(m, n);
  const int nx = r.scheme.size();

  const auto primal = conic::solve_or_throw(build_robustness_primal(povm, n), opt.solver_tol, "robustness primal");
  const auto dual = conic::solve_or_throw(build_robustness_dual(povm, n), opt.solver_tol, "robustness dual");
  r.primal_iterations = primal.iterations;
  r.dual_iterations = dual.iterations;
  for (const auto& l : primal.log) r.warnings.push_back("primal: " + l);
  for (const auto& l : dual.log) r.warnings.push_back("dual: " + l);

  r.primal_value = primal.objective_value;
  r.dual_value = dual.objective_value;
  r.gap = std::abs(r.primal_value - r.dual_value);
  r.robustness = r.primal_value - 1.0;
  if (r.gap > opt.gap_tol)
    throw SolverError("robustness: duality gap exceeds tolerance",
                      "primal=" + std::to_string(r.primal_value) + " dual=" + std::to_string(r.dual_value));

  r.scaled_sub_povms.assign(nx, {});
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < n; ++a) r.scaled_sub_povms[x].push_back(primal.values[x * n + a]);
  for (int b = 0; b < m; ++b) r.witness_effects.push_back(dual.values[b]);
  for (int x = 0; x < nx; ++x) r.free_duals.push_back(dual.values[m + x]);

  double witness_mass = 0.0;
  for (const auto& yb : r.witness_effects) witness_mass += yb.trace();
  if (witness_mass >= 1e-10) {
    try {
      r.extracted_ensemble = Ensemble::normalized(r.witness_effects, 1e-7);
    } catch (const InvariantError& e) {
      r.warnings.push_back(std::string("witness ensemble rejected: ") + e.what());
    }
  } else {
    r.warnings.push_back("witness has vanishing trace; no ensemble extracted");
  }

  r.weights.assign(nx, 0.0);
  r.sub_povms.assign(nx, std::nullopt);
  for (int x = 0; x < nx; ++x) {
    double mass = 0.0;
    for (const auto& q : r.scaled_sub_povms[x]) mass += q.trace();
    r.weights[x] = mass / (d * r.primal_value);
    if (r.weights[x] < 1e-12) continue;
    std::vector<HermitianMatrix> effects;
    for (const auto& q : r.scaled_sub_povms[x]) effects.push_back(q * (d / mass));
    // Rescaling exposes the solver's relative accuracy; renormalize onto the POVM set.
    const auto total = sum(effects, d);
    const auto [vals, vecs] = eigendecompose(total);
    if (vals.minCoeff() <= 0.0) continue;
    const CMatrix inv_sqrt = vecs * vals.cwiseInverse().cwiseSqrt().cast<Complex>().asDiagonal() * vecs.adjoint();
    for (auto& e : effects) e = HermitianMatrix::hermitian_part(inv_sqrt * e.matrix() * inv_sqrt);
    try {
      r.sub_povms[x] = Povm::sanitized(effects, 1e-6);
    } catch (const InvariantError&) {
      r.warnings.push_back("sub-POVM " + std::to_string(x) + " could not be normalized");
    }
  }
  for (int b = 0; b < m; ++b) {
    CMatrix acc = -povm[b].matrix();
    for (int x = 0; x < nx; ++x)
      for (int a = 0; a < n; ++a)
        if (r.scheme.d_value(b, a, x)) acc += r.scaled_sub_povms[x][a].matrix();
    r.noise_effects.push_back(HermitianMatrix::hermitian_part(acc));
  }
  return r;
}

struct EffectiveOutcomes {
  int number = 0;
  std::vector<double> robustness_by_k;  // index k-1, filled up to the first simulable k
};

/// Smallest k for which the measurement is k-outcome simulable (robustness below threshold).
inline EffectiveOutcomes effective_outcomes(const Povm& povm, const RobustnessOptions& opt = {}) {
  EffectiveOutcomes out;
  const int m = povm.outcomes();
  for (int k = 1; k <= m; ++k) {
    const double r = robustness(povm, k, opt).robustness;
    out.robustness_by_k.push_back(r);
    if (r <= opt.simulability_threshold) {
      out.number = k;
      return out;
    }
  }
  out.number = m;
  return out;
}

inline int effective_outcome_number(const Povm& povm, const RobustnessOptions& opt = {}) {
  return effective_outcomes(povm, opt).number;
}

} // namespace outcomes

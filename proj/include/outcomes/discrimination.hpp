#pragma once

// Minimum-error state discrimination: guessing probabilities, optimal measurements, the best
// score reachable by n-outcome-simulable measurements, and outcome-count certification.

#include <algorithm>
#include <string>
#include <vector>

#include "outcomes/conic.hpp"
#include "outcomes/errors.hpp"
#include "outcomes/quantum.hpp"
#include "outcomes/relabeling.hpp"

namespace outcomes {

/// P_guess(E, M) = sum_b tr(rho_b M_b).
inline double guess_probability(const Ensemble& e, const Povm& m) {
  if (e.dim() != m.dim()) throw DomainError("guess_probability: dimension mismatch");
  if (e.size() != m.outcomes()) throw DomainError("guess_probability: need one effect per state");
  double p = 0.0;
  for (int b = 0; b < e.size(); ++b) p += trace_product(e[b], m[b]);
  return p;
}

struct OptimalGuess {
  double value = 0.0;
  double dual_bound = 0.0;
  Povm povm;
  int iterations = 0;
};

namespace detail {

/// max sum_a tr(states[a] Q_a) over POVMs with states.size() outcomes (states may be
/// subnormalized or zero).
inline OptimalGuess best_measurement(const std::vector<HermitianMatrix>& states, int outcomes, double tol) {
  const int d = states.front().dim();
  conic::SdpProblem p;
  std::vector<int> q(outcomes);
  for (int a = 0; a < outcomes; ++a) q[a] = p.add_psd("M[" + std::to_string(a) + "]", d);
  conic::HermExpr completeness(d);
  for (int a = 0; a < outcomes; ++a) completeness.add(q[a], 1.0);
  completeness.add_constant(-HermitianMatrix::identity(d));
  p.add_equality(std::move(completeness), "completeness");
  conic::ScalarExpr obj;
  for (int a = 0; a < outcomes && a < static_cast<int>(states.size()); ++a) obj.add(q[a], states[a]);
  p.set_objective(conic::Sense::maximize, std::move(obj));

  const auto sol = conic::solve_or_throw(p, tol, "optimal discrimination");
  std::vector<HermitianMatrix> effects(sol.values.begin(), sol.values.end());
  return OptimalGuess{sol.objective_value, sol.dual_value, Povm::sanitized(effects, 1e-7), sol.iterations};
}

} // namespace detail

/// Best guessing probability over k-outcome POVMs where outcome b announces state b.
/// Outcomes beyond |E| never score; with k < |E| the trailing states are never named.
inline OptimalGuess optimal_guess(const Ensemble& e, int k, double tol = 1e-8) {
  if (k < 1) throw DomainError("optimal_guess: need k >= 1");
  return detail::best_measurement(e.states(), k, tol);
}

struct FreeGuess {
  double value = 0.0;
  int best_combination = 0;
  RelabelingScheme scheme;
  std::vector<double> per_combination;    // unnormalized sub-ensemble optima, q_x P_guess(E_x)
  std::vector<Povm> per_combination_povm; // the optimal n-outcome measurement for each x
};

/// max over n-outcome-simulable O of P_guess(E, O). The score is linear in the mixing
/// weights p(x), so the maximum is attained by committing to one combination x and
/// discriminating the unnormalized sub-ensemble {rho_{x_a}} optimally.
inline FreeGuess optimal_free_guess(const Ensemble& e, int n, double tol = 1e-8) {
  const int m = e.size();
  if (n < 1 || n > m) throw DomainError("optimal_free_guess: need 1 <= n <= |E|");
  FreeGuess out;
  out.scheme = RelabelingScheme::enumerate(m, n);
  for (int x = 0; x < out.scheme.size(); ++x) {
    std::vector<HermitianMatrix> sub;
    for (int a = 0; a < n; ++a) sub.push_back(e[out.scheme.label(a, x)]);
    auto best = detail::best_measurement(sub, n, tol);
    out.per_combination.push_back(best.value);
    out.per_combination_povm.push_back(std::move(best.povm));
  }
  const double top = *std::max_element(out.per_combination.begin(), out.per_combination.end());
  // Ties (within solver accuracy) resolve to the lexicographically first combination.
  for (int x = 0; x < out.scheme.size(); ++x)
    if (out.per_combination[x] >= top - 1e-9) {
      out.best_combination = x;
      break;
    }
  out.value = top;
  return out;
}

struct DiscriminationReport {
  Ensemble ensemble;
  double p_guess = 0.0;
  double optimal_free = 0.0;
  double advantage_ratio = 0.0;
  int best_combination = 0;
  double tol = 0.0;
};

/// P_guess(E, M) against the best n-outcome-simulable score on the same instance.
inline DiscriminationReport advantage(const Ensemble& e, const Povm& m, int n, double tol = 1e-8) {
  const double p = guess_probability(e, m);
  const auto free = optimal_free_guess(e, n, tol);
  if (!(free.value > 0.0)) throw DomainError("advantage: simulable optimum is not positive");
  return DiscriminationReport{e, p, free.value, p / free.value, free.best_combination, tol};
}

struct Certification {
  int certified_min_outcomes = 0;
  std::vector<double> thresholds;  // index k-1: best score with k-outcome-simulable devices
  bool consistent = true;          // false if the observation beats every threshold
  double stat_tol = 0.0;
};

/// Smallest k whose simulable optimum is not beaten by the observed guessing probability;
/// devices with fewer than k outcomes are excluded by the observation.
inline Certification certify_outcomes(const Ensemble& e, double observed, double stat_tol = 0.0, double tol = 1e-8) {
  if (observed < 0.0 || observed > 1.0) throw DomainError("certify_outcomes: observed probability outside [0, 1]");
  Certification c;
  c.stat_tol = stat_tol;
  const int m = e.size();
  for (int k = 1; k <= m; ++k) c.thresholds.push_back(optimal_free_guess(e, k, tol).value);
  for (int k = 1; k <= m; ++k)
    if (observed <= c.thresholds[k - 1] + stat_tol) {
      c.certified_min_outcomes = k;
      return c;
    }
  c.certified_min_outcomes = m;
  c.consistent = false;
  return c;
}

} // namespace outcomes

#pragma once

// Maximal advantage of m-outcome measurements over n-outcome-simulable ones: the m/n
// ceiling, its saturating construction, the side-information game used to prove the
// ceiling, and a see-saw search for measurements that come close to it.

#include <cstdint>
#include <future>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "outcomes/catalog.hpp"
#include "outcomes/discrimination.hpp"
#include "outcomes/errors.hpp"
#include "outcomes/quantum.hpp"
#include "outcomes/relabeling.hpp"
#include "outcomes/robustness.hpp"

namespace outcomes {

struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// m/n in lowest terms: the largest possible 1 + R over all m-outcome POVMs.
inline Rational max_advantage_bound(int m, int n) {
  if (n < 1 || n > m) throw DomainError("max_advantage_bound: need 1 <= n <= m");
  const long long g = std::gcd(m, n);
  return {m / g, n / g};
}

struct SaturatingInstance {
  Ensemble ensemble;                // m orthogonal states, prior 1/m each
  Povm povm;                        // projectors onto them, completion folded into the last
  RelabelingScheme scheme;
  std::vector<Povm> free_sub_povms; // per combination x: projectors onto x_1..x_n, completed
  std::vector<double> free_weights; // uniform 1/C(m,n)
  Povm free_povm;                   // the simulated m-outcome measurement
};

/// The construction attaining m/n when d >= m. For d > m the identity completion
/// I - sum of projectors is added to the last effect so the measurement keeps m outcomes;
/// the ensemble lives on the first m basis vectors, so no score changes.
inline SaturatingInstance saturating_instance(int d, int m, int n) {
  if (n < 1 || n > m) throw DomainError("saturating_instance: need 1 <= n <= m");
  if (d < m) throw DomainError("saturating_instance: needs d >= m");
  auto projector = [d](int i) { return HermitianMatrix::projector(catalog::basis_ket(d, i)); };
  auto completed = [&](const std::vector<int>& labels) {
    std::vector<HermitianMatrix> effects;
    auto rest = HermitianMatrix::identity(d);
    for (int l : labels) {
      effects.push_back(projector(l));
      rest = rest - effects.back();
    }
    effects.back() = effects.back() + rest;
    return Povm(std::move(effects));
  };

  std::vector<int> all(m);
  std::iota(all.begin(), all.end(), 0);
  auto scheme = RelabelingScheme::enumerate(m, n);
  std::vector<Povm> subs;
  for (const auto& x : scheme.combinations()) subs.push_back(completed(x));
  std::vector<double> w(scheme.size(), 1.0 / scheme.size());
  auto free = simulate(scheme, subs, w);
  return SaturatingInstance{catalog::uniform_orthogonal_ensemble(d, m), completed(all), std::move(scheme),
                            std::move(subs), std::move(w), std::move(free)};
}

/// Score of discrimination with pre-measurement information: the sub-ensemble x is
/// announced (with probability proportional to its mass) before measuring, so each
/// sub-ensemble gets its own optimal n-outcome measurement. Equals
/// sum_x q_x P_guess(E_x) / C(m-1, n-1).
inline double pre_measurement_info_game(const Ensemble& e, int n, double tol = 1e-8) {
  const int m = e.size();
  if (n < 1 || n > m) throw DomainError("pre_measurement_info_game: need 1 <= n <= |E|");
  const auto free = optimal_free_guess(e, n, tol);
  const double total = std::accumulate(free.per_combination.begin(), free.per_combination.end(), 0.0);
  return total / static_cast<double>(binomial(m - 1, n - 1));
}

struct SeesawStep {
  Ensemble ensemble;
  Povm povm;
  double ratio;
};

struct SeesawTrace {
  int d = 0, m = 0, n = 0;
  std::vector<SeesawStep> iterations;  // best restart
  double final_ratio = 1.0;
  bool converged = false;
  int restarts_used = 0;
  int best_restart = -1;
  Rational bound;
  bool saturation_guaranteed = false;  // d >= m
  std::vector<std::string> warnings;
  double tol = 0.0;
};

struct SeesawOptions {
  int restarts = 20;       // random starting measurements, in addition to the deterministic seed
  int max_iter = 100;
  double tol = 1e-7;       // stop when the ratio improves by less than this
  std::uint64_t seed = 42;
  int jobs = 1;
  double solver_tol = 1e-8;
};

namespace detail {

struct SeesawRun {
  std::vector<SeesawStep> steps;
  bool converged = false;
  std::optional<std::string> failure;
};

/// Alternates (i) the dual-extracted ensemble of the current measurement and (ii) the
/// optimal measurement for that ensemble. Each half-step is an exact optimization, so the
/// recorded ratio P(E_k, M_{k+1}) / P_free(E_k) cannot decrease.
inline SeesawRun seesaw_run(Povm start, int n, const SeesawOptions& opt) {
  SeesawRun run;
  const int m = start.outcomes();
  const double bound = static_cast<double>(m) / n;
  RobustnessOptions ropt;
  ropt.solver_tol = opt.solver_tol;
  Povm current = std::move(start);
  try {
    for (int it = 0; it < opt.max_iter; ++it) {
      const auto rob = robustness(current, n, ropt);
      if (!rob.extracted_ensemble) {
        run.failure = "no witness ensemble at iteration " + std::to_string(it);
        return run;
      }
      const Ensemble& e = *rob.extracted_ensemble;
      auto next = optimal_guess(e, m, opt.solver_tol).povm;
      const double ratio = advantage(e, next, n, opt.solver_tol).advantage_ratio;
      if (ratio > bound + 1e-6)
        throw InvariantError("seesaw: ratio " + std::to_string(ratio) + " exceeds the m/n bound");
      const bool stalled = !run.steps.empty() && ratio - run.steps.back().ratio < opt.tol;
      run.steps.push_back({e, next, ratio});
      current = std::move(next);
      if (stalled) {
        run.converged = true;
        break;
      }
    }
  } catch (const SolverError& err) {
    run.failure = std::string(err.what()) + " (" + err.diagnostics() + ")";
  }
  return run;
}

} // namespace detail

inline SeesawTrace seesaw(int d, int m, int n, const SeesawOptions& opt = {}) {
  if (n < 1 || n > m) throw DomainError("seesaw: need 1 <= n <= m");
  if (d < 2) throw DomainError("seesaw: need d >= 2");
  SeesawTrace trace;
  trace.d = d;
  trace.m = m;
  trace.n = n;
  trace.bound = max_advantage_bound(m, n);
  trace.saturation_guaranteed = d >= m;
  trace.tol = opt.tol;

  // Start 0 is deterministic: the saturating measurement when d >= m, otherwise the
  // computational basis padded with zero effects. Starts 1..restarts are seeded random POVMs of
  // the lowest rank that can complete to the identity; a free start has a degenerate witness
  // that can leave the iteration at ratio 1.
  std::vector<Povm> starts;
  if (d >= m)
    starts.push_back(saturating_instance(d, m, n).povm);
  else
    starts.push_back(catalog::projective_basis(d, m));
  const int rank = (d + m - 1) / m;
  for (int r = 0; r < opt.restarts; ++r)
    starts.push_back(catalog::random_povm(d, m, catalog::derive_seed(opt.seed, static_cast<std::uint64_t>(r)), rank));

  std::vector<detail::SeesawRun> runs(starts.size());
  if (opt.jobs > 1) {
    for (std::size_t begin = 0; begin < starts.size(); begin += opt.jobs) {
      std::vector<std::future<detail::SeesawRun>> batch;
      for (std::size_t i = begin; i < std::min(starts.size(), begin + opt.jobs); ++i)
        batch.push_back(std::async(std::launch::async, detail::seesaw_run, starts[i], n, opt));
      for (std::size_t k = 0; k < batch.size(); ++k) runs[begin + k] = batch[k].get();
    }
  } else {
    for (std::size_t i = 0; i < starts.size(); ++i) runs[i] = detail::seesaw_run(starts[i], n, opt);
  }

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    if (run.failure) {
      trace.warnings.push_back("restart " + std::to_string(i) + " skipped: " + *run.failure);
      continue;
    }
    if (run.steps.empty()) continue;
    ++trace.restarts_used;
    const double ratio = run.steps.back().ratio;
    if (trace.best_restart < 0 || ratio > trace.final_ratio + 1e-12) {
      trace.best_restart = static_cast<int>(i);
      trace.final_ratio = ratio;
      trace.iterations = run.steps;
      trace.converged = run.converged;
    }
  }
  if (trace.best_restart < 0) throw SolverError("seesaw: every restart failed", "");
  if (!trace.saturation_guaranteed)
    trace.warnings.push_back("d < m: the m/n ceiling is not known to be attainable; final_ratio is an empirical maximum");
  return trace;
}

} // namespace outcomes

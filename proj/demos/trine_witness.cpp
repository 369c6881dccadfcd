// Robustness of the qubit trine against two-outcome simulation, and the discrimination
// task read off the dual.

#include <cstdio>

#include "outcomes/outcomes.hpp"

int main() {
  using namespace outcomes;
  const auto trine = catalog::trine();
  const auto r = robustness(trine, 2);
  std::printf("1 + R          = %.12f\n", r.primal_value);
  std::printf("duality gap    = %.2e\n", r.gap);
  if (!r.extracted_ensemble) return 1;
  const auto rep = advantage(*r.extracted_ensemble, trine, 2);
  std::printf("P_guess(trine) = %.12f\n", rep.p_guess);
  std::printf("best 2-outcome = %.12f\n", rep.optimal_free);
  std::printf("ratio          = %.12f\n", rep.advantage_ratio);
  return 0;
}

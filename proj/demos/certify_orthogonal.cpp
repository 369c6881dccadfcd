// Outcome-count certification from an observed success rate on three orthogonal states.

#include <cstdio>

#include "outcomes/outcomes.hpp"

int main() {
  using namespace outcomes;
  const auto e = catalog::uniform_orthogonal_ensemble(3, 3);
  for (double observed : {0.30, 0.60, 0.70, 1.0}) {
    const auto c = certify_outcomes(e, observed);
    std::printf("observed %.2f -> at least %d outcomes\n", observed, c.certified_min_outcomes);
  }
  return 0;
}

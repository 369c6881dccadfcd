// The m/n ceiling reached by m orthogonal states measured in their own basis.

#include <cstdio>
#include <tuple>

#include "outcomes/outcomes.hpp"

int main() {
  using namespace outcomes;
  for (auto [d, m, n] : {std::tuple{3, 3, 2}, std::tuple{4, 4, 2}, std::tuple{4, 4, 3}}) {
    const auto inst = saturating_instance(d, m, n);
    const auto rep = advantage(inst.ensemble, inst.povm, n);
    const auto bound = max_advantage_bound(m, n);
    std::printf("d=%d m=%d n=%d  ratio %.9f  bound %lld/%lld\n", d, m, n, rep.advantage_ratio, bound.num, bound.den);
  }
  return 0;
}

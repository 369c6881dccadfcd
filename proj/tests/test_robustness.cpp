#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "outcomes/catalog.hpp"
#include "outcomes/discrimination.hpp"
#include "outcomes/robustness.hpp"
#include "support.hpp"

using namespace outcomes;
using testing_support::Gen;

namespace {

Povm padded_qubit_basis() { return catalog::projective_basis(2, 3); }

void expect_result_invariants(const RobustnessResult& r) {
  EXPECT_GE(r.robustness, -1e-8);
  EXPECT_LE(r.gap, 1e-6);
  EXPECT_NEAR(r.gap, std::abs(r.primal_value - r.dual_value), 1e-15);
  for (const auto& y : r.witness_effects) EXPECT_GE(min_eigenvalue(y), -1e-8);
  for (const auto& row : r.scaled_sub_povms)
    for (const auto& q : row) EXPECT_GE(min_eigenvalue(q), -1e-8);
  EXPECT_LE(r.primal_value, static_cast<double>(r.m) / r.n + 1e-6);
}

} // namespace

TEST(BuildPrimal, CountsForThreeOutcomesQubit) {
  const auto p = build_robustness_primal(catalog::trine(), 2);
  EXPECT_EQ(p.num_psd(), 6);
  EXPECT_EQ(p.num_free(), 0);
  EXPECT_EQ(p.num_lmi(), 3);
  EXPECT_EQ(p.num_equalities(), 3);
  EXPECT_EQ(p.sense(), conic::Sense::minimize);
}

TEST(BuildPrimal, SingleCombination) {
  const auto p = build_robustness_primal(catalog::projective_basis(2), 2);
  EXPECT_EQ(p.num_psd(), 2);
  EXPECT_EQ(p.num_equalities(), 1);
}

TEST(BuildPrimal, IdentityIsStrictlyFeasible) {
  Gen g(41);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = g.integer(2, 3), m = g.integer(2, 4), n = g.integer(1, m);
    const auto povm = testing_support::random_povm(g, d, m);
    const auto p = build_robustness_primal(povm, n);
    std::vector<HermitianMatrix> point(p.variables().size(), HermitianMatrix::identity(d));
    const auto rep = p.check_point(point);
    // Equalities hold exactly; every cone and LMI has a positive margin.
    EXPECT_LE(rep.max_equality_residual, 1e-14);
    EXPECT_TRUE(rep.strictly_feasible(1e-12)) << "lmi margin " << rep.min_lmi_eigenvalue;
  }
}

TEST(BuildPrimal, DomainErrors) {
  EXPECT_THROW(build_robustness_primal(catalog::trine(), 4), DomainError);
  EXPECT_THROW(build_robustness_primal(catalog::trine(), 0), DomainError);
}

TEST(BuildDual, ShapeAndFeasiblePoints) {
  const auto povm = catalog::trine();
  const auto p = build_robustness_dual(povm, 2);
  EXPECT_EQ(p.num_psd(), 3);
  EXPECT_EQ(p.num_free(), 3);
  EXPECT_EQ(p.sense(), conic::Sense::maximize);

  std::vector<HermitianMatrix> zero(6, HermitianMatrix::zero(2));
  auto rep = p.check_point(zero);
  EXPECT_TRUE(rep.feasible(1e-14));
  EXPECT_NEAR(rep.objective, 0.0, 1e-15);

  std::vector<HermitianMatrix> flat(3, HermitianMatrix::identity(2) / 2.0);
  for (int x = 0; x < 3; ++x) flat.push_back(HermitianMatrix::zero(2));
  rep = p.check_point(flat);
  EXPECT_TRUE(rep.feasible(1e-14));
  EXPECT_NEAR(rep.min_lmi_eigenvalue, 0.0, 1e-14);
  EXPECT_NEAR(rep.objective, 1.0, 1e-14);
}

TEST(Robustness, PaddedProjectiveIsFree) {
  const auto r = robustness(padded_qubit_basis(), 2);
  expect_result_invariants(r);
  EXPECT_LE(r.robustness, 1e-7);
  // All weight sits on the combination that contains both nonzero effects.
  EXPECT_NEAR(r.weights[0], 1.0, 1e-6);
}

TEST(Robustness, QutritBasisPairs) {
  const auto r = robustness(catalog::projective_basis(3), 2);
  expect_result_invariants(r);
  EXPECT_NEAR(r.primal_value, 1.5, 1e-6);
  EXPECT_NEAR(r.robustness, 0.5, 1e-6);
  ASSERT_TRUE(r.extracted_ensemble.has_value());
  const auto rep = advantage(*r.extracted_ensemble, catalog::projective_basis(3), 2);
  EXPECT_NEAR(rep.advantage_ratio, 1.5, 1e-6);
}

TEST(Robustness, TrineWitnessEquality) {
  const auto trine = catalog::trine();
  const auto r = robustness(trine, 2);
  expect_result_invariants(r);
  EXPECT_GT(r.robustness, 1e-3);
  ASSERT_TRUE(r.extracted_ensemble.has_value());
  const auto rep = advantage(*r.extracted_ensemble, trine, 2);
  EXPECT_NEAR(rep.advantage_ratio, r.primal_value, 1e-6);
}

TEST(Robustness, DecompositionReproducesMeasurement) {
  for (const auto& povm : {catalog::trine(), catalog::sic_qubit(), catalog::random_povm(3, 4, 5)}) {
    const auto r = robustness(povm, 2);
    const int d = povm.dim();
    // (1 + t) O_b = M_b + t N_b with O_b the simulated measurement.
    std::vector<Povm> subs;
    std::vector<double> w;
    for (int x = 0; x < r.scheme.size(); ++x) {
      w.push_back(r.weights[x]);
      subs.push_back(r.sub_povms[x] ? *r.sub_povms[x] : Povm(std::vector<HermitianMatrix>(2, HermitianMatrix::identity(d) / 2.0)));
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    EXPECT_NEAR(total, 1.0, 1e-6);
    for (auto& x : w) x /= total;
    const auto o = simulate(r.scheme, subs, w);
    for (int b = 0; b < povm.outcomes(); ++b) {
      const auto lhs = o[b] * r.primal_value;
      const auto rhs = povm[b] + r.noise_effects[b];
      EXPECT_LE(lhs.max_abs_diff(rhs), 1e-5);
      EXPECT_GE(min_eigenvalue(r.noise_effects[b]), -1e-7);
    }
  }
}

TEST(Robustness, PrimalLmiDualsMatchWitness) {
  const auto povm = catalog::trine();
  const auto primal = conic::solve(build_robustness_primal(povm, 2));
  const auto dual = conic::solve(build_robustness_dual(povm, 2));
  ASSERT_TRUE(primal.optimal());
  ASSERT_TRUE(dual.optimal());
  EXPECT_NEAR(primal.objective_value, dual.objective_value, 1e-7);
  // The multipliers of the dominance LMIs of the primal form an optimal dual witness.
  std::vector<HermitianMatrix> y;
  for (int i = 0; i < primal.constraint_duals.size(); ++i)
    if (build_robustness_primal(povm, 2).constraint_kind(i) == conic::SdpProblem::ConstraintKind::lmi)
      y.push_back(primal.constraint_duals[i]);
  ASSERT_EQ(y.size(), 3u);
  double value = 0.0;
  for (int b = 0; b < 3; ++b) {
    EXPECT_GE(min_eigenvalue(y[b]), -1e-7);
    value += trace_product(povm[b], y[b]);
  }
  EXPECT_NEAR(value, dual.objective_value, 1e-6);
}

TEST(Robustness, FreeSetIsZero) {
  Gen g(42);
  for (int trial = 0; trial < 15; ++trial) {
    const int d = g.integer(2, 3), m = g.integer(3, 4), n = g.integer(1, m - 1);
    const auto o = testing_support::random_simulable(g, d, m, n);
    const auto r = robustness(o, n);
    expect_result_invariants(r);
    EXPECT_LE(r.robustness, 1e-7) << "d=" << d << " m=" << m << " n=" << n;
  }
}

TEST(Robustness, MonotoneInN) {
  Gen g(43);
  for (int trial = 0; trial < 8; ++trial) {
    const int d = g.integer(2, 3), m = g.integer(3, 4);
    const auto povm = testing_support::random_povm(g, d, m);
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= m; ++n) {
      const double r = robustness(povm, n).robustness;
      EXPECT_LE(r, prev + 1e-7);
      prev = r;
    }
    EXPECT_LE(prev, 1e-7);  // n = m: everything is free
  }
}

TEST(Robustness, SingleOutcomeBaseline) {
  // n = 1: only trivial measurements are free; 1 + R = sum_b lambda_max(M_b).
  Gen g(44);
  for (int trial = 0; trial < 5; ++trial) {
    const auto povm = testing_support::random_povm(g, 2, 3);
    double expected = 0.0;
    for (const auto& e : povm.effects()) expected += eigendecompose(e).eigenvalues(0);
    EXPECT_NEAR(robustness(povm, 1).primal_value, expected, 1e-6);
  }
}

TEST(Robustness, Convex) {
  Gen g(45);
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 2, m = 3, n = 2;
    const auto a = testing_support::random_povm(g, d, m, 1);
    const auto b = testing_support::random_povm(g, d, m, 1);
    const double lambda = g.uniform();
    const double ra = robustness(a, n).robustness, rb = robustness(b, n).robustness;
    const double rmix = robustness(mix(a, b, lambda), n).robustness;
    EXPECT_LE(rmix, lambda * ra + (1 - lambda) * rb + 1e-6);
  }
}

TEST(Robustness, RelabelingInvariant) {
  Gen g(46);
  for (int trial = 0; trial < 6; ++trial) {
    const int m = g.integer(3, 4);
    const auto povm = testing_support::random_povm(g, 2, m, 1);
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = m - 1; i > 0; --i) std::swap(perm[i], perm[g.integer(0, i)]);
    EXPECT_NEAR(robustness(povm, 2).robustness, robustness(povm.permuted(perm), 2).robustness, 1e-7);
  }
}

TEST(Robustness, QubitCollapseAtFourOutcomes) {
  Gen g(47);
  for (int trial = 0; trial < 5; ++trial) {
    const auto povm = testing_support::random_povm(g, 2, 5, g.integer(1, 2));
    EXPECT_LE(robustness(povm, 4).robustness, 1e-7);
  }
}

TEST(Robustness, BoundedByRatio) {
  Gen g(48);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = g.integer(3, 4);
    const auto r = robustness(testing_support::random_povm(g, 2, m, 1), 2);
    EXPECT_LE(1.0 + r.robustness, m / 2.0 + 1e-6);
  }
}

TEST(EffectiveOutcomes, Examples) {
  EXPECT_EQ(effective_outcome_number(padded_qubit_basis()), 2);
  EXPECT_EQ(effective_outcome_number(catalog::trine()), 3);
  const auto single = Povm({HermitianMatrix::identity(2)}).padded(4);
  EXPECT_EQ(effective_outcome_number(single), 1);
  const auto eo = effective_outcomes(catalog::trine());
  ASSERT_EQ(eo.robustness_by_k.size(), 3u);
  EXPECT_GT(eo.robustness_by_k[1], 1e-3);
}

TEST(EffectiveOutcomes, AtMostSquaredDimension) {
  Gen g(49);
  for (int trial = 0; trial < 3; ++trial) {
    const auto povm = testing_support::random_povm(g, 2, 5, 1);
    EXPECT_LE(effective_outcome_number(povm), 4);
  }
}

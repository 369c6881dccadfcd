#include <gtest/gtest.h>

#include "outcomes/advantage.hpp"
#include "outcomes/catalog.hpp"
#include "support.hpp"

using namespace outcomes;
using testing_support::Gen;

TEST(MaxAdvantageBound, Rationals) {
  EXPECT_EQ(max_advantage_bound(3, 2), (Rational{3, 2}));
  EXPECT_EQ(max_advantage_bound(4, 2), (Rational{2, 1}));
  for (int m = 1; m <= 6; ++m) EXPECT_EQ(max_advantage_bound(m, m), (Rational{1, 1}));
  EXPECT_DOUBLE_EQ(max_advantage_bound(6, 4).value(), 1.5);
  EXPECT_THROW(max_advantage_bound(2, 3), DomainError);
  EXPECT_THROW(max_advantage_bound(3, 0), DomainError);
}

TEST(SaturatingInstance, Examples) {
  struct Case {
    int d, m, n;
    double ratio;
  };
  for (const auto& c : {Case{3, 3, 2, 1.5}, Case{4, 3, 2, 1.5}, Case{2, 2, 1, 2.0}, Case{4, 4, 2, 2.0}, Case{4, 4, 3, 4.0 / 3}}) {
    const auto s = saturating_instance(c.d, c.m, c.n);
    EXPECT_EQ(s.povm.outcomes(), c.m);
    EXPECT_EQ(s.free_povm.outcomes(), c.m);
    const auto rep = advantage(s.ensemble, s.povm, c.n);
    EXPECT_NEAR(rep.advantage_ratio, c.ratio, 1e-6) << c.d << c.m << c.n;
    // The explicit free construction attains the simulable optimum.
    EXPECT_NEAR(guess_probability(s.ensemble, s.free_povm), rep.optimal_free, 1e-8);
  }
  EXPECT_THROW(saturating_instance(2, 3, 2), DomainError);
}

TEST(SaturatingInstance, MatchesRobustness) {
  for (const auto& [d, m, n] : {std::tuple{3, 3, 2}, std::tuple{4, 4, 2}}) {
    const auto s = saturating_instance(d, m, n);
    EXPECT_NEAR(robustness(s.povm, n).primal_value, double(m) / n, 1e-6);
    EXPECT_LE(robustness(s.free_povm, n).robustness, 1e-7);
  }
}

TEST(PreMeasurementGame, Examples) {
  const auto orth = catalog::uniform_orthogonal_ensemble(3, 3);
  EXPECT_NEAR(pre_measurement_info_game(orth, 2), 1.0, 1e-8);
  Gen g(61);
  const auto e = testing_support::random_ensemble(g, 2, 3);
  EXPECT_NEAR(pre_measurement_info_game(e, 1), 1.0, 1e-8);
  EXPECT_NEAR(pre_measurement_info_game(catalog::uniform_orthogonal_ensemble(2, 2), 2), 1.0, 1e-8);
  EXPECT_THROW(pre_measurement_info_game(orth, 4), DomainError);
}

TEST(PreMeasurementGame, InformationNeverHurts) {
  Gen g(62);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = g.integer(2, 4), n = g.integer(1, m);
    const auto e = testing_support::random_ensemble(g, g.integer(2, 3), m);
    const double game = pre_measurement_info_game(e, n);
    EXPECT_GE(game, optimal_guess(e, m).value - 1e-8);
    // The game value is an average over combinations, so it never exceeds (m/n) times the best one.
    EXPECT_LE(game, double(m) / n * optimal_free_guess(e, n).value + 1e-8);
  }
}

TEST(Seesaw, SaturatesForQutritThreeOutcomes) {
  SeesawOptions opt;
  opt.restarts = 2;
  const auto t = seesaw(3, 3, 2, opt);
  EXPECT_NEAR(t.final_ratio, 1.5, 1e-6);
  EXPECT_TRUE(t.saturation_guaranteed);
  EXPECT_EQ(t.bound, (Rational{3, 2}));
}

TEST(Seesaw, QubitThreeOutcomesBeatsFreeSet) {
  SeesawOptions opt;
  opt.restarts = 20;
  opt.seed = 7;
  const auto t = seesaw(2, 3, 2, opt);
  EXPECT_GT(t.final_ratio, 1.0 + 1e-4);
  EXPECT_LE(t.final_ratio, 1.5 + 1e-6);
  EXPECT_FALSE(t.saturation_guaranteed);
  EXPECT_FALSE(t.warnings.empty());
}

TEST(Seesaw, NothingToGainWhenAllOutcomesAreFree) {
  SeesawOptions opt;
  opt.restarts = 3;
  EXPECT_NEAR(seesaw(2, 2, 2, opt).final_ratio, 1.0, 1e-6);
}

TEST(Seesaw, MonotoneAndBounded) {
  for (const auto& [d, m] : {std::pair{2, 3}, std::pair{2, 4}, std::pair{3, 4}}) {
    SeesawOptions opt;
    opt.restarts = 3;
    opt.seed = 100 + d * 10 + m;
    const auto t = seesaw(d, m, 2, opt);
    ASSERT_FALSE(t.iterations.empty());
    for (std::size_t i = 0; i < t.iterations.size(); ++i) {
      EXPECT_LE(t.iterations[i].ratio, m / 2.0 + 1e-6);
      if (i > 0) EXPECT_GE(t.iterations[i].ratio, t.iterations[i - 1].ratio - 1e-9);
    }
    EXPECT_DOUBLE_EQ(t.final_ratio, t.iterations.back().ratio);
    EXPECT_GE(t.restarts_used, 1);
  }
}

TEST(Seesaw, Deterministic) {
  SeesawOptions opt;
  opt.restarts = 4;
  opt.seed = 42;
  const auto a = seesaw(2, 3, 2, opt);
  const auto b = seesaw(2, 3, 2, opt);
  opt.jobs = 3;
  const auto c = seesaw(2, 3, 2, opt);
  EXPECT_EQ(a.final_ratio, b.final_ratio);
  EXPECT_EQ(a.final_ratio, c.final_ratio);
  EXPECT_EQ(a.best_restart, c.best_restart);
  ASSERT_EQ(a.iterations.size(), c.iterations.size());
  for (std::size_t i = 0; i < a.iterations.size(); ++i) EXPECT_EQ(a.iterations[i].ratio, c.iterations[i].ratio);
}

TEST(Seesaw, DomainErrors) {
  EXPECT_THROW(seesaw(2, 2, 3), DomainError);
  EXPECT_THROW(seesaw(1, 2, 1), DomainError);
}

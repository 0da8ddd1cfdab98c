#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "revlab/divergence.hpp"
#include "revlab/errors.hpp"
#include "revlab/hard_instances.hpp"
#include "revlab/simulate.hpp"

using namespace revlab;

namespace {

HardInstanceSpec tiny_single() {
  HardInstanceSpec s;
  s.family = Family::SingleStepPac;
  s.n = 1;
  s.K = 2;
  s.H = 4;
  s.A = 3;
  s.sigma = 0.5;
  s.unchecked = true;
  s.theta = HiddenParams{2, 0, 1, 0, {2}};
  s.mu = {1, -1};
  return s;
}

HardInstanceSpec tiny_regret() {
  HardInstanceSpec s;
  s.family = Family::MultiStepRegret;
  s.n = 1;
  s.m = 1;
  s.K = 2;
  s.H = 4;
  s.A = 6;
  s.sigma = 0.5;
  s.unchecked = true;
  s.theta = HiddenParams{1, 0, 2, 1, {3, 4}};
  s.mu = {1, -1};
  return s;
}

using Key = std::pair<std::vector<int>, std::vector<int>>;

std::map<Key, double> law(const TabularPOMDP& m, const Policy& pi) {
  std::map<Key, double> out;
  for (const auto& w : enumerate_distribution(m, pi)) out[{w.traj.obs, w.traj.act}] += w.prob;
  return out;
}

}  // namespace

TEST(Divergences, MatchHandComputedValues) {
  FiniteDistribution p{{0.5, 0.5}}, q{{0.25, 0.75}};
  const auto d = divergences(p, q);
  EXPECT_NEAR(d.tv, 0.25, 1e-15);
  EXPECT_NEAR(d.chi_sq, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(d.kl, 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0), 1e-15);
  const double h = std::pow(std::sqrt(0.5) - 0.5, 2) + std::pow(std::sqrt(0.5) - std::sqrt(0.75), 2);
  EXPECT_NEAR(d.hellinger_sq, h, 1e-15);
}

TEST(Divergences, UndominatedSupportIsInfinite) {
  const auto d = divergences({{0.5, 0.5}}, {{1.0, 0.0}});
  EXPECT_EQ(d.kl, kInfiniteDivergence);
  EXPECT_EQ(d.chi_sq, kInfiniteDivergence);
  EXPECT_TRUE(check_divergence_inequalities(d).all());
  const auto z = divergences({{1.0, 0.0}}, {{0.5, 0.5}});
  EXPECT_NEAR(z.kl, std::log(2.0), 1e-15);
}

TEST(Divergences, ValidateRejectsBadInput) {
  EXPECT_THROW((FiniteDistribution{{0.5, 0.6}}.validate()), ParameterError);
  EXPECT_THROW((FiniteDistribution{{1.5, -0.5}}.validate()), ParameterError);
}

TEST(Divergences, InequalitiesHoldOnRandomPairs) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto [p, q] = random_distribution_pair(2 + static_cast<int>(rng() % 12), rng);
    ASSERT_TRUE(check_divergence_inequalities(divergences(p, q)).all()) << "pair " << i;
  }
}

TEST(Divergences, HellingerConditioningOnRandomJoints) {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const int nx = 2 + static_cast<int>(rng() % 3), ny = 2 + static_cast<int>(rng() % 3);
    auto [p, q] = random_distribution_pair(nx * ny, rng);
    const auto r = hellinger_conditioning_check(p.prob, q.prob, nx, ny);
    ASSERT_TRUE(r.ok) << r.lhs << " > " << r.rhs;
  }
  // Same conditionals under different marginals: the left side is 0.
  const auto r = hellinger_conditioning_check({0.1, 0.3, 0.15, 0.45}, {0.05, 0.15, 0.2, 0.6}, 2, 2);
  EXPECT_NEAR(r.lhs, 0.0, 1e-15);
}

TEST(Ingster, SingleEpisodeMatchesDirectMixture) {
  const auto s = tiny_single();
  std::vector<TabularPOMDP> members;
  for (auto mu : {std::vector<int>{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}) {
    auto m = s;
    m.mu = mu;
    members.push_back(build_instance(m).pomdp);
  }
  auto ref_spec = s;
  ref_spec.theta.reset();
  const auto ref = build_instance(ref_spec).pomdp;
  auto pi = std::make_shared<UniformPolicy>(s.A);
  const auto ig = ingster_check(members, std::vector<double>(4, 0.25), ref, fixed_schedule({pi}), 1);
  EXPECT_LE(ig.gap, 1e-12);

  std::map<Key, double> mix;
  for (const auto& m : members)
    for (const auto& [k, v] : law(m, *pi)) mix[k] += 0.25 * v;
  double direct = 0;
  for (const auto& [k, v] : law(ref, *pi)) direct += mix[k] * mix[k] / v;
  EXPECT_NEAR(ig.lhs, direct, 1e-12);
}

TEST(Ingster, AdaptiveScheduleOverTwoEpisodes) {
  const auto s = tiny_single();
  std::vector<TabularPOMDP> members;
  for (auto mu : {std::vector<int>{1, -1}, {-1, 1}}) {
    auto m = s;
    m.mu = mu;
    members.push_back(build_instance(m).pomdp);
  }
  auto ref_spec = s;
  ref_spec.theta.reset();
  const auto ref = build_instance(ref_spec).pomdp;
  auto first = std::make_shared<UniformPolicy>(s.A);
  const auto sched = two_branch_schedule(first, 4, 3, optimal_policy(s),
                                         std::make_shared<ActionSequencePolicy>(3, std::vector<int>(4, 0)));
  const auto ig = ingster_check(members, {0.5, 0.5}, ref, sched, 2);
  EXPECT_LE(ig.gap, 1e-12);
  EXPECT_GE(ig.lhs, 1.0 - 1e-12);
}

TEST(Chi2, SingleCorrectEpisodeIsExact) {
  const auto s = tiny_regret();
  const auto c = chi2_inner_product_check(s, {1, 1}, fixed_schedule({optimal_policy(s)}), 1, 0, 1);
  EXPECT_TRUE(c.ok);
  EXPECT_NEAR(c.lhs, 1 + 4.0 / 3.0 * s.eps * s.eps, 1e-12);
}

TEST(Chi2, SingleStepBoundHolds) {
  const auto s = tiny_single();
  auto pi = std::make_shared<UniformPolicy>(s.A);
  const auto c = chi2_inner_product_check(s, {-1, 1}, fixed_schedule({pi, optimal_policy(s)}), 2,
                                          2 * s.H, 2);
  EXPECT_TRUE(c.ok) << c.lhs << " vs " << c.bound;
}

TEST(ConditionalRatio, MatchesTheThreeCases) {
  const auto s = tiny_regret();
  for (auto mu2 : {std::vector<int>{1, 1}, {-1, 1}, {1, -1}}) {
    const auto r = conditional_ratio_check(s, mu2);
    EXPECT_GT(r.histories, 0u);
    EXPECT_GT(r.in_reveal, 0u);
    EXPECT_GT(r.in_correct, 0u);
    EXPECT_LE(r.max_dev_outside, 1e-12);
    EXPECT_LE(r.max_dev_reveal, 1e-12);
    EXPECT_LE(r.max_dev_correct, 1e-12);
  }
}

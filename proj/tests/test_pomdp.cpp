#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "revlab/errors.hpp"
#include "revlab/simulate.hpp"

using namespace revlab;

namespace {

// Two hidden doors, a noisy listen action and a guess at the last step.
TabularPOMDP doors(int H = 3) {
  TabularPOMDP p(H, {"left", "right"}, {"hear-left", "hear-right"}, {"listen", "open"});
  p.set_initial(0, 0.5);
  p.set_initial(1, 0.5);
  for (int h = 1; h <= H; ++h) {
    p.set_emission(h, 0, 0, 0.85);
    p.set_emission(h, 0, 1, 0.15);
    p.set_emission(h, 1, 0, 0.15);
    p.set_emission(h, 1, 1, 0.85);
    if (h < H)
      for (int a = 0; a < 2; ++a) {
        p.set_transition(h, 0, a, 0, 1.0);
        p.set_transition(h, 1, a, 1, 1.0);
      }
  }
  p.set_reward(H, 0, 1, 1.0);
  p.validate();
  return p;
}

}  // namespace

TEST(Pomdp, ValidateRejectsBadRows) {
  TabularPOMDP p(2, {"s"}, {"o"}, {"a"});
  p.set_initial(0, 1.0);
  p.set_emission(1, 0, 0, 1.0);
  p.set_emission(2, 0, 0, 0.5);
  p.set_transition(1, 0, 0, 0, 1.0);
  EXPECT_THROW(p.validate(), ConstructionError);
}

TEST(Pomdp, MaskedRowsThrowOnCheckedAccess) {
  TabularPOMDP p(2, {"s", "t"}, {"o"}, {"a"});
  p.set_masked(1, 1, true);
  EXPECT_THROW(p.emission(1, 1, 0), ConstructionError);
  EXPECT_THROW(p.emission(3, 0, 0), ShapeError);
}

TEST(Enumeration, DistributionSumsToOneAndMatchesFilter) {
  const auto p = doors();
  const UniformPolicy pi(2);
  const auto all = enumerate_distribution(p, pi);
  double total = 0;
  for (const auto& w : all) {
    total += w.prob;
    EXPECT_NEAR(w.log_model, observation_log_prob(p, w.traj.obs, w.traj.act), 1e-12);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Enumeration, CapCountsTrajectories) {
  const auto p = doors(6);
  const UniformPolicy pi(2);
  EXPECT_THROW(enumerate_distribution(p, pi, 100), EnumerationTooLarge);
}

TEST(Values, ForwardAndEnumerationAgree) {
  const auto p = doors(4);
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<int> seq(4);
    for (int h = 0; h < 4; ++h) seq[h] = (mask >> h) & 1;
    const ActionSequencePolicy pi(2, seq);
    EXPECT_NEAR(policy_value_forward(p, pi), policy_value_enumerate(p, pi), 1e-14);
  }
}

TEST(Values, BruteForceOptimumDominatesOpenLoopAndIsAttained) {
  const auto p = doors(3);
  const auto opt = optimal_value_bruteforce(p);
  // Guessing from two listens: P(both hear-left or majority) by hand.
  // With o_3 also observed before acting, the last observation is the guess.
  EXPECT_NEAR(opt.value, 0.5 * 0.85 + 0.5 * 0.15, 1e-12);
  EXPECT_NEAR(policy_value_enumerate(p, *opt.policy), opt.value, 1e-12);
}

TEST(Sampler, FrequenciesMatchExactProbabilities) {
  const auto p = doors(2);
  const UniformPolicy pi(2);
  std::map<std::vector<int>, double> exact;
  for (const auto& w : enumerate_distribution(p, pi)) {
    auto key = w.traj.obs;
    key.insert(key.end(), w.traj.act.begin(), w.traj.act.end());
    exact[key] += w.prob;
  }
  const Sampler s(p);
  Rng rng(7);
  std::map<std::vector<int>, double> freq;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto t = s.sample(pi, rng);
    auto key = t.obs;
    key.insert(key.end(), t.act.begin(), t.act.end());
    freq[key] += 1.0 / n;
  }
  for (const auto& [k, v] : exact) EXPECT_NEAR(freq[k], v, 5 * std::sqrt(v / n) + 1e-4);
}

TEST(Sampler, SampleIntoReproducesSample) {
  const auto p = doors(3);
  const UniformPolicy pi(2);
  const Sampler s(p);
  Rng a(3), b(3);
  Trajectory reuse;
  for (int i = 0; i < 50; ++i) {
    const auto t = s.sample(pi, a, true);
    s.sample_into(pi, b, reuse, true);
    EXPECT_EQ(t, reuse);
  }
}

TEST(LogProb, ZeroProbabilityGivesSentinel) {
  TabularPOMDP p(1, {"s"}, {"x", "y"}, {"a"});
  p.set_initial(0, 1.0);
  p.set_emission(1, 0, 0, 1.0);
  p.validate();
  EXPECT_EQ(observation_log_prob(p, {0}, {0}), 0.0);
  EXPECT_TRUE(std::isinf(observation_log_prob(p, {1}, {0})));
}

#include <gtest/gtest.h>

#include "revlab/errors.hpp"
#include "revlab/hard_instances.hpp"
#include "revlab/revealing.hpp"

using namespace revlab;

namespace {

HardInstanceSpec small(Family f, Rng& rng) {
  HardInstanceSpec s;
  s.family = f;
  s.eps = 0.1;
  s.sigma = 0.05 + 0.95 * uniform01(rng);
  s.n = 1 + static_cast<int>(rng() % 2);
  s.m = 1 + static_cast<int>(rng() % 2);
  s.K = 1 + static_cast<int>(rng() % 3);
  s.L = 1 + static_cast<int>(rng() % 2);
  s.H = s.n + s.m + 2;
  s.A = f == Family::MultiStepRegret ? 6 : 3;
  s.unchecked = true;
  return s;
}

}  // namespace

TEST(StarNorm, DualMatchesPrimalEnumeration) {
  Rng rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    const int rows = 1 + static_cast<int>(rng() % 3);
    const int bs = 1 + static_cast<int>(rng() % 3), blocks = 1 + static_cast<int>(rng() % 3);
    Eigen::MatrixXd inv(rows, bs * blocks);
    for (long i = 0; i < inv.size(); ++i) inv.data()[i] = 2 * uniform01(rng) - 1;
    const double dual = star_to_one_norm(inv, bs);
    EXPECT_NEAR(dual, star_to_one_norm_bruteforce(inv, bs), 1e-9 * (1 + dual));
    EXPECT_LE(star_to_one_norm_sampled(inv, bs, 500, trial), dual + 1e-9);
  }
}

TEST(EmissionAction, BlocksAreConditionalDistributions) {
  const auto p = random_revealing_pomdp(3, 4, 2, 4, 8);
  const auto M = emission_action_matrix(p, 2, 2);
  EXPECT_EQ(M.num_blocks(), 2);
  for (int b = 0; b < M.num_blocks(); ++b)
    for (int s = 0; s < 3; ++s)
      EXPECT_NEAR(M.mat.block(b * M.block_size(), s, M.block_size(), 1).sum(), 1.0, 1e-12);
}

TEST(Certificates, HardInstancesMeetTheirBounds) {
  Rng rng(2);
  for (auto f : {Family::SingleStepPac, Family::MultiStepRegret, Family::MultiStepPac}) {
    for (int draw = 0; draw < 50; ++draw) {
      auto tmpl = small(f, rng);
      FamilyEnumerator fam(tmpl, false, draw);
      const auto spec = fam.at(draw % 5 == 0 ? 0 : 1 + rng() % (fam.size() - 1));
      const auto inst = build_instance(spec);
      const auto set = certify(inst.pomdp, inst.meta.revealing_window);
      ASSERT_TRUE(set.valid) << family_name(f) << " draw " << draw;
      EXPECT_LE(set.inverse_alpha, inst.meta.revealing_bound + 1e-9);
      for (const auto& c : set.steps) EXPECT_LE(c.residual, kResidualTol);
    }
  }
}

TEST(Certificates, LiftNeverIncreasesTheNorm) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_revealing_pomdp(3, 3 + seed % 2, 2, 3, seed);
    const auto set = certify(p, 1);
    ASSERT_TRUE(set.valid);
    for (const auto& c : set.steps) {
      if (c.h > p.horizon() - 1) continue;
      const auto up = lift_inverse(c, p, 1);
      EXPECT_TRUE(up.valid);
      EXPECT_LE(up.norm, c.norm + 1e-9);
    }
  }
}

TEST(Certificates, WrongInverseIsRejected) {
  const auto p = random_revealing_pomdp(3, 4, 2, 3, 4);
  const auto good = construct_block_inverse(p, 2, 1);
  ASSERT_TRUE(good.valid);
  Eigen::MatrixXd bad = good.inverse;
  bad(0, 0) += 0.25;
  EXPECT_FALSE(verify_generalized_inverse(p, 2, 1, bad).valid);
}

TEST(Certificates, MultiStepRegretIsNotRevealingAtItsOwnWindow) {
  HardInstanceSpec s;
  s.family = Family::MultiStepRegret;
  s.n = 1;
  s.m = 2;
  s.K = 2;
  s.H = 6;
  s.A = 6;
  s.sigma = 0.5;
  s.unchecked = true;
  s.mu = {1, -1};
  s.theta = HiddenParams{1, 0, 2, 1, {3, 4, 5, 2}};
  const auto inst = build_instance(s);
  const auto M = emission_action_matrix(inst.pomdp, s.theta->h_star + 1, s.m);
  const int sp = inst.pomdp.state_index("lock:+"), sm = inst.pomdp.state_index("lock:-");
  EXPECT_TRUE((M.mat.col(sp).array() == M.mat.col(sm).array()).all());
  EXPECT_GT(M.mat.col(sp).sum(), 0.0);
}

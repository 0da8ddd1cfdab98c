#include <gtest/gtest.h>

#include <sstream>

#include "revlab/hard_instances.hpp"
#include "revlab/psr.hpp"
#include "revlab/revealing.hpp"

using namespace revlab;

namespace {

BRepresentation brep_of(const TabularPOMDP& p, int m, CertificateSet* out = nullptr) {
  const auto set = certify(p, m);
  EXPECT_TRUE(set.valid);
  if (out) *out = set;
  return build_brep(p, m, set.steps);
}

}  // namespace

TEST(CoreTests, WindowShrinksNearTheHorizon) {
  EXPECT_EQ(core_window(5, 2, 1), 2);
  EXPECT_EQ(core_window(5, 2, 5), 1);
  EXPECT_EQ(core_test_count(3, 2, 2), 3 * 3 * 2);
}

TEST(BRep, FactorizesRandomRevealingModels) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = random_revealing_pomdp(2, 3, 2, 3, seed);
    const auto b = brep_of(p, 1);
    const auto r = verify_factorization(b, p);
    EXPECT_LE(r.residual, 1e-10);
    EXPECT_GT(r.pairs, 0u);
  }
}

TEST(BRep, FactorizesHardInstancesAndStaysStable) {
  HardInstanceSpec s;
  s.family = Family::SingleStepPac;
  s.n = 1;
  s.K = 2;
  s.H = 4;
  s.A = 3;
  s.sigma = 0.125;
  s.unchecked = true;
  FamilyEnumerator fam(s, false, 1);
  for (std::uint64_t i : {std::uint64_t{0}, fam.size() - 1}) {
    const auto inst = build_instance(fam.at(i));
    CertificateSet set;
    const auto b = brep_of(inst.pomdp, 1, &set);
    EXPECT_LE(verify_factorization(b, inst.pomdp).residual, 1e-10);
    const auto probes = default_probes(b, inst.pomdp, 2, 5);
    const auto st = check_b_stability(b, set.inverse_alpha, probes);
    EXPECT_TRUE(st.passed());
    EXPECT_GE(st.worst_weak_margin, 0.0);
    const auto rank = predictive_rank(b, inst.pomdp);
    for (int r : rank) EXPECT_LE(r, inst.pomdp.num_states());
  }
}

TEST(BRep, StabilityFailsWithTooSmallLambda) {
  const auto p = random_revealing_pomdp(2, 3, 2, 3, 1);
  CertificateSet set;
  const auto b = brep_of(p, 1, &set);
  const auto probes = default_probes(b, p, 2, 3);
  EXPECT_FALSE(check_b_stability(b, 1e-3, probes).passed());
}

TEST(BRep, ReportHasVersionedHeader) {
  const auto p = random_revealing_pomdp(2, 2, 2, 2, 3);
  CertificateSet set;
  const auto b = brep_of(p, 1, &set);
  std::ostringstream out;
  write_stability_report(out, check_b_stability(b, set.inverse_alpha, default_probes(b, p, 1, 1)));
  EXPECT_EQ(out.str().rfind("format revlab-stability\nversion 1\n", 0), 0u);
}

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "revlab/errors.hpp"
#include "revlab/hard_instances.hpp"
#include "revlab/learners.hpp"

using namespace revlab;

namespace {

HardInstanceSpec tiny_pac() {
  HardInstanceSpec s;
  s.family = Family::MultiStepPac;
  s.n = 2;
  s.m = 2;
  s.K = 4;
  s.L = 2;
  s.H = 8;
  s.A = 3;
  s.sigma = 0.5;
  s.unchecked = true;
  return s;
}

HardInstanceSpec tiny_single() {
  HardInstanceSpec s;
  s.family = Family::SingleStepPac;
  s.n = 1;
  s.K = 2;
  s.H = 4;
  s.A = 3;
  s.sigma = 0.5;
  s.unchecked = true;
  return s;
}

}  // namespace

TEST(CollisionTester, ErrorRatesAtTheBatchMinimum) {
  CollisionTester t{20, 0.1, 1.0, 0};
  const long n = t.batch_min();
  EXPECT_EQ(n, static_cast<long>(std::ceil(std::sqrt(20.0) / 0.01)));
  Rng rng(5);
  int false_far = 0, false_uniform = 0;
  const int trials = 300;
  for (int i = 0; i < trials; ++i) {
    false_far += t.test(draw_uniform_samples(20, n, rng)).far;
    std::vector<int> mu(10);
    for (int& x : mu) x = rng() & 1 ? 1 : -1;
    false_uniform += !t.test(draw_perturbed_samples(20, 0.1, mu, n, rng)).far;
  }
  EXPECT_LE(false_far, trials / 3);
  EXPECT_LE(false_uniform, trials / 3);
}

TEST(CollisionTester, RejectsTooFewSamples) {
  CollisionTester t{20, 0.1, 1.0, 0};
  Rng rng(1);
  EXPECT_THROW(t.test(draw_uniform_samples(20, t.batch_min() - 1, rng)), BudgetError);
}

TEST(CollisionTester, PerturbedDrawSitsAtTheRequestedDistance) {
  Rng rng(2);
  const std::vector<int> mu{1, -1, 1};
  const long n = 600000;
  std::vector<double> freq(6, 0.0);
  for (int x : draw_perturbed_samples(6, 0.2, mu, n, rng)) freq[x] += 1.0 / n;
  double tv = 0;
  for (double f : freq) tv += 0.5 * std::abs(f - 1.0 / 6);
  EXPECT_NEAR(tv, 0.2, 0.01);
  EXPECT_GT(freq[0], freq[1]);
  EXPECT_LT(freq[2], freq[3]);
}

TEST(Environment, RefusesHiddenParameters) {
  auto s = tiny_pac();
  FamilyEnumerator fam(s, false, 3);
  const auto inst = build_instance(fam.at(1));
  EXPECT_THROW(Environment(inst.pomdp, inst.spec, 1), ParameterError);
  auto env = make_environment(inst, 1);
  EXPECT_FALSE(env->public_spec().theta.has_value());
  EXPECT_TRUE(env->public_spec().mu.empty());
}

TEST(Environment, LatentTracingDoesNotChangeDraws) {
  FamilyEnumerator fam(tiny_pac(), false, 3);
  const auto inst = build_instance(fam.at(7));
  auto a = make_environment(inst, 9, false);
  auto b = make_environment(inst, 9, true);
  auto pi = std::make_shared<UniformPolicy>(3);
  for (int i = 0; i < 50; ++i) {
    const auto ta = a->run(pi), tb = b->run(pi);
    ASSERT_EQ(ta.obs, tb.obs);
    ASSERT_EQ(ta.act, tb.act);
    EXPECT_TRUE(tb.latent.empty());
  }
}

TEST(BruteForce, RecoversTinyPacMembers) {
  FamilyEnumerator fam(tiny_pac(), false, 4);
  int exact = 0;
  const int trials = 6;
  for (int i = 0; i < trials; ++i) {
    const auto spec = fam.at(1 + (i * 7919ULL) % (fam.size() - 1));
    const auto inst = build_instance(spec);
    auto env = make_environment(inst, 100 + i);
    Referee ref(*env, inst.meta.optimal_value);
    const auto rep = bruteforce_learn(*env, {});
    ASSERT_EQ(rep.verdict, "found");
    exact += rep.recovered && *rep.recovered == *spec.theta;
    if (rep.recovered && *rep.recovered == *spec.theta)
      EXPECT_NEAR(ref.value_of(rep.output), inst.meta.optimal_value, 1e-12);
  }
  EXPECT_GE(exact, trials - 1);
}

TEST(BruteForce, DeclaresTheReferenceModelNull) {
  auto s = tiny_pac();
  s.mu = sample_mu(s.K * s.L, 3);
  const auto inst = build_instance(s);
  auto env = make_environment(inst, 7);
  const auto rep = bruteforce_learn(*env, {});
  EXPECT_EQ(rep.verdict, "null");
  EXPECT_FALSE(rep.recovered.has_value());
}

TEST(BruteForce, PlanMatchesTheFormula) {
  const auto s = tiny_pac();
  BruteForceOptions o;
  const auto plan = plan_bruteforce(s, o);
  const double log_term = std::log(plan.tests / o.delta);
  EXPECT_EQ(plan.n1, static_cast<long>(std::ceil(o.c * std::sqrt(s.K * s.L * 1.0) /
                                                 std::pow(s.sigma * s.eps, 2) * log_term)));
  EXPECT_EQ(plan.n_tail, static_cast<long>(std::ceil(8 / (s.eps * s.eps) * log_term)));
}

TEST(Omle, SingletonClassPlaysTheOptimum) {
  FamilyEnumerator fam(tiny_single(), false, 2);
  const auto spec = fam.at(3);
  const auto inst = build_instance(spec);
  const auto full = hard_family_class(tiny_single(), 2);
  std::vector<ModelEntry> one;
  for (const auto& e : full)
    if (e.model == inst.pomdp) one.push_back(e);
  ASSERT_EQ(one.size(), 1u);
  auto env = make_environment(inst, 4);
  Referee ref(*env, inst.meta.optimal_value);
  omle(one, *env, 200, {});
  for (double r : ref.regret_trace()) EXPECT_EQ(r, 0.0);
}

TEST(Omle, TrueModelSurvivesAndRegretIsSmall) {
  const auto cls = hard_family_class(tiny_single(), 2);
  FamilyEnumerator fam(tiny_single(), false, 2);
  const auto inst = build_instance(fam.at(5));
  std::size_t truth = cls.size();
  for (std::size_t i = 0; i < cls.size(); ++i)
    if (cls[i].model == inst.pomdp) truth = i;
  ASSERT_LT(truth, cls.size());
  auto env = make_environment(inst, 6);
  Referee ref(*env, inst.meta.optimal_value);
  bool survived = true;
  omle(cls, *env, 2000, {}, [&](long, const std::vector<char>& active) {
    survived = survived && active[truth];
  });
  EXPECT_TRUE(survived);
  double total = 0;
  for (double r : ref.regret_trace()) total += r;
  EXPECT_LT(total, 0.05 * 2000);
}

TEST(Omle, LikelihoodSentinel) {
  auto s = tiny_single();
  s.mu = {1, -1};
  const auto inst = build_instance(s);
  Trajectory t;
  t.obs.assign(inst.pomdp.horizon(), inst.pomdp.num_observations() - 1);
  t.act.assign(inst.pomdp.horizon(), 0);
  t.rew.assign(inst.pomdp.horizon(), 0.0);
  EXPECT_EQ(log_likelihood(inst.pomdp, t), -std::numeric_limits<double>::infinity());
}

TEST(ExploreThenExploit, RejectsBadSplit) {
  FamilyEnumerator fam(tiny_single(), false, 2);
  auto env = make_environment(build_instance(fam.at(1)), 1);
  EXPECT_THROW(explore_then_exploit(*env, 100, 0.0, {}), ParameterError);
  EXPECT_THROW(explore_then_exploit(*env, 100, 1.0, {}), ParameterError);
}

TEST(ExploreThenExploit, PlaysExactlyTEpisodes) {
  FamilyEnumerator fam(tiny_single(), false, 2);
  auto env = make_environment(build_instance(fam.at(1)), 1);
  explore_then_exploit(*env, 500, 0.2, {});
  EXPECT_EQ(env->episodes(), 500u);
}

TEST(Reports, LearnerReportAndRegretCsv) {
  LearnerReport r;
  r.algorithm = "bruteforce";
  r.episodes = 12;
  r.verdict = "found";
  r.recovered = HiddenParams{2, 1, 1, 0, {2, 0}};
  r.output_actions = {1, 1, 2, 0};
  std::ostringstream out;
  write_learner_report(out, r);
  const auto s = out.str();
  EXPECT_EQ(s.rfind("format revlab-learner-report\nversion 1\n", 0), 0u);
  EXPECT_NE(s.find("recovered h_star 2 leaf 1 entry 1 reveal 0 password 2 0\n"), std::string::npos);
  EXPECT_NE(s.find("output_actions 1 1 2 0\n"), std::string::npos);
  EXPECT_EQ(s.substr(s.size() - 4), "end\n");

  std::ostringstream csv;
  write_regret_csv(csv, {0.25, 0.0, 0.5});
  EXPECT_EQ(csv.str(), "episode,instantaneous,cumulative\n1,0.25,0.25\n2,0,0.25\n3,0.5,0.75\n");
}

#include <gtest/gtest.h>

#include <sstream>

#include "revlab/errors.hpp"
#include "revlab/hard_instances.hpp"
#include "revlab/revealing.hpp"
#include "revlab/serialize.hpp"

using namespace revlab;

TEST(Serialize, HardInstancesRoundTripBitExact) {
  for (auto fam : {Family::SingleStepPac, Family::MultiStepRegret, Family::MultiStepPac}) {
    HardInstanceSpec s;
    s.family = fam;
    s.n = 2;
    s.m = 2;
    s.K = 2;
    s.L = 2;
    s.H = 8;
    s.A = 6;
    s.sigma = 1.0 / 3.0;
    s.eps = 0.1;
    s.unchecked = true;
    FamilyEnumerator en(s, false, 4);
    const auto inst = build_instance(en.at(en.size() - 1));
    const auto text = pomdp_to_string(inst.pomdp);
    const auto back = pomdp_from_string(text);
    EXPECT_EQ(back, inst.pomdp);
    EXPECT_EQ(pomdp_to_string(back), text);
  }
}

TEST(Serialize, RandomModelsRoundTrip) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = random_revealing_pomdp(3, 4, 2, 3, seed);
    EXPECT_EQ(pomdp_from_string(pomdp_to_string(p)), p);
  }
}

TEST(Serialize, ShortestDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 0.0, 123456.789, 5e-324}) {
    EXPECT_EQ(parse_double(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Serialize, RejectsWrongVersion) {
  TabularPOMDP p(1, {"s"}, {"o"}, {"a"});
  p.set_initial(0, 1.0);
  p.set_emission(1, 0, 0, 1.0);
  auto text = pomdp_to_string(p);
  const auto pos = text.find("version 1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "version 9");
  EXPECT_ANY_THROW(pomdp_from_string(text));
}

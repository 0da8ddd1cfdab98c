#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "revlab/errors.hpp"
#include "revlab/experiments.hpp"

using namespace revlab;
namespace fs = std::filesystem;

namespace {

Json identities_config() {
  return Json::parse(R"({
    "experiment": "identities",
    "seed": 3,
    "random_pairs": 40,
    "instances": [
      {"family": "single-step-pac", "n": 1, "K": 2, "H": 4, "A": 3, "sigma": 0.5,
       "unchecked": true, "theta": {"h_star": 2, "leaf": 0, "entry": 1, "password": [2]},
       "mu": [1, -1]},
      {"family": "multi-step-regret", "n": 1, "m": 1, "K": 2, "H": 4, "A": 6, "sigma": 0.5,
       "unchecked": true,
       "theta": {"h_star": 1, "leaf": 0, "entry": 2, "reveal": 1, "password": [3, 4]},
       "mu": [1, -1]}
    ]
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("revlab-test-" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Config, RejectsUnknownKeysAndShortGrids) {
  EXPECT_THROW(parse_experiment_config(Json::parse(R"({"experiment": "identities", "bogus": 1})")),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(Json::parse(R"({"experiment": "nope"})")), ConfigError);
  EXPECT_THROW(parse_experiment_config(Json::parse(
                   R"({"experiment": "pac-scaling", "subject": "tester", "grid": []})")),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(Json::parse(
                   R"({"experiment": "pac-scaling", "subject": "tester", "grid": [1, 2, 2, 3]})")),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(Json::parse(R"({"experiment": "identities", "instances": []})")),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(Json::parse(R"({"experiment": "regret", "regret": {}})")),
               ConfigError);
}

TEST(Config, HashIgnoresJobsButNotSeed) {
  auto a = identities_config();
  auto b = a;
  b["jobs"] = 7;
  EXPECT_EQ(config_hash(parse_experiment_config(a)), config_hash(parse_experiment_config(b)));
  b["seed"] = 4;
  EXPECT_NE(config_hash(parse_experiment_config(a)), config_hash(parse_experiment_config(b)));
  EXPECT_EQ(config_hash(parse_experiment_config(a)).size(), 16u);
}

TEST(Config, SpecJsonRoundTrip) {
  const auto s = spec_from_json(identities_config()["instances"][1]);
  const auto back = spec_from_json(spec_to_json(s));
  EXPECT_EQ(back.theta, s.theta);
  EXPECT_EQ(back.mu, s.mu);
  EXPECT_EQ(back.H, s.H);
  EXPECT_EQ(back.family, s.family);
}

TEST(Slope, RecoversAPowerLaw) {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3 * std::pow(v, 0.5));
  EXPECT_NEAR(fit_loglog_slope(x, y), 0.5, 1e-12);
  std::vector<double> cum;
  for (int t = 1; t <= 1000; ++t) cum.push_back(2.0 * t);
  EXPECT_NEAR(fit_regret_exponent(cum, 10, 1000), 1.0, 1e-12);
}

TEST(Identities, PassOnTheTrueModelsAndFailWhenCorrupted) {
  const auto cfg = parse_experiment_config(identities_config());
  const auto res = run_experiment(cfg);
  std::ostringstream csv;
  res.tables.at("identities").write_csv(csv);
  EXPECT_TRUE(res.passed) << csv.str();

  auto bad = identities_config();
  bad["corrupt"] = true;
  const auto broken = run_experiment(parse_experiment_config(bad));
  EXPECT_FALSE(broken.passed);
}

TEST(CertifySweep, RandomModelsAndInstances) {
  auto j = identities_config();
  j["experiment"] = "certify-sweep";
  j.erase("random_pairs");
  j["random_models"] = {{"S", 3}, {"O", 4}, {"A", 2}, {"H", 3}, {"count", 5}};
  const auto res = run_experiment(parse_experiment_config(j));
  EXPECT_TRUE(res.passed);
  EXPECT_EQ(res.tables.at("certificates").rows.size(), 7u);
}

TEST(Persist, CsvsAreByteIdenticalAndTheManifestGrows) {
  const auto out = fresh_dir("persist");
  const auto cfg = parse_experiment_config(identities_config());
  const auto r1 = persist_run(out.string(), cfg, run_experiment(cfg), 0.5);
  const auto r2 = persist_run(out.string(), cfg, run_experiment(cfg), 0.7);
  EXPECT_NE(r1.run_dir, r2.run_dir);
  EXPECT_EQ(r1.hash, r2.hash);
  const auto a = slurp((out / r1.run_dir) / "identities.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp((out / r2.run_dir) / "identities.csv"));
  EXPECT_EQ(slurp((out / r1.run_dir) / "manifest.txt"),
            slurp((out / r2.run_dir) / "manifest.txt"));
  EXPECT_NE(slurp((out / r1.run_dir) / "timing.txt"), "");

  std::istringstream index(slurp(out / "manifest.txt"));
  std::string line;
  int lines = 0;
  while (std::getline(index, line)) {
    ++lines;
    EXPECT_EQ(line.rfind(r1.hash, 0), 0u) << line;
    EXPECT_NE(line.find(lines == 1 ? r1.run_dir : r2.run_dir), std::string::npos);
  }
  EXPECT_EQ(lines, 2);
  fs::remove_all(out);
}

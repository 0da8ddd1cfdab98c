#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "revlab/hard_instances.hpp"
#include "revlab/learners.hpp"

namespace revlab {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Small utilities shared by the experiments and the CLI.

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  void write_csv(std::ostream& out) const;
};

// Least-squares slope of log y against log x.
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Runs fn(0..n-1) on up to `jobs` threads. fn must only write to its own slot.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

HardInstanceSpec spec_from_json(const Json& j);
Json spec_to_json(const HardInstanceSpec& spec);

// ---------------------------------------------------------------------------
// Budget calibration.

struct CalibrationOptions {
  int trials = 50;
  int iterations = 8;  // bisection steps on log budget inside [N/8, 8N]
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct CalibrationPoint {
  double x = 0;        // grid value (K or sigma)
  long analytic = 0;   // budget the bracket is centred on
  long budget = 0;     // smallest budget found that meets the target
  double rate = 0;     // success rate (or worst error rate) at `budget`
  bool converged = false;  // false when the upper bracket end fails too
};

struct TesterErrors {
  double false_far = 0;      // uniform input declared far
  double false_uniform = 0;  // perturbed input declared uniform
};

// Single-batch error rates over `trials` seeded draws; trial i uses the same
// stream for every n, so the rates are comparable across budgets.
TesterErrors tester_error_rates(int domain, double tv, long n, int trials, std::uint64_t seed,
                                int jobs = 1);

// Smallest single-batch sample count with both error rates <= 1/3. The
// bracket is centred on sqrt(domain) / tv^2.
CalibrationPoint calibrate_tester(int domain, double tv, const CalibrationOptions& opt);

// Success of the brute-force learner: exact recovery of theta for members,
// a "null" verdict for the reference model. Trial i runs trial_specs[i]
// with environment seed seed + i.
double bruteforce_success_rate(const std::vector<HardInstanceSpec>& trial_specs,
                               const BruteForceOptions& opt, std::uint64_t seed, int jobs = 1);

// One spec per trial: the template's theta (or a random member when it has
// none and `random_theta` is set) with a fresh sign vector per trial.
std::vector<HardInstanceSpec> trial_members(const HardInstanceSpec& tmpl, int trials,
                                            std::uint64_t seed, bool random_theta);

// Smallest stage-1 cell budget with success >= 3/4, using a single tester
// batch. The bracket is centred on the analytic N_1.
CalibrationPoint calibrate_bruteforce(const HardInstanceSpec& tmpl, const BruteForceOptions& base,
                                      const CalibrationOptions& opt);

// ---------------------------------------------------------------------------
// Regret comparison.

struct RegretRunOptions {
  long T = 10000;
  double split = 0.1;
  OmleOptions omle;
  BruteForceOptions bruteforce;
  std::uint64_t mu_seed = 0;
};

struct RegretRun {
  std::vector<double> regret;  // per episode
  bool survived = true;        // omle only: true model never left the set
  std::size_t reveal_episodes = 0;
  std::size_t reveal_rewarded = 0;
};

// `member` carries theta; the OMLE class is the family with member.mu fixed.
RegretRun run_regret(const std::string& algorithm, const HardInstanceSpec& member,
                     const std::vector<ModelEntry>* model_class, const RegretRunOptions& opt,
                     std::uint64_t seed);

// Slope of log cumulative regret against log T at `points` log-spaced
// episodes in [lo, hi].
double fit_regret_exponent(const std::vector<double>& cumulative, long lo, long hi, int points = 9);

// Exhaustive over every trajectory of the uniform policy on a multi-step
// regret instance: episodes that play a reveal action in the lock.
struct SeparationReport {
  std::size_t trajectories = 0;
  std::size_t reveal_trajectories = 0;
  std::size_t reveal_rewarded = 0;  // positive terminal reward
  double zero_reward_fraction() const {
    return reveal_trajectories == 0
               ? 1.0
               : 1.0 - static_cast<double>(reveal_rewarded) / reveal_trajectories;
  }
};

SeparationReport structural_separation(const HardInstanceSpec& spec,
                                       std::size_t cap = kDefaultEnumerationCap);

// ---------------------------------------------------------------------------
// Experiment driver.

struct ExperimentConfig {
  std::string kind;  // pac-scaling | sigma-scaling | regret | certify-sweep | identities
  Json raw;          // after CLI overrides; hashed and echoed
  std::uint64_t seed = 1;
  int jobs = 1;
  std::size_t cap = kDefaultEnumerationCap;
};

// Validates the schema documented in README.md. Throws ConfigError.
ExperimentConfig parse_experiment_config(const Json& j);

// Hash of the canonical config dump; `jobs` is excluded since it never
// changes results.
std::string config_hash(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::map<std::string, Table> tables;  // file stem -> table
  std::map<std::string, double> summary;
  bool passed = true;
};

ExperimentResult run_pac_scaling(const ExperimentConfig& cfg);
ExperimentResult run_sigma_scaling(const ExperimentConfig& cfg);
ExperimentResult run_regret_compare(const ExperimentConfig& cfg);
ExperimentResult run_certify_sweep(const ExperimentConfig& cfg);
ExperimentResult run_identity_suite(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct RunRecord {
  std::string hash;
  std::string kind;
  std::uint64_t seed = 0;
  std::string run_dir;
  bool passed = false;
  double wall_seconds = 0;
};

// Writes <out>/runs/<kind>-<hash>-<n>/ with one CSV per table, a run
// manifest (config echo, code version, summary) and a timing sidecar, then
// appends one line to <out>/manifest.txt. Never touches earlier runs.
RunRecord persist_run(const std::string& out_dir, const ExperimentConfig& cfg,
                      const ExperimentResult& result, double wall_seconds);

std::string code_version();

}  // namespace revlab

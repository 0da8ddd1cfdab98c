#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "revlab/hard_instances.hpp"
#include "revlab/policy.hpp"
#include "revlab/pomdp.hpp"
#include "revlab/simulate.hpp"

namespace revlab {

// ---------------------------------------------------------------------------
// Environment boundary. Learners only see run(), episodes() and the public
// hyperparameters; the model, hidden parameter and latent traces stay behind
// the wall and are reachable only through Referee.

class Environment {
 public:
  // `public_spec` must not carry theta; mu is cleared before storing.
  Environment(TabularPOMDP model, HardInstanceSpec public_spec, std::uint64_t seed,
              bool trace_latent = false);

  // One episode. The returned trajectory never includes latent states.
  Trajectory run(const PolicyPtr& pi);
  // Reuses `out`'s storage; same contract as run().
  void run_into(const PolicyPtr& pi, Trajectory& out);

  std::size_t episodes() const { return episodes_; }
  const HardInstanceSpec& public_spec() const { return public_; }
  int horizon() const { return sampler_.model().horizon(); }
  int num_actions() const { return sampler_.model().num_actions(); }
  int num_observations() const { return sampler_.model().num_observations(); }

 private:
  friend class Referee;

  Sampler sampler_;
  HardInstanceSpec public_;
  Rng rng_;
  bool trace_latent_;
  std::size_t episodes_ = 0;
  // Run-length log of the policies played.
  std::vector<std::pair<PolicyPtr, std::size_t>> log_;
  std::vector<std::pair<std::string, std::function<bool(const Trajectory&)>>> events_;
  std::vector<std::size_t> event_counts_;
};

// Builds an environment for a hard-instance member with the hidden parts
// stripped from the public spec.
std::unique_ptr<Environment> make_environment(const HardInstance& inst, std::uint64_t seed,
                                              bool trace_latent = false);

// Scores a run from outside the boundary.
class Referee {
 public:
  Referee(Environment& env, double optimal_value);

  // Counts trajectories satisfying `pred` from now on.
  void declare_event(const std::string& name, std::function<bool(const Trajectory&)> pred);
  std::map<std::string, std::size_t> event_counts() const;

  // V* - V(pi_t) for every episode so far; values cached per policy.
  std::vector<double> regret_trace();
  double value_of(const PolicyPtr& pi);
  const TabularPOMDP& model() const { return env_.sampler_.model(); }

 private:
  Environment& env_;
  double vstar_;
  std::unordered_map<const Policy*, double> cache_;
};

// ---------------------------------------------------------------------------

struct LearnerReport {
  std::string algorithm;
  std::size_t episodes = 0;
  std::string verdict;  // null | found | incomplete | exploit | explore
  std::optional<HiddenParams> recovered;
  PolicyPtr output;
  std::vector<int> output_actions;  // when the output is open loop
  std::vector<double> regret;       // filled by the referee
  std::map<std::string, std::size_t> events;
  std::map<std::string, double> stats;
};

void write_learner_report(std::ostream& out, const LearnerReport& r);
// Columns: episode, instantaneous, cumulative.
void write_regret_csv(std::ostream& out, const std::vector<double>& regret);

// ---------------------------------------------------------------------------
// Collision-based uniformity testing.

struct UniformityVerdict {
  bool far = false;
  double statistic = 0;  // collision rate times domain size (1 under uniform)
  double threshold = 0;  // same scale: 1 + 2 tv^2
  int batches = 1;
};

struct CollisionTester {
  int domain = 2;
  double far_tv = 0.1;
  double c_test = 1.0;
  int max_batches = 0;  // 0 = choose adaptively, 1 = single batch

  long batch_min() const;
  // Throws BudgetError below batch_min samples. Picks the batch count that
  // minimizes a Chebyshev-plus-binomial bound on the median error.
  UniformityVerdict test(const std::vector<int>& samples) const;
};

// Seeded draws from the uniform or the signed perturbation (1 +- 2 tv mu_i)
// over pairs (2i, 2i+1); the latter sits at total variation tv from uniform.
std::vector<int> draw_uniform_samples(int domain, long n, Rng& rng);
std::vector<int> draw_perturbed_samples(int domain, double tv, const std::vector<int>& mu, long n,
                                        Rng& rng);

// ---------------------------------------------------------------------------
// Brute-force learner for the multi-step families.

struct BruteForceOptions {
  double c = 8.0;       // budget constant in N_1
  double c_test = 1.0;  // tester constant (batch minimum)
  double delta = 0.25;
  long cell_budget = 0;   // > 0 overrides N_1
  long tail_budget = 0;   // > 0 overrides the reward-tail budget
  int max_batches = 0;    // passed to the tester
  long max_episodes = 0;  // > 0 stops exploring once reached (explore-then-exploit)
};

struct BruteForcePlan {
  long n1 = 0;      // per-cell budget for uniformity cells
  long n_tail = 0;  // per-cell budget for reward-tail cells
  long tests = 0;   // union bound denominator
  long stage1_cells = 0;
};

BruteForcePlan plan_bruteforce(const HardInstanceSpec& public_spec, const BruteForceOptions& opt);

LearnerReport bruteforce_learn(Environment& env, const BruteForceOptions& opt);

// ---------------------------------------------------------------------------
// OMLE over a finite model class.

struct ModelEntry {
  std::string label;
  TabularPOMDP model;
  double optimal_value = 0;
  PolicyPtr optimal_policy;
};

std::vector<ModelEntry> hard_family_class(const HardInstanceSpec& tmpl, std::uint64_t mu_seed = 0);

// Sum over steps of log P(o_h | tau_{h-1}); -inf when some observation has
// zero probability.
double log_likelihood(const TabularPOMDP& model, const Trajectory& t);

struct OmleOptions {
  double C = 4.0;
  double delta = 0.1;
  double beta = 0;  // > 0 overrides C log(|class| / delta)
};

double omle_beta(std::size_t class_size, const OmleOptions& opt);

// `audit`, when set, sees the active mask after each update.
LearnerReport omle(const std::vector<ModelEntry>& model_class, Environment& env, long T,
                   const OmleOptions& opt,
                   const std::function<void(long, const std::vector<char>&)>& audit = {});

// ---------------------------------------------------------------------------

LearnerReport explore_then_exploit(Environment& env, long T, double split,
                                   BruteForceOptions opt);
// Cycles the stage-1 exploration policies for all T episodes.
LearnerReport always_explore(Environment& env, long T);
LearnerReport uniform_random(Environment& env, long T);

}  // namespace revlab

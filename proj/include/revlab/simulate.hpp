#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "revlab/policy.hpp"
#include "revlab/pomdp.hpp"

namespace revlab {

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

// Draws trajectories with precomputed sparse CDFs. Rows with a single
// outcome consume no randomness. Touching a masked row throws.
class Sampler {
 public:
  explicit Sampler(TabularPOMDP model);

  Trajectory sample(const Policy& pi, Rng& rng, bool trace_latent = false) const;
  // Same draw as sample(), reusing the storage of `out`.
  void sample_into(const Policy& pi, Rng& rng, Trajectory& out, bool trace_latent = false) const;
  const TabularPOMDP& model() const { return model_; }

 private:
  struct Row {
    std::vector<int> outcome;
    std::vector<double> cdf;
    bool masked = false;
  };
  int draw(const Row& row, Rng& rng, const char* what) const;

  TabularPOMDP model_;
  Row initial_;
  std::vector<Row> emission_;    // (h-1)*S + s
  std::vector<Row> transition_;  // ((h-1)*S + s)*A + a
};

Trajectory sample_trajectory(const TabularPOMDP& m, const Policy& pi, std::uint64_t seed);

struct WeightedTrajectory {
  Trajectory traj;
  double log_model = 0;   // log P(o_1..o_H | do(a_1..a_H))
  double log_policy = 0;  // log prod_h pi(a_h | history)
  double prob = 0;        // exp(log_model + log_policy)
};

// All trajectories with nonzero probability under (m, pi). The cap bounds
// the number of such trajectories, not (O*A)^H.
std::vector<WeightedTrajectory> enumerate_distribution(const TabularPOMDP& m, const Policy& pi,
                                                       std::size_t cap = kDefaultEnumerationCap);

// log P(o_1..o_H | do(a_1..a_H)) by a normalized forward filter; -inf when
// some observation has zero probability.
double observation_log_prob(const TabularPOMDP& m, const std::vector<int>& obs,
                            const std::vector<int>& act);

// Exact value for open-loop and observation-reactive policies by a latent
// forward pass. Throws UnsupportedError for other policies.
double policy_value_forward(const TabularPOMDP& m, const Policy& pi);
double policy_value_enumerate(const TabularPOMDP& m, const Policy& pi,
                              std::size_t cap = kDefaultEnumerationCap);
// Forward pass when available, enumeration otherwise.
double policy_value(const TabularPOMDP& m, const Policy& pi,
                    std::size_t cap = kDefaultEnumerationCap);

struct OptimalSolution {
  double value = 0;
  std::shared_ptr<HistoryPolicy> policy;
  std::size_t nodes = 0;
};

// Backward recursion over reachable histories with deterministic history
// policies. Ties go to the lowest action index.
OptimalSolution optimal_value_bruteforce(const TabularPOMDP& m,
                                         std::size_t node_cap = 20'000'000);

}  // namespace revlab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "revlab/errors.hpp"

namespace revlab {

// Finite-horizon tabular POMDP. Steps are 1-based throughout the public API:
// emissions and rewards exist for h = 1..H, transitions for h = 1..H-1.
//
// Rows that the model leaves unspecified (states unreachable at step h) are
// masked. Checked accessors throw ConstructionError on a masked row; the raw
// accessors are for builders and serialization only.
class TabularPOMDP {
 public:
  TabularPOMDP() = default;
  TabularPOMDP(int horizon, std::vector<std::string> states,
               std::vector<std::string> observations,
               std::vector<std::string> actions);

  int horizon() const { return H_; }
  int num_states() const { return S_; }
  int num_observations() const { return O_; }
  int num_actions() const { return A_; }

  const std::vector<std::string>& state_labels() const { return states_; }
  const std::vector<std::string>& observation_labels() const { return observations_; }
  const std::vector<std::string>& action_labels() const { return actions_; }
  int state_index(const std::string& label) const;
  int observation_index(const std::string& label) const;

  void set_initial(int s, double p);
  void set_emission(int h, int s, int o, double p);
  void set_transition(int h, int s, int a, int next, double p);
  void set_reward(int h, int o, int a, double r);
  void set_masked(int h, int s, bool masked);

  double initial(int s) const { return init_[s]; }
  bool masked(int h, int s) const { return mask_[(h - 1) * S_ + s] != 0; }

  double emission(int h, int s, int o) const;
  double transition(int h, int s, int a, int next) const;
  double reward(int h, int o, int a) const { return reward_[((h - 1) * O_ + o) * A_ + a]; }

  double emission_raw(int h, int s, int o) const { return emission_[((h - 1) * S_ + s) * O_ + o]; }
  double transition_raw(int h, int s, int a, int next) const {
    return transition_[(((h - 1) * S_ + s) * A_ + a) * S_ + next];
  }

  // Row sums, signs, rewards in [0,1], and mask closure (unmasked states
  // never transit into masked ones). Throws ConstructionError.
  void validate() const;

  // Upper bound on the total reward of any trajectory: sum over h of the
  // largest reward at step h. Exact maximum over (O x A)^H.
  double max_total_reward() const;

  bool operator==(const TabularPOMDP& other) const = default;

 private:
  void check_step(int h, int last) const;

  int H_ = 0, S_ = 0, O_ = 0, A_ = 0;
  std::vector<std::string> states_, observations_, actions_;
  std::vector<double> init_;
  std::vector<double> emission_;    // H x S x O
  std::vector<double> transition_;  // (H-1) x S x A x S
  std::vector<double> reward_;      // H x O x A
  std::vector<std::uint8_t> mask_;  // H x S, 1 = dynamics undefined
};

struct Trajectory {
  std::vector<int> obs;
  std::vector<int> act;
  std::vector<double> rew;
  std::vector<int> latent;  // debugging only, empty unless traced

  double total_reward() const;
  bool operator==(const Trajectory&) const = default;
};

}  // namespace revlab

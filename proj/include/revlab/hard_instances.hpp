#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "revlab/policy.hpp"
#include "revlab/pomdp.hpp"

namespace revlab {

enum class Family { SingleStepPac, MultiStepRegret, MultiStepPac };

std::string family_name(Family f);
Family parse_family(const std::string& name);

// Hidden parameter of a non-null member. Leaves are numbered 0..2^(n-1)-1
// left to right. password[i] is the action expected at step h_star+1+i.
struct HiddenParams {
  int h_star = 0;
  int leaf = 0;
  int entry_action = 1;
  int reveal_action = 0;  // multi-step regret only; ignored elsewhere
  std::vector<int> password;

  bool operator==(const HiddenParams&) const = default;
};

struct HardInstanceSpec {
  Family family = Family::SingleStepPac;
  double eps = 0.1;
  double sigma = 0.05;
  int n = 1;  // tree depth
  int m = 1;  // window (multi-step families)
  int K = 1;
  int L = 1;  // lock count (multi-step pac)
  int H = 4;
  int A = 3;
  std::optional<HiddenParams> theta;  // empty = reference model
  std::vector<int> mu;                // K entries, or L*K row-major by lock
  bool unchecked = false;             // skip the largeness constraints

  bool is_null() const { return !theta.has_value(); }
};

struct InstanceMetadata {
  double optimal_value = 0;
  double reference_value = 0;  // value of staying at the root
  std::vector<int> optimal_actions;
  int num_states = 0;
  int num_observations = 0;
  int revealing_window = 1;
  double revealing_bound = 1;  // 1 + 2/sigma, or 1 for the reference model
  double log_cardinality_bound = 0;
};

struct HardInstance {
  HardInstanceSpec spec;
  TabularPOMDP pomdp;
  InstanceMetadata meta;
};

// Throws ParameterError naming the violated constraint.
void validate_spec(const HardInstanceSpec& spec);

HardInstance build_single_step(const HardInstanceSpec& spec);
HardInstance build_multistep_regret(const HardInstanceSpec& spec);
HardInstance build_multistep_pac(const HardInstanceSpec& spec);
HardInstance build_instance(const HardInstanceSpec& spec);

int num_leaves(int n);
int leaf_state(int n, int leaf);  // heap index of a leaf
std::string tree_label(int heap_index);
// Moves from the root to a leaf: n-1 entries of 1 (left) or 2 (right).
std::vector<int> route_to_leaf(int n, int leaf);

// Steps n + l*m < H at which reveal actions act.
std::vector<int> reveal_steps(const HardInstanceSpec& spec);
bool is_reveal_step(const HardInstanceSpec& spec, int h);
std::vector<int> valid_h_star(const HardInstanceSpec& spec);
// Actions that act as reveal at reveal steps: {0..A1-1} with A1 = 1 + A/6
// for the regret family, {0} for the pac family, empty otherwise.
std::vector<int> reveal_actions(const HardInstanceSpec& spec);
// Choices for password[h] given the family's constraints.
std::vector<int> password_choices(const HardInstanceSpec& spec, int h);

double closed_form_optimal_value(const HardInstanceSpec& spec);
std::vector<int> optimal_action_sequence(const HardInstanceSpec& spec);
PolicyPtr optimal_policy(const HardInstanceSpec& spec);

// Counts hidden parameters theta (without mu) by nested loops.
std::uint64_t count_theta(const HardInstanceSpec& tmpl);
double log_cardinality_bound(const HardInstanceSpec& spec);

// Enumerates the reference model (index 0) followed by every theta. mu is
// either enumerated over all sign vectors (innermost) or held fixed at the
// template's value, which is drawn from mu_seed when the template has none.
class FamilyEnumerator {
 public:
  FamilyEnumerator(HardInstanceSpec tmpl, bool enumerate_mu, std::uint64_t mu_seed = 0,
                   std::uint64_t cap = 1'000'000);

  std::uint64_t size() const { return size_; }
  std::uint64_t theta_count() const { return theta_count_; }
  HardInstanceSpec at(std::uint64_t index) const;
  // log of the number of distinct members counted with all mu.
  double log_cardinality() const;

 private:
  HiddenParams theta_at(std::uint64_t index) const;

  HardInstanceSpec tmpl_;
  bool enumerate_mu_;
  std::uint64_t mu_seed_;
  std::uint64_t theta_count_ = 0, mu_count_ = 1, size_ = 0;
  int mu_len_ = 0;
};

std::vector<int> sample_mu(int length, std::uint64_t seed);

// Single-step family: P(o_H is the root observation) under pi.
// Multi-step regret family: event that some reveal step sees lock and plays
// a reveal action.
bool stays_at_root(const HardInstanceSpec& spec, const Trajectory& t);
bool takes_reveal(const HardInstanceSpec& spec, const Trajectory& t);

}  // namespace revlab

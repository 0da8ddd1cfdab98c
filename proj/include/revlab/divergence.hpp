#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "revlab/hard_instances.hpp"
#include "revlab/policy.hpp"
#include "revlab/pomdp.hpp"

namespace revlab {

// Probabilities over a common finite support (counting measure).
struct FiniteDistribution {
  std::vector<double> prob;

  // Nonnegative, sums to 1 within 1e-10. Throws ParameterError.
  void validate() const;
};

inline constexpr double kInfiniteDivergence = std::numeric_limits<double>::infinity();

struct Divergences {
  double tv = 0;            // half l1
  double hellinger_sq = 0;  // sum (sqrt p - sqrt q)^2, no factor 1/2
  double kl = 0;            // infinite when P is not dominated by Q
  double chi_sq = 0;        // sum p^2/q - 1, same sentinel
};

Divergences divergences(const FiniteDistribution& p, const FiniteDistribution& q);

struct InequalityCheck {
  bool tv_kl = false;         // 2 tv^2 <= kl
  bool kl_chi = false;        // kl <= log(1 + chi_sq)
  bool hellinger_tv = false;  // hellinger_sq / 2 <= tv
  bool tv_hellinger = false;  // tv <= sqrt(hellinger_sq)
  bool all() const { return tv_kl && kl_chi && hellinger_tv && tv_hellinger; }
};

InequalityCheck check_divergence_inequalities(const Divergences& d, double slack = 1e-12);

// Draws a pair of random distributions on `size` points. Some draws put
// exact zeros in P to exercise the support edge cases.
std::pair<FiniteDistribution, FiniteDistribution> random_distribution_pair(int size, Rng& rng);

// Joint distributions as row-major |X| x |Y| tables.
struct HellingerConditioning {
  double lhs = 0;  // E_{X~P} H^2(P_{Y|X}, Q_{Y|X})
  double rhs = 0;  // 2 H^2(P_XY, Q_XY)
  bool ok = false;
};

// Q_{Y|X=x} is taken uniform when Q_X(x) = 0.
HellingerConditioning hellinger_conditioning_check(const std::vector<double>& joint_p,
                                                   const std::vector<double>& joint_q, int nx,
                                                   int ny, double slack = 1e-10);

// Chooses the policy for episode t (0-based) given the earlier trajectories.
using PolicySchedule = std::function<PolicyPtr(int t, const std::vector<Trajectory>& previous)>;

PolicySchedule fixed_schedule(std::vector<PolicyPtr> per_episode);
// Episode 0 plays `first`; later episodes play `if_seen` when the first
// episode's observation at step `step` equals `obs`, `otherwise` else.
PolicySchedule two_branch_schedule(PolicyPtr first, int step, int obs, PolicyPtr if_seen,
                                   PolicyPtr otherwise);

inline constexpr std::size_t kProductSpaceCap = 1'000'000;

struct IngsterResult {
  double lhs = 0;  // 1 + chi^2(mixture || reference) over T-tuples
  double rhs = 0;  // E_{M,M'} E_0 [prod_t P_M P_M' / P_0^2]
  double gap = 0;
  std::size_t tuples = 0;
};

IngsterResult ingster_check(const std::vector<TabularPOMDP>& members,
                            const std::vector<double>& prior, const TabularPOMDP& reference,
                            const PolicySchedule& schedule, int T,
                            std::size_t cap = kProductSpaceCap);

struct VisitCounts {
  int reveal = 0;   // sum over episodes of reveal-event hits
  int correct = 0;  // episodes that play the full password after entry
};

// Event counts for one trajectory of a single-step or multi-step regret
// instance with hidden parameter spec.theta. The single-step count runs
// over l = h_star..H-2.
VisitCounts visit_counts(const HardInstanceSpec& spec, const Trajectory& t);

struct Chi2InnerProduct {
  double lhs = 0;
  double bound = 0;
  bool ok = false;
  std::size_t tuples = 0;
};

// spec carries theta and mu; mu_prime is the second sign vector. Throws
// PreconditionError when some P_0-reachable tuple exceeds the budgets.
Chi2InnerProduct chi2_inner_product_check(const HardInstanceSpec& spec,
                                          const std::vector<int>& mu_prime,
                                          const PolicySchedule& schedule, int T, int budget_reveal,
                                          int budget_correct, std::size_t cap = kProductSpaceCap);

struct ConditionalRatioReport {
  std::size_t histories = 0;
  std::size_t in_reveal = 0, in_correct = 0;
  double max_dev_outside = 0;  // |I - 1| outside both events
  double max_dev_reveal = 0;   // |I - (1 + eps^2 sigma^2 <mu,mu'>/K)|
  double max_dev_correct = 0;  // |I - (1 + 4 eps^2 / 3)|
};

// Exhaustive over every action sequence and P_0-reachable observation
// prefix of the multi-step regret instance.
ConditionalRatioReport conditional_ratio_check(const HardInstanceSpec& spec,
                                               const std::vector<int>& mu_prime,
                                               std::size_t cap = 5'000'000);

}  // namespace revlab

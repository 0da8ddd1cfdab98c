#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "revlab/pomdp.hpp"
#include "revlab/revealing.hpp"

namespace revlab {

// Core tests at step h: (O x A)^(w-1) x O with w = min(m, H-h+1), indexed
// like emission-action rows (a_idx * O^w + o_idx). Step H+1 holds the
// single dummy test.
int core_window(int horizon, int m, int h);
long core_test_count(int num_obs, int num_actions, int window);

struct BRepresentation {
  int H = 0, m = 0, O = 0, A = 0, S = 0;
  std::vector<int> window;                 // index h = 1..H+1
  std::vector<std::vector<Eigen::MatrixXd>> B;  // B[h-1][o*A + a], |U_{h+1}| x |U_h|
  Eigen::VectorXd q0;
  double magnitude = 0;  // 1 + max column l1 norm over all B_h(o,a)

  const Eigen::MatrixXd& at(int h, int o, int a) const { return B[h - 1][o * A + a]; }
  Eigen::MatrixXd& at(int h, int o, int a) { return B[h - 1][o * A + a]; }
  long tests(int h) const { return core_test_count(O, A, window[h]); }
};

// certs[h-1] must be a valid window-m certificate for every h <= H-m.
BRepresentation build_brep(const TabularPOMDP& pomdp, int m,
                           const std::vector<InverseCertificate>& certs);

// P(t_1..t_w | s_h = . , do(test actions)) weighted by a latent vector,
// computed by a direct forward pass (independent of the emission-action
// matrix code).
double test_probability(const TabularPOMDP& pomdp, int h, const std::vector<double>& latent,
                        const std::vector<int>& obs, const std::vector<int>& acts);

struct FactorizationReport {
  double residual = 0;
  std::size_t histories = 0;
  std::size_t pairs = 0;
};

// Max over (history, core test) of |P(history, test) - e_t' B_{h:1} q0|.
FactorizationReport verify_factorization(const BRepresentation& brep, const TabularPOMDP& pomdp,
                                         std::size_t cap = 5'000'000);

struct ProbeResult {
  int h = 0;
  std::string kind;        // unit | predictive | random
  double lhs = 0;          // max over policies of sum_tau pi(tau) |B_{H:h}(tau) x|
  double star = 0;         // l2 over action blocks of l1 over observations
  double pi_prime = 0;     // max over test policies of sum pi(t)|x(t)|
  double weak_bound = 0;   // Lambda * max(star, pi_prime)
  double strong_gap = 0;   // max over policies of [lhs_pi - Lambda * sum pi(t)|x(t)|]
  bool weak_ok = false;
  bool strong_ok = false;
};

struct StabilityReport {
  double lambda = 0;
  std::vector<ProbeResult> probes;
  std::size_t failures_weak = 0;
  std::size_t failures_strong = 0;
  double worst_weak_margin = 0;    // min over probes of weak_bound - lhs
  double worst_strong_margin = 0;  // min over probes of -strong_gap
  bool passed() const { return failures_weak == 0; }
};

struct ProbeSet {
  std::vector<int> h;
  std::vector<std::string> kind;
  std::vector<Eigen::VectorXd> x;
};

// Unit coordinates, predictive states of all reachable histories, and
// `random_per_step` seeded Gaussian vectors at every step.
ProbeSet default_probes(const BRepresentation& brep, const TabularPOMDP& pomdp,
                        int random_per_step, std::uint64_t seed,
                        std::size_t max_predictive_per_step = 2000);

StabilityReport check_b_stability(const BRepresentation& brep, double lambda,
                                  const ProbeSet& probes, std::size_t node_cap = 50'000'000);

// Rank of the stacked predictive states at each step (threshold 1e-8 of
// the top singular value).
std::vector<int> predictive_rank(const BRepresentation& brep, const TabularPOMDP& pomdp);

void write_stability_report(std::ostream& out, const StabilityReport& r);

}  // namespace revlab

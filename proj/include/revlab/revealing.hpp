#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "revlab/pomdp.hpp"
#include "revlab/simulate.hpp"

namespace revlab {

// M_{h,m}: rows are (action sequence of length m-1, observation sequence of
// length m), laid out action-block-major, both sequences lexicographic with
// the earliest element most significant:
//   row = a_idx * O^m + o_idx.
// Columns are states; columns of states masked at step h are zero.
struct EmissionActionMatrix {
  int h = 0, m = 0;
  int num_obs = 0, num_actions = 0;
  Eigen::MatrixXd mat;
  std::vector<char> column_masked;

  int block_size() const { return static_cast<int>(mat.rows()) / num_blocks(); }
  int num_blocks() const;
};

EmissionActionMatrix emission_action_matrix(const TabularPOMDP& pomdp, int h, int m,
                                            std::size_t cap = kDefaultEnumerationCap);

// sqrt(sum over blocks of (l1 norm of the block)^2).
double star_norm(const Eigen::VectorXd& x, int block_size);

inline constexpr int kSignEnumerationRows = 20;

// Operator norm of M+ from the star norm to l1: max over row signs s of the
// dual star norm of (M+)^T s (l2 over blocks of l-infinity). Zero rows are
// dropped first. A single nonzero block reduces to the largest column
// l1 norm. Throws BudgetError above kSignEnumerationRows nonzero rows.
double star_to_one_norm(const Eigen::MatrixXd& inverse, int block_size);

// Independent primal computation: enumerates per-block signed coordinates
// (the extreme directions of the star ball) and row signs, solving the
// inner maximization over block weights in closed form. Exponential; for
// small cases only.
double star_to_one_norm_bruteforce(const Eigen::MatrixXd& inverse, int block_size);

// Lower bound from random points on the star unit sphere.
double star_to_one_norm_sampled(const Eigen::MatrixXd& inverse, int block_size, int samples,
                                std::uint64_t seed);

// T_{h-1}: columns are next-state distributions reachable into step h. For
// h = 1 the single column is the initial distribution; otherwise one column
// per (unmasked state at h-1, action).
Eigen::MatrixXd reachable_columns(const TabularPOMDP& pomdp, int h);

inline constexpr double kResidualTol = 1e-9;

struct InverseCertificate {
  int h = 0, m = 0;
  std::string tag;  // block | lifted | user-supplied
  Eigen::MatrixXd inverse;
  int block_size = 0;
  double residual = 0;
  double norm = 0;
  bool valid = false;
};

InverseCertificate verify_generalized_inverse(const TabularPOMDP& pomdp, int h, int m,
                                              const Eigen::MatrixXd& inverse,
                                              std::string tag = "user-supplied");

// Partition the states reachable into step h by shared observation rows
// under one action sequence. Singleton parts get indicator rows, larger
// parts a Moore-Penrose block. Picks the action sequence with the smallest
// norm, lowest index on ties. Throws UnsupportedError when no sequence
// yields full-rank blocks.
InverseCertificate construct_block_inverse(const TabularPOMDP& pomdp, int h, int m);

// Window m -> m+1 by routing through the anchor action at the last new
// position: M+_{m+1}[s, (a, anchor), (o, o')] = M+_m[s, a, o].
InverseCertificate lift_inverse(const InverseCertificate& cert, const TabularPOMDP& pomdp,
                                int anchor_action);

struct CertificateSet {
  int m = 0;
  std::vector<InverseCertificate> steps;  // h = 1..H-m+1
  double inverse_alpha = 0;               // max norm over steps
  bool valid = false;
};

CertificateSet certify(const TabularPOMDP& pomdp, int m);

// Random POMDP with O >= S whose emission columns put weight `diagonal` on
// their own observation, so every step is one-step revealing.
TabularPOMDP random_revealing_pomdp(int S, int O, int A, int H, std::uint64_t seed,
                                    double diagonal = 0.6);

void write_certificates(std::ostream& out, const CertificateSet& set, double claimed_bound,
                        bool include_matrices = false);

}  // namespace revlab

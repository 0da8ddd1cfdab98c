#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

namespace revlab {

using Rng = std::mt19937_64;

// Uniform double in [0,1) from the top 53 bits; stable across platforms,
// unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Action rule at step h (1-based) given o_1..o_h and a_1..a_{h-1}.
class Policy {
 public:
  explicit Policy(int num_actions) : A_(num_actions) {}
  virtual ~Policy() = default;

  int num_actions() const { return A_; }

  virtual void probs(int h, std::span<const int> obs, std::span<const int> acts,
                     std::span<double> out) const = 0;
  virtual int sample_action(int h, std::span<const int> obs, std::span<const int> acts,
                            Rng& rng) const;

  // Open-loop policies expose their sequence so values can be computed by
  // a latent forward pass.
  virtual const std::vector<int>* action_sequence() const { return nullptr; }
  // table[h-1][o] for policies that react only to the current observation.
  virtual const std::vector<std::vector<int>>* reactive_table() const { return nullptr; }

 private:
  int A_;
};

using PolicyPtr = std::shared_ptr<const Policy>;

class DeterministicPolicy : public Policy {
 public:
  using Policy::Policy;
  virtual int action(int h, std::span<const int> obs, std::span<const int> acts) const = 0;
  void probs(int h, std::span<const int> obs, std::span<const int> acts,
             std::span<double> out) const override;
  int sample_action(int h, std::span<const int> obs, std::span<const int> acts,
                    Rng&) const override {
    return action(h, obs, acts);
  }
};

class ActionSequencePolicy : public DeterministicPolicy {
 public:
  ActionSequencePolicy(int num_actions, std::vector<int> seq);
  int action(int h, std::span<const int>, std::span<const int>) const override {
    return seq_[h - 1];
  }
  const std::vector<int>* action_sequence() const override { return &seq_; }

 private:
  std::vector<int> seq_;
};

class ReactivePolicy : public DeterministicPolicy {
 public:
  ReactivePolicy(int num_actions, std::vector<std::vector<int>> table);
  int action(int h, std::span<const int> obs, std::span<const int>) const override {
    return table_[h - 1][obs[h - 1]];
  }
  const std::vector<std::vector<int>>* reactive_table() const override { return &table_; }

 private:
  std::vector<std::vector<int>> table_;
};

struct HistoryHash {
  size_t operator()(const std::vector<int>& v) const noexcept;
};

// Lookup table keyed by the interleaved history (o_1, a_1, ..., o_h).
// Histories absent from the table play the fallback action.
class HistoryPolicy : public DeterministicPolicy {
 public:
  HistoryPolicy(int num_actions, int fallback = 0) : DeterministicPolicy(num_actions), fallback_(fallback) {}
  void set(std::vector<int> history, int a) { table_[std::move(history)] = a; }
  int action(int h, std::span<const int> obs, std::span<const int> acts) const override;
  size_t size() const { return table_.size(); }

  static std::vector<int> key(int h, std::span<const int> obs, std::span<const int> acts);

 private:
  std::unordered_map<std::vector<int>, int, HistoryHash> table_;
  int fallback_;
};

class UniformPolicy : public Policy {
 public:
  using Policy::Policy;
  void probs(int, std::span<const int>, std::span<const int>, std::span<double> out) const override;
};

// Seeded stochastic history policy: the action distribution at each
// history is a fixed pseudo-random simplex point derived from the seed and
// the history. Used as a probe family.
class RandomHistoryPolicy : public Policy {
 public:
  RandomHistoryPolicy(int num_actions, std::uint64_t seed, double determinism = 0.0);
  void probs(int h, std::span<const int> obs, std::span<const int> acts,
             std::span<double> out) const override;

 private:
  std::uint64_t seed_;
  double determinism_;  // probability of a point mass instead of a Dirichlet-like draw
};

class FunctionPolicy : public DeterministicPolicy {
 public:
  using Fn = std::function<int(int, std::span<const int>, std::span<const int>)>;
  FunctionPolicy(int num_actions, Fn fn) : DeterministicPolicy(num_actions), fn_(std::move(fn)) {}
  int action(int h, std::span<const int> obs, std::span<const int> acts) const override {
    return fn_(h, obs, acts);
  }

 private:
  Fn fn_;
};

}  // namespace revlab

#include "revlab/policy.hpp"

#include <algorithm>

#include "revlab/errors.hpp"

namespace revlab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

int Policy::sample_action(int h, std::span<const int> obs, std::span<const int> acts,
                          Rng& rng) const {
  std::vector<double> p(A_);
  probs(h, obs, acts, p);
  double u = uniform01(rng);
  for (int a = 0; a < A_; ++a) {
    if (u < p[a]) return a;
    u -= p[a];
  }
  // Rounding left u just above the total: return the last supported action.
  for (int a = A_ - 1; a >= 0; --a)
    if (p[a] > 0) return a;
  return 0;
}

void DeterministicPolicy::probs(int h, std::span<const int> obs, std::span<const int> acts,
                                std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  out[action(h, obs, acts)] = 1.0;
}

ActionSequencePolicy::ActionSequencePolicy(int num_actions, std::vector<int> seq)
    : DeterministicPolicy(num_actions), seq_(std::move(seq)) {
  for (int a : seq_)
    if (a < 0 || a >= num_actions) throw ShapeError("action sequence entry out of range");
}

ReactivePolicy::ReactivePolicy(int num_actions, std::vector<std::vector<int>> table)
    : DeterministicPolicy(num_actions), table_(std::move(table)) {
  for (const auto& row : table_)
    for (int a : row)
      if (a < 0 || a >= num_actions) throw ShapeError("reactive table entry out of range");
}

size_t HistoryHash::operator()(const std::vector<int>& v) const noexcept {
  std::uint64_t x = v.size();
  for (int e : v) x = splitmix(x ^ static_cast<std::uint64_t>(e + 1));
  return static_cast<size_t>(x);
}

std::vector<int> HistoryPolicy::key(int h, std::span<const int> obs, std::span<const int> acts) {
  std::vector<int> k;
  k.reserve(2 * h - 1);
  for (int i = 0; i < h; ++i) {
    k.push_back(obs[i]);
    if (i + 1 < h) k.push_back(acts[i]);
  }
  return k;
}

int HistoryPolicy::action(int h, std::span<const int> obs, std::span<const int> acts) const {
  auto it = table_.find(key(h, obs, acts));
  return it == table_.end() ? fallback_ : it->second;
}

void UniformPolicy::probs(int, std::span<const int>, std::span<const int>,
                          std::span<double> out) const {
  std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
}

RandomHistoryPolicy::RandomHistoryPolicy(int num_actions, std::uint64_t seed, double determinism)
    : Policy(num_actions), seed_(seed), determinism_(determinism) {}

void RandomHistoryPolicy::probs(int h, std::span<const int> obs, std::span<const int> acts,
                                std::span<double> out) const {
  std::uint64_t x = splitmix(seed_);
  for (int i = 0; i < h; ++i) {
    x = splitmix(x ^ static_cast<std::uint64_t>(obs[i] + 1));
    if (i + 1 < h) x = splitmix(x ^ (static_cast<std::uint64_t>(acts[i] + 1) << 32));
  }
  auto next01 = [&x] {
    x = splitmix(x);
    return static_cast<double>(x >> 11) * 0x1.0p-53;
  };
  const int A = static_cast<int>(out.size());
  if (next01() < determinism_) {
    std::fill(out.begin(), out.end(), 0.0);
    out[std::min(A - 1, static_cast<int>(next01() * A))] = 1.0;
    return;
  }
  double total = 0.0;
  for (int a = 0; a < A; ++a) {
    out[a] = 0.05 + next01();
    total += out[a];
  }
  for (double& p : out) p /= total;
}

}  // namespace revlab

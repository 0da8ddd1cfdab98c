#include "revlab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace revlab {

Sampler::Sampler(TabularPOMDP model) : model_(std::move(model)) {
  const int H = model_.horizon(), S = model_.num_states(), O = model_.num_observations(),
            A = model_.num_actions();
  auto build = [](auto&& prob, int n) {
    Row row;
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      double p = prob(i);
      if (p > 0.0) {
        c += p;
        row.outcome.push_back(i);
        row.cdf.push_back(c);
      }
    }
    return row;
  };
  initial_ = build([&](int s) { return model_.initial(s); }, S);
  emission_.resize(static_cast<size_t>(H) * S);
  transition_.resize(static_cast<size_t>(std::max(H - 1, 0)) * S * A);
  for (int h = 1; h <= H; ++h) {
    for (int s = 0; s < S; ++s) {
      Row& er = emission_[(h - 1) * S + s];
      if (model_.masked(h, s)) {
        er.masked = true;
      } else {
        er = build([&](int o) { return model_.emission(h, s, o); }, O);
      }
      if (h == H) continue;
      for (int a = 0; a < A; ++a) {
        Row& tr = transition_[((h - 1) * S + s) * A + a];
        if (model_.masked(h, s)) {
          tr.masked = true;
        } else {
          tr = build([&](int t) { return model_.transition(h, s, a, t); }, S);
        }
      }
    }
  }
}

int Sampler::draw(const Row& row, Rng& rng, const char* what) const {
  if (row.masked) throw ConstructionError(std::string("sampler reached a masked ") + what + " row");
  if (row.outcome.size() == 1) return row.outcome[0];
  if (row.outcome.empty()) throw ConstructionError(std::string("empty ") + what + " row");
  const double u = uniform01(rng) * row.cdf.back();
  for (size_t i = 0; i + 1 < row.outcome.size(); ++i)
    if (u < row.cdf[i]) return row.outcome[i];
  return row.outcome.back();
}

Trajectory Sampler::sample(const Policy& pi, Rng& rng, bool trace_latent) const {
  Trajectory t;
  sample_into(pi, rng, t, trace_latent);
  return t;
}

void Sampler::sample_into(const Policy& pi, Rng& rng, Trajectory& t, bool trace_latent) const {
  const int H = model_.horizon(), S = model_.num_states(), A = model_.num_actions();
  t.obs.clear();
  t.act.clear();
  t.rew.clear();
  t.latent.clear();
  t.obs.reserve(H);
  t.act.reserve(H);
  t.rew.reserve(H);
  int s = draw(initial_, rng, "initial");
  for (int h = 1; h <= H; ++h) {
    if (trace_latent) t.latent.push_back(s);
    const int o = draw(emission_[(h - 1) * S + s], rng, "emission");
    t.obs.push_back(o);
    const int a = pi.sample_action(h, t.obs, t.act, rng);
    t.act.push_back(a);
    t.rew.push_back(model_.reward(h, o, a));
    if (h < H) s = draw(transition_[((h - 1) * S + s) * A + a], rng, "transition");
  }
}

Trajectory sample_trajectory(const TabularPOMDP& m, const Policy& pi, std::uint64_t seed) {
  Rng rng(seed);
  return Sampler(m).sample(pi, rng);
}

namespace {

// Posterior over next states after observing o and playing a, given a
// normalized belief b at step h. Returns P(o | b).
double advance(const TabularPOMDP& m, int h, const std::vector<double>& b, int o, int a,
               std::vector<double>* next) {
  const int S = m.num_states();
  double po = 0.0;
  for (int s = 0; s < S; ++s)
    if (b[s] > 0.0) po += b[s] * m.emission(h, s, o);
  if (next == nullptr || po == 0.0 || h == m.horizon()) return po;
  next->assign(S, 0.0);
  for (int s = 0; s < S; ++s) {
    if (b[s] == 0.0) continue;
    const double w = b[s] * m.emission(h, s, o);
    if (w == 0.0) continue;
    for (int t = 0; t < S; ++t) (*next)[t] += w * m.transition(h, s, a, t);
  }
  double total = 0.0;
  for (double x : *next) total += x;
  for (double& x : *next) x /= total;
  return po;
}

std::vector<double> initial_belief(const TabularPOMDP& m) {
  std::vector<double> b(m.num_states());
  for (int s = 0; s < m.num_states(); ++s) b[s] = m.initial(s);
  return b;
}

}  // namespace

std::vector<WeightedTrajectory> enumerate_distribution(const TabularPOMDP& m, const Policy& pi,
                                                       std::size_t cap) {
  const int H = m.horizon(), O = m.num_observations(), A = m.num_actions();
  std::vector<WeightedTrajectory> out;
  std::vector<int> obs, act;
  std::vector<double> rew;

  std::function<void(int, const std::vector<double>&, double, double)> rec =
      [&](int h, const std::vector<double>& b, double lm, double lp) {
        for (int o = 0; o < O; ++o) {
          const double po = advance(m, h, b, o, 0, nullptr);
          if (po == 0.0) continue;
          obs.push_back(o);
          std::vector<double> p(A);
          pi.probs(h, obs, act, p);
          for (int a = 0; a < A; ++a) {
            if (p[a] == 0.0) continue;
            act.push_back(a);
            rew.push_back(m.reward(h, o, a));
            const double lm2 = lm + std::log(po), lp2 = lp + std::log(p[a]);
            if (h == H) {
              if (out.size() >= cap)
                throw EnumerationTooLarge("trajectory enumeration exceeds cap " +
                                          std::to_string(cap));
              WeightedTrajectory w;
              w.traj.obs = obs;
              w.traj.act = act;
              w.traj.rew = rew;
              w.log_model = lm2;
              w.log_policy = lp2;
              w.prob = std::exp(lm2 + lp2);
              out.push_back(std::move(w));
            } else {
              std::vector<double> next;
              advance(m, h, b, o, a, &next);
              rec(h + 1, next, lm2, lp2);
            }
            act.pop_back();
            rew.pop_back();
          }
          obs.pop_back();
        }
      };
  rec(1, initial_belief(m), 0.0, 0.0);
  return out;
}

double observation_log_prob(const TabularPOMDP& m, const std::vector<int>& obs,
                            const std::vector<int>& act) {
  const int H = m.horizon();
  if (static_cast<int>(obs.size()) != H || static_cast<int>(act.size()) != H)
    throw ShapeError("trajectory length differs from horizon");
  std::vector<double> b = initial_belief(m), next;
  double lp = 0.0;
  for (int h = 1; h <= H; ++h) {
    const double po = advance(m, h, b, obs[h - 1], act[h - 1], h < H ? &next : nullptr);
    if (po == 0.0) return -std::numeric_limits<double>::infinity();
    lp += std::log(po);
    if (h < H) b.swap(next);
  }
  return lp;
}

double policy_value_forward(const TabularPOMDP& m, const Policy& pi) {
  const auto* seq = pi.action_sequence();
  const auto* table = pi.reactive_table();
  if (seq == nullptr && table == nullptr)
    throw UnsupportedError("forward evaluation needs an open-loop or reactive policy");
  const int H = m.horizon(), S = m.num_states(), O = m.num_observations();
  std::vector<double> alpha = initial_belief(m), next(S);
  double value = 0.0;
  for (int h = 1; h <= H; ++h) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      if (alpha[s] == 0.0) continue;
      for (int o = 0; o < O; ++o) {
        const double w = alpha[s] * m.emission(h, s, o);
        if (w == 0.0) continue;
        const int a = seq ? (*seq)[h - 1] : (*table)[h - 1][o];
        value += w * m.reward(h, o, a);
        if (h < H)
          for (int t = 0; t < S; ++t) next[t] += w * m.transition(h, s, a, t);
      }
    }
    alpha.swap(next);
  }
  return value;
}

double policy_value_enumerate(const TabularPOMDP& m, const Policy& pi, std::size_t cap) {
  double v = 0.0;
  for (const auto& w : enumerate_distribution(m, pi, cap)) v += w.prob * w.traj.total_reward();
  return v;
}

double policy_value(const TabularPOMDP& m, const Policy& pi, std::size_t cap) {
  if (pi.action_sequence() || pi.reactive_table()) return policy_value_forward(m, pi);
  return policy_value_enumerate(m, pi, cap);
}

OptimalSolution optimal_value_bruteforce(const TabularPOMDP& m, std::size_t node_cap) {
  const int H = m.horizon(), O = m.num_observations(), A = m.num_actions();
  OptimalSolution sol;
  sol.policy = std::make_shared<HistoryPolicy>(A);
  std::vector<int> history;  // interleaved o_1, a_1, ..., o_h

  std::function<double(int, const std::vector<double>&)> rec = [&](int h,
                                                                  const std::vector<double>& b) {
    double total = 0.0;
    for (int o = 0; o < O; ++o) {
      const double po = advance(m, h, b, o, 0, nullptr);
      if (po == 0.0) continue;
      history.push_back(o);
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        if (++sol.nodes > node_cap)
          throw EnumerationTooLarge("history search exceeds node cap " + std::to_string(node_cap));
        double q = m.reward(h, o, a);
        if (h < H) {
          std::vector<double> next;
          advance(m, h, b, o, a, &next);
          history.push_back(a);
          q += rec(h + 1, next);
          history.pop_back();
        }
        // Near-ties within rounding keep the lower action.
        if (q > best + 1e-13) {
          best = q;
          best_a = a;
        }
      }
      sol.policy->set(history, best_a);
      history.pop_back();
      total += po * best;
    }
    return total;
  };
  sol.value = rec(1, initial_belief(m));
  return sol;
}

}  // namespace revlab

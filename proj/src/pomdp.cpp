#include "revlab/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace revlab {

namespace {
constexpr double kRowTol = 1e-12;
}

TabularPOMDP::TabularPOMDP(int horizon, std::vector<std::string> states,
                           std::vector<std::string> observations,
                           std::vector<std::string> actions)
    : H_(horizon),
      S_(static_cast<int>(states.size())),
      O_(static_cast<int>(observations.size())),
      A_(static_cast<int>(actions.size())),
      states_(std::move(states)),
      observations_(std::move(observations)),
      actions_(std::move(actions)) {
  if (H_ < 1 || S_ < 1 || O_ < 1 || A_ < 1)
    throw ShapeError("pomdp dimensions must be positive");
  init_.assign(S_, 0.0);
  emission_.assign(static_cast<size_t>(H_) * S_ * O_, 0.0);
  transition_.assign(static_cast<size_t>(H_ - 1) * S_ * A_ * S_, 0.0);
  reward_.assign(static_cast<size_t>(H_) * O_ * A_, 0.0);
  mask_.assign(static_cast<size_t>(H_) * S_, 0);
}

int TabularPOMDP::state_index(const std::string& label) const {
  auto it = std::find(states_.begin(), states_.end(), label);
  if (it == states_.end()) throw ShapeError("unknown state label " + label);
  return static_cast<int>(it - states_.begin());
}

int TabularPOMDP::observation_index(const std::string& label) const {
  auto it = std::find(observations_.begin(), observations_.end(), label);
  if (it == observations_.end()) throw ShapeError("unknown observation label " + label);
  return static_cast<int>(it - observations_.begin());
}

void TabularPOMDP::check_step(int h, int last) const {
  if (h < 1 || h > last) throw ShapeError("step " + std::to_string(h) + " out of range");
}

void TabularPOMDP::set_initial(int s, double p) { init_.at(s) = p; }

void TabularPOMDP::set_emission(int h, int s, int o, double p) {
  check_step(h, H_);
  emission_.at(((h - 1) * S_ + s) * O_ + o) = p;
}

void TabularPOMDP::set_transition(int h, int s, int a, int next, double p) {
  check_step(h, H_ - 1);
  transition_.at((((h - 1) * S_ + s) * A_ + a) * S_ + next) = p;
}

void TabularPOMDP::set_reward(int h, int o, int a, double r) {
  check_step(h, H_);
  reward_.at(((h - 1) * O_ + o) * A_ + a) = r;
}

void TabularPOMDP::set_masked(int h, int s, bool m) {
  check_step(h, H_);
  mask_.at((h - 1) * S_ + s) = m ? 1 : 0;
}

double TabularPOMDP::emission(int h, int s, int o) const {
  check_step(h, H_);
  if (masked(h, s))
    throw ConstructionError("emission queried at masked state " + states_[s] + " step " +
                            std::to_string(h));
  return emission_raw(h, s, o);
}

double TabularPOMDP::transition(int h, int s, int a, int next) const {
  check_step(h, H_ - 1);
  if (masked(h, s))
    throw ConstructionError("transition queried at masked state " + states_[s] + " step " +
                            std::to_string(h));
  return transition_raw(h, s, a, next);
}

void TabularPOMDP::validate() const {
  auto check_row = [](const double* row, int n, const std::string& what) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!(row[i] >= 0.0)) throw ConstructionError(what + ": negative or NaN entry");
      sum += row[i];
    }
    if (std::abs(sum - 1.0) > kRowTol)
      throw ConstructionError(what + ": row sums to " + std::to_string(sum));
  };

  check_row(init_.data(), S_, "initial distribution");
  for (int s = 0; s < S_; ++s)
    if (init_[s] > 0.0 && masked(1, s))
      throw ConstructionError("initial mass on masked state " + states_[s]);

  for (int h = 1; h <= H_; ++h) {
    for (int s = 0; s < S_; ++s) {
      if (masked(h, s)) continue;
      const std::string where = states_[s] + " step " + std::to_string(h);
      check_row(&emission_[((h - 1) * S_ + s) * O_], O_, "emission at " + where);
      if (h == H_) continue;
      for (int a = 0; a < A_; ++a) {
        const double* row = &transition_[(((h - 1) * S_ + s) * A_ + a) * S_];
        check_row(row, S_, "transition at " + where + " action " + actions_[a]);
        for (int t = 0; t < S_; ++t)
          if (row[t] > 0.0 && masked(h + 1, t))
            throw ConstructionError("transition from " + where + " reaches masked state " +
                                    states_[t]);
      }
    }
  }
  for (double r : reward_)
    if (!(r >= 0.0 && r <= 1.0)) throw ConstructionError("reward outside [0,1]");
}

double TabularPOMDP::max_total_reward() const {
  double total = 0.0;
  for (int h = 1; h <= H_; ++h) {
    auto first = reward_.begin() + static_cast<long>(h - 1) * O_ * A_;
    total += *std::max_element(first, first + O_ * A_);
  }
  return total;
}

double Trajectory::total_reward() const { return std::accumulate(rew.begin(), rew.end(), 0.0); }

}  // namespace revlab

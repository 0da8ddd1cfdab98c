#include "revlab/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "revlab/simulate.hpp"

namespace revlab {

namespace {

struct Kahan {
  double sum = 0, c = 0;
  void add(double x) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

void FiniteDistribution::validate() const {
  Kahan total;
  for (double p : prob) {
    if (!(p >= 0.0)) throw ParameterError("negative or NaN probability");
    total.add(p);
  }
  if (std::abs(total.sum - 1.0) > 1e-10) throw ParameterError("probabilities do not sum to 1");
}

Divergences divergences(const FiniteDistribution& p, const FiniteDistribution& q) {
  if (p.prob.size() != q.prob.size()) throw ShapeError("distributions have different supports");
  Kahan tv, hel, kl, chi;
  bool dominated = true;
  for (std::size_t i = 0; i < p.prob.size(); ++i) {
    const double a = p.prob[i], b = q.prob[i];
    tv.add(std::abs(a - b));
    const double d = std::sqrt(a) - std::sqrt(b);
    hel.add(d * d);
    if (a == 0.0) continue;
    if (b == 0.0) {
      dominated = false;
      continue;
    }
    kl.add(a * std::log(a / b));
    chi.add(a * a / b);
  }
  Divergences d;
  d.tv = 0.5 * tv.sum;
  d.hellinger_sq = hel.sum;
  d.kl = dominated ? std::max(kl.sum, 0.0) : kInfiniteDivergence;
  d.chi_sq = dominated ? std::max(chi.sum - 1.0, 0.0) : kInfiniteDivergence;
  return d;
}

InequalityCheck check_divergence_inequalities(const Divergences& d, double slack) {
  InequalityCheck c;
  c.tv_kl = 2.0 * d.tv * d.tv <= d.kl + slack;
  c.kl_chi = std::isinf(d.chi_sq) || d.kl <= std::log1p(d.chi_sq) + slack;
  c.hellinger_tv = 0.5 * d.hellinger_sq <= d.tv + slack;
  c.tv_hellinger = d.tv <= std::sqrt(d.hellinger_sq) + slack;
  return c;
}

std::pair<FiniteDistribution, FiniteDistribution> random_distribution_pair(int size, Rng& rng) {
  auto draw = [&](bool allow_zeros) {
    FiniteDistribution d;
    d.prob.resize(size);
    double total = 0;
    for (double& x : d.prob) {
      x = -std::log(1.0 - uniform01(rng));
      if (allow_zeros && uniform01(rng) < 0.25) x = 0.0;
      total += x;
    }
    if (total == 0.0) {
      d.prob[0] = 1.0;
      total = 1.0;
    }
    for (double& x : d.prob) x /= total;
    return d;
  };
  const bool sparse = uniform01(rng) < 0.3;
  FiniteDistribution p = draw(sparse), q = draw(false);
  return {p, q};
}

HellingerConditioning hellinger_conditioning_check(const std::vector<double>& joint_p,
                                                   const std::vector<double>& joint_q, int nx,
                                                   int ny, double slack) {
  if (static_cast<int>(joint_p.size()) != nx * ny || static_cast<int>(joint_q.size()) != nx * ny)
    throw ShapeError("joint tables must be nx * ny");
  HellingerConditioning r;
  Kahan lhs, rhs;
  for (int x = 0; x < nx; ++x) {
    double px = 0, qx = 0;
    for (int y = 0; y < ny; ++y) {
      px += joint_p[x * ny + y];
      qx += joint_q[x * ny + y];
      const double d = std::sqrt(joint_p[x * ny + y]) - std::sqrt(joint_q[x * ny + y]);
      rhs.add(d * d);
    }
    if (px == 0.0) continue;
    double h = 0;
    for (int y = 0; y < ny; ++y) {
      const double a = joint_p[x * ny + y] / px;
      const double b = qx > 0.0 ? joint_q[x * ny + y] / qx : 1.0 / ny;
      const double d = std::sqrt(a) - std::sqrt(b);
      h += d * d;
    }
    lhs.add(px * h);
  }
  r.lhs = lhs.sum;
  r.rhs = 2.0 * rhs.sum;
  r.ok = r.lhs <= r.rhs + slack;
  return r;
}

PolicySchedule fixed_schedule(std::vector<PolicyPtr> per_episode) {
  return [eps = std::move(per_episode)](int t, const std::vector<Trajectory>&) {
    return eps[std::min<std::size_t>(t, eps.size() - 1)];
  };
}

PolicySchedule two_branch_schedule(PolicyPtr first, int step, int obs, PolicyPtr if_seen,
                                   PolicyPtr otherwise) {
  return [=](int t, const std::vector<Trajectory>& prev) {
    if (t == 0) return first;
    return prev[0].obs[step - 1] == obs ? if_seen : otherwise;
  };
}

namespace {

struct EpisodeOutcome {
  Trajectory traj;
  double weight = 0;               // P_0 model times policy
  std::vector<double> ratio;       // P_M / P_0 per member (model parts)
};

std::vector<EpisodeOutcome> episode_outcomes(const std::vector<const TabularPOMDP*>& members,
                                             const TabularPOMDP& reference, const Policy& pi,
                                             std::size_t cap) {
  std::vector<EpisodeOutcome> out;
  for (auto& w : enumerate_distribution(reference, pi, cap)) {
    EpisodeOutcome e;
    e.weight = w.prob;
    e.ratio.reserve(members.size());
    for (const auto* m : members) {
      const double lp = observation_log_prob(*m, w.traj.obs, w.traj.act);
      e.ratio.push_back(std::isinf(lp) ? 0.0 : std::exp(lp - w.log_model));
    }
    e.traj = std::move(w.traj);
    out.push_back(std::move(e));
  }
  return out;
}

// Depth-first walk over T-tuples drawn from the reference under the
// schedule. `leaf` receives the tuple weight and the per-member products.
void walk_tuples(const std::vector<const TabularPOMDP*>& members, const TabularPOMDP& reference,
                 const PolicySchedule& schedule, int T, std::size_t cap,
                 const std::function<void(double, const std::vector<double>&,
                                          const std::vector<Trajectory>&)>& leaf,
                 std::size_t& tuples) {
  std::vector<Trajectory> prev;
  std::function<void(int, double, const std::vector<double>&)> rec =
      [&](int t, double w, const std::vector<double>& prod) {
        if (t == T) {
          if (++tuples > cap) throw EnumerationTooLarge("product space exceeds the tuple cap");
          leaf(w, prod, prev);
          return;
        }
        const PolicyPtr pi = schedule(t, prev);
        for (auto& e : episode_outcomes(members, reference, *pi, cap)) {
          std::vector<double> next(prod.size());
          for (std::size_t i = 0; i < prod.size(); ++i) next[i] = prod[i] * e.ratio[i];
          prev.push_back(std::move(e.traj));
          rec(t + 1, w * e.weight, next);
          prev.pop_back();
        }
      };
  rec(0, 1.0, std::vector<double>(members.size(), 1.0));
}

}  // namespace

IngsterResult ingster_check(const std::vector<TabularPOMDP>& members,
                            const std::vector<double>& prior, const TabularPOMDP& reference,
                            const PolicySchedule& schedule, int T, std::size_t cap) {
  if (members.size() != prior.size() || members.empty())
    throw ShapeError("prior must weight every member");
  if (T < 1) throw ParameterError("T >= 1");
  const std::size_t k = members.size();
  std::vector<const TabularPOMDP*> ptrs;
  for (const auto& m : members) ptrs.push_back(&m);

  Kahan lhs, mass;
  std::vector<Kahan> pair(k * k);
  IngsterResult r;
  walk_tuples(
      ptrs, reference, schedule, T, cap,
      [&](double w, const std::vector<double>& prod, const std::vector<Trajectory>&) {
        double mix = 0;
        for (std::size_t i = 0; i < k; ++i) mix += prior[i] * prod[i];
        lhs.add(w * mix * mix);
        mass.add(w * mix);
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j) pair[i * k + j].add(w * prod[i] * prod[j]);
      },
      r.tuples);

  // The mixture puts mass outside the reference support: chi^2 is infinite.
  r.lhs = std::abs(mass.sum - 1.0) > 1e-9 ? kInfiniteDivergence : lhs.sum;
  Kahan rhs;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) rhs.add(prior[i] * prior[j] * pair[i * k + j].sum);
  r.rhs = rhs.sum;
  r.gap = std::abs(r.lhs - r.rhs);
  return r;
}

namespace {

bool entered(const HardInstanceSpec& spec, const Trajectory& t) {
  const auto& th = *spec.theta;
  return t.obs[th.h_star - 1] == leaf_state(spec.n, th.leaf) &&
         t.act[th.h_star - 1] == th.entry_action;
}

// Number of leading password actions matched after h_star.
int password_prefix(const HardInstanceSpec& spec, const std::vector<int>& act) {
  const auto& th = *spec.theta;
  int k = 0;
  while (k < static_cast<int>(th.password.size()) && act[th.h_star + k] == th.password[k]) ++k;
  return k;
}

}  // namespace

VisitCounts visit_counts(const HardInstanceSpec& spec, const Trajectory& t) {
  if (!spec.theta) throw ParameterError("visit counts need a hidden parameter");
  VisitCounts c;
  if (!entered(spec, t)) return c;
  const auto& th = *spec.theta;
  const int H = spec.H;
  const int k = password_prefix(spec, t.act);
  c.correct = k == static_cast<int>(th.password.size()) ? 1 : 0;
  if (spec.family == Family::SingleStepPac) {
    // l = h_star .. H-2 with a_{h_star+1..l} matching the password.
    c.reveal = 1 + std::min(k, H - 2 - th.h_star);
    if (th.h_star > H - 2) c.reveal = 0;
  } else if (spec.family == Family::MultiStepRegret) {
    const int l = th.h_star + 1 + k;  // first step off the password
    if (l <= H - 1 && is_reveal_step(spec, l) && t.act[l - 1] == th.reveal_action) c.reveal = 1;
  } else {
    throw UnsupportedError("visit counts are defined for the single-step and regret families");
  }
  return c;
}

Chi2InnerProduct chi2_inner_product_check(const HardInstanceSpec& spec,
                                          const std::vector<int>& mu_prime,
                                          const PolicySchedule& schedule, int T, int budget_reveal,
                                          int budget_correct, std::size_t cap) {
  if (!spec.theta) throw ParameterError("chi^2 inner product needs a hidden parameter");
  if (spec.family == Family::MultiStepPac)
    throw UnsupportedError("chi^2 inner product is defined for the single-step and regret families");
  HardInstanceSpec other = spec;
  other.mu = mu_prime;
  HardInstanceSpec null = spec;
  null.theta.reset();
  const auto m1 = build_instance(spec).pomdp, m2 = build_instance(other).pomdp,
             m0 = build_instance(null).pomdp;
  const std::vector<const TabularPOMDP*> ptrs{&m1, &m2};

  Kahan lhs;
  Chi2InnerProduct r;
  walk_tuples(
      ptrs, m0, schedule, T, cap,
      [&](double w, const std::vector<double>& prod, const std::vector<Trajectory>& tuple) {
        int rev = 0, cor = 0;
        for (const auto& t : tuple) {
          const auto c = visit_counts(spec, t);
          rev += c.reveal;
          cor += c.correct;
        }
        if (rev > budget_reveal || cor > budget_correct)
          throw PreconditionError("schedule exceeds the visitation budgets on a reachable tuple");
        lhs.add(w * prod[0] * prod[1]);
      },
      r.tuples);

  const double C =
      spec.family == Family::SingleStepPac ? std::pow(1.0 + spec.sigma, 2.0 * spec.H) : 1.0;
  double inner = 0;
  for (int i = 0; i < spec.K; ++i) inner += spec.mu[i] * mu_prime[i];
  const double e2 = spec.eps * spec.eps;
  r.lhs = lhs.sum;
  r.bound = std::exp(budget_reveal * C * spec.sigma * spec.sigma * e2 / spec.K * std::abs(inner) +
                     4.0 / 3.0 * C * e2 * budget_correct);
  r.ok = r.lhs <= r.bound + 1e-9;
  return r;
}

ConditionalRatioReport conditional_ratio_check(const HardInstanceSpec& spec,
                                               const std::vector<int>& mu_prime,
                                               std::size_t cap) {
  if (spec.family != Family::MultiStepRegret || !spec.theta)
    throw ParameterError("conditional ratio check needs a regret-family member");
  HardInstanceSpec other = spec;
  other.mu = mu_prime;
  HardInstanceSpec null = spec;
  null.theta.reset();
  const TabularPOMDP models[3] = {build_instance(spec).pomdp, build_instance(other).pomdp,
                                  build_instance(null).pomdp};
  const int H = spec.H, S = models[0].num_states(), O = models[0].num_observations(),
            A = spec.A;
  const auto& th = *spec.theta;
  double inner = 0;
  for (int i = 0; i < spec.K; ++i) inner += spec.mu[i] * mu_prime[i];
  const double e2 = spec.eps * spec.eps;
  const double want_rev = 1.0 + e2 * spec.sigma * spec.sigma * inner / spec.K;
  const double want_cor = 1.0 + 4.0 / 3.0 * e2;

  ConditionalRatioReport rep;
  std::vector<int> obs, act;
  using Belief = std::vector<double>;

  // Next-observation distribution at step h from a latent belief.
  auto predict = [&](const TabularPOMDP& m, int h, const Belief& b) {
    std::vector<double> p(O, 0.0);
    double z = 0;
    for (int s = 0; s < S; ++s) {
      if (b[s] == 0.0) continue;
      z += b[s];
      for (int o = 0; o < O; ++o) p[o] += b[s] * m.emission(h, s, o);
    }
    if (z > 0.0)
      for (double& x : p) x /= z;
    return p;
  };
  auto advance = [&](const TabularPOMDP& m, int h, const Belief& b, int o, int a) {
    Belief n(S, 0.0);
    for (int s = 0; s < S; ++s) {
      if (b[s] == 0.0) continue;
      const double w = b[s] * m.emission(h, s, o);
      if (w == 0.0) continue;
      for (int t = 0; t < S; ++t) n[t] += w * m.transition(h, s, a, t);
    }
    return n;
  };

  auto classify = [&](int l) {
    // 0 = outside, 1 = reveal event, 2 = correct event; l = length of tau.
    if (l < th.h_star + 1) return 0;
    if (obs[th.h_star - 1] != leaf_state(spec.n, th.leaf) || act[th.h_star - 1] != th.entry_action)
      return 0;
    int k = 0;
    while (th.h_star + 1 + k <= l && act[th.h_star + k] == th.password[k]) ++k;
    if (l == H - 1 && k == static_cast<int>(th.password.size())) return 2;
    if (k == l - th.h_star - 1 && is_reveal_step(spec, l) && act[l - 1] == th.reveal_action)
      return 1;
    return 0;
  };

  // beliefs[i] is the unnormalized latent distribution of s_{l+1} given tau_l.
  std::function<void(int, const Belief*)> rec = [&](int l, const Belief* beliefs) {
    if (++rep.histories > cap) throw EnumerationTooLarge("history enumeration exceeds the cap");
    const int h = l + 1;
    const auto p1 = predict(models[0], h, beliefs[0]);
    const auto p2 = predict(models[1], h, beliefs[1]);
    const auto p0 = predict(models[2], h, beliefs[2]);
    double I = 0;
    for (int o = 0; o < O; ++o)
      if (p0[o] > 0.0) I += p1[o] * p2[o] / p0[o];
    switch (classify(l)) {
      case 1:
        ++rep.in_reveal;
        rep.max_dev_reveal = std::max(rep.max_dev_reveal, std::abs(I - want_rev));
        break;
      case 2:
        ++rep.in_correct;
        rep.max_dev_correct = std::max(rep.max_dev_correct, std::abs(I - want_cor));
        break;
      default:
        rep.max_dev_outside = std::max(rep.max_dev_outside, std::abs(I - 1.0));
    }
    if (h == H) return;
    for (int o = 0; o < O; ++o) {
      if (p0[o] == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        Belief next[3];
        for (int i = 0; i < 3; ++i) next[i] = advance(models[i], h, beliefs[i], o, a);
        obs.push_back(o);
        act.push_back(a);
        rec(l + 1, next);
        obs.pop_back();
        act.pop_back();
      }
    }
  };

  Belief init[3];
  for (int i = 0; i < 3; ++i) {
    init[i].assign(S, 0.0);
    for (int s = 0; s < S; ++s) init[i][s] = models[i].initial(s);
  }
  rec(0, init);
  return rep;
}

}  // namespace revlab

#include "revlab/hard_instances.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace revlab {

std::string family_name(Family f) {
  switch (f) {
    case Family::SingleStepPac: return "single-step-pac";
    case Family::MultiStepRegret: return "multi-step-regret";
    case Family::MultiStepPac: return "multi-step-pac";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "single-step-pac") return Family::SingleStepPac;
  if (name == "multi-step-regret") return Family::MultiStepRegret;
  if (name == "multi-step-pac") return Family::MultiStepPac;
  throw ParameterError("unknown family '" + name + "'");
}

int num_leaves(int n) { return 1 << (n - 1); }
int leaf_state(int n, int leaf) { return num_leaves(n) - 1 + leaf; }

std::string tree_label(int heap_index) {
  std::string bits;
  for (unsigned x = static_cast<unsigned>(heap_index) + 1; x > 0; x >>= 1)
    bits.insert(bits.begin(), static_cast<char>('0' + (x & 1)));
  return "tree:" + bits;
}

std::vector<int> route_to_leaf(int n, int leaf) {
  std::vector<int> moves;
  for (int d = n - 2; d >= 0; --d) moves.push_back(((leaf >> d) & 1) ? 2 : 1);
  return moves;
}

std::vector<int> reveal_steps(const HardInstanceSpec& spec) {
  std::vector<int> out;
  if (spec.family == Family::SingleStepPac) return out;
  for (int h = spec.n; h < spec.H; h += spec.m) out.push_back(h);
  return out;
}

bool is_reveal_step(const HardInstanceSpec& spec, int h) {
  if (spec.family == Family::SingleStepPac) return false;
  return h >= spec.n && h < spec.H && (h - spec.n) % spec.m == 0;
}

std::vector<int> valid_h_star(const HardInstanceSpec& spec) {
  if (spec.family != Family::SingleStepPac) return reveal_steps(spec);
  std::vector<int> out;
  for (int h = spec.n + 1; h <= spec.H - 1; ++h) out.push_back(h);
  return out;
}

std::vector<int> reveal_actions(const HardInstanceSpec& spec) {
  std::vector<int> out;
  if (spec.family == Family::MultiStepRegret)
    for (int a = 0; a < 1 + spec.A / 6; ++a) out.push_back(a);
  else if (spec.family == Family::MultiStepPac)
    out.push_back(0);
  return out;
}

std::vector<int> password_choices(const HardInstanceSpec& spec, int h) {
  std::vector<int> out;
  const auto rev = reveal_actions(spec);
  const bool constrained = is_reveal_step(spec, h);
  for (int a = 0; a < spec.A; ++a)
    if (!constrained || std::find(rev.begin(), rev.end(), a) == rev.end()) out.push_back(a);
  return out;
}

void validate_spec(const HardInstanceSpec& s) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ParameterError("constraint violated: " + what);
  };
  need(s.eps > 0 && s.eps <= 0.1, "eps in (0, 0.1]");
  need(s.sigma > 0 && s.sigma <= 1, "sigma in (0, 1]");
  need(s.n >= 1 && s.n <= 12, "tree depth n in [1, 12]");
  need(s.K >= 1, "K >= 1");
  need(s.H >= 2, "H >= 2");
  need(s.A >= 2, "A >= 2");
  need(s.n == 1 || s.A >= 3, "A >= 3 when the tree has internal nodes");
  const bool multi = s.family != Family::SingleStepPac;
  if (multi) need(s.m >= 1, "m >= 1");
  if (s.family == Family::MultiStepPac) need(s.L >= 1, "L >= 1");
  const int mu_len = (s.family == Family::MultiStepPac ? s.L : 1) * s.K;
  need(static_cast<int>(s.mu.size()) == mu_len, "mu has " + std::to_string(mu_len) + " entries");
  for (int v : s.mu) need(v == 1 || v == -1, "mu entries are +1 or -1");
  if (s.family == Family::MultiStepRegret) need(s.A > 1 + s.A / 6, "A_tr non-empty");

  if (!s.unchecked) {
    switch (s.family) {
      case Family::SingleStepPac:
        need(s.H >= 4 * s.n, "H >= 4n");
        need(s.A >= 3, "A >= 3");
        need(s.sigma <= 1.0 / (2.0 * s.H), "sigma <= 1/(2H)");
        break;
      case Family::MultiStepRegret:
        need(s.H >= 8 * s.n + s.m + 1, "H >= 8n+m+1");
        need(s.K >= 2, "K >= 2");
        break;
      case Family::MultiStepPac:
        need(s.H >= 8 * s.n + s.m + 1, "H >= 8n+m+1");
        break;
    }
  }

  if (!s.theta) return;
  const auto& t = *s.theta;
  const auto hs = valid_h_star(s);
  need(std::find(hs.begin(), hs.end(), t.h_star) != hs.end(), "h_star is a valid entry step");
  need(t.leaf >= 0 && t.leaf < num_leaves(s.n), "leaf index within the tree");
  need(t.entry_action >= 1 && t.entry_action < s.A, "entry action in {1..A-1}");
  if (s.family == Family::MultiStepRegret) {
    const auto rev = reveal_actions(s);
    need(std::find(rev.begin(), rev.end(), t.reveal_action) != rev.end(),
         "reveal action in A_rev");
  }
  need(static_cast<int>(t.password.size()) == s.H - t.h_star - 1,
       "password covers steps h_star+1..H-1");
  for (int i = 0; i < static_cast<int>(t.password.size()); ++i) {
    const auto ok = password_choices(s, t.h_star + 1 + i);
    need(std::find(ok.begin(), ok.end(), t.password[i]) != ok.end(),
         "password entry at step " + std::to_string(t.h_star + 1 + i) + " is admissible");
  }
}

namespace {

// Shared layout: tree states/observations first, then the 2K signal
// observations o+:i, o-:i interleaved, then family-specific extras.
struct Layout {
  int tree = 0;
  int sig0 = 0;  // first signal observation
  std::vector<std::string> states, obs, actions;

  explicit Layout(const HardInstanceSpec& s) {
    tree = (1 << s.n) - 1;
    for (int i = 0; i < tree; ++i) {
      states.push_back(tree_label(i));
      obs.push_back(tree_label(i));
    }
    sig0 = tree;
    for (int i = 1; i <= s.K; ++i) {
      obs.push_back("o+:" + std::to_string(i));
      obs.push_back("o-:" + std::to_string(i));
    }
    for (int a = 0; a < s.A; ++a) {
      if (a == 0) actions.push_back("wait");
      else if (a == 1) actions.push_back("left");
      else if (a == 2) actions.push_back("right");
      else actions.push_back("a" + std::to_string(a));
    }
  }
  int add_state(const std::string& l) {
    states.push_back(l);
    return static_cast<int>(states.size()) - 1;
  }
  int add_obs(const std::string& l) {
    obs.push_back(l);
    return static_cast<int>(obs.size()) - 1;
  }
};

void set_signal(TabularPOMDP& p, const Layout& lay, int h, int s, const HardInstanceSpec& spec,
                const int* mu) {
  const double base = 1.0 / (2.0 * spec.K);
  for (int i = 0; i < spec.K; ++i) {
    const double d = mu ? spec.sigma * mu[i] : 0.0;
    p.set_emission(h, s, lay.sig0 + 2 * i, (1.0 + d) * base);
    p.set_emission(h, s, lay.sig0 + 2 * i + 1, (1.0 - d) * base);
  }
}

// Tree emissions and internal-node transitions, common to every family.
void set_tree(TabularPOMDP& p, const Layout& lay, const HardInstanceSpec& spec) {
  const int internal = num_leaves(spec.n) - 1;
  for (int h = 1; h <= spec.H; ++h)
    for (int s = 0; s < lay.tree; ++s) p.set_emission(h, s, s, 1.0);
  for (int h = 1; h < spec.H; ++h)
    for (int s = 0; s < internal; ++s)
      for (int a = 0; a < spec.A; ++a) {
        int next = s;
        if (a == 1) next = 2 * s + 1;
        if (a == 2) next = 2 * s + 2;
        p.set_transition(h, s, a, next, 1.0);
      }
  for (int h = 1; h < spec.H; ++h)
    for (int l = 0; l < num_leaves(spec.n); ++l) {
      const int s = leaf_state(spec.n, l);
      p.set_transition(h, s, 0, s, 1.0);
    }
  p.set_initial(0, 1.0);
}

void set_rewards(TabularPOMDP& p, const HardInstanceSpec& spec, int good) {
  for (int a = 0; a < spec.A; ++a) {
    p.set_reward(spec.H, good, a, 1.0);
    p.set_reward(spec.H, 0, a, (1.0 + spec.eps) / 4.0);
  }
}

bool is_entry(const HardInstanceSpec& spec, int h, int leaf, int a) {
  return spec.theta && h == spec.theta->h_star && leaf == spec.theta->leaf &&
         a == spec.theta->entry_action;
}

int password_at(const HardInstanceSpec& spec, int h) {
  return spec.theta->password[h - spec.theta->h_star - 1];
}

void set_goodbad(TabularPOMDP& p, int H, int s, int good, int bad, bool plus) {
  p.set_emission(H, s, good, plus ? 0.75 : 0.25);
  p.set_emission(H, s, bad, plus ? 0.25 : 0.75);
}

InstanceMetadata make_meta(const HardInstanceSpec& spec, const TabularPOMDP& p) {
  InstanceMetadata meta;
  meta.optimal_value = closed_form_optimal_value(spec);
  meta.reference_value = (1.0 + spec.eps) / 4.0;
  meta.optimal_actions = optimal_action_sequence(spec);
  meta.num_states = p.num_states();
  meta.num_observations = p.num_observations();
  meta.revealing_window = spec.family == Family::SingleStepPac ? 1 : spec.m + 1;
  meta.revealing_bound = spec.is_null() ? 1.0 : 1.0 + 2.0 / spec.sigma;
  meta.log_cardinality_bound = log_cardinality_bound(spec);
  return meta;
}

}  // namespace

HardInstance build_single_step(const HardInstanceSpec& spec) {
  if (spec.family != Family::SingleStepPac) throw ParameterError("not a single-step spec");
  validate_spec(spec);
  Layout lay(spec);
  const int sp = lay.add_state("lock:+"), sm = lay.add_state("lock:-");
  const int good = lay.add_obs("good"), bad = lay.add_obs("bad");
  const int H = spec.H;
  TabularPOMDP p(H, lay.states, lay.obs, lay.actions);
  set_tree(p, lay, spec);
  set_rewards(p, spec, good);

  for (int h = 1; h <= H; ++h) {
    const bool plus_live = spec.theta && h > spec.theta->h_star;
    p.set_masked(h, sp, !plus_live);
    if (h < H) {
      if (plus_live) set_signal(p, lay, h, sp, spec, spec.mu.data());
      set_signal(p, lay, h, sm, spec, nullptr);
    } else {
      if (plus_live) set_goodbad(p, H, sp, good, bad, true);
      set_goodbad(p, H, sm, good, bad, false);
    }
  }
  for (int h = 1; h < H; ++h) {
    for (int l = 0; l < num_leaves(spec.n); ++l) {
      const int s = leaf_state(spec.n, l);
      for (int a = 1; a < spec.A; ++a) {
        if (is_entry(spec, h, l, a)) {
          p.set_transition(h, s, a, sp, spec.eps);
          p.set_transition(h, s, a, sm, 1.0 - spec.eps);
        } else {
          p.set_transition(h, s, a, sm, 1.0);
        }
      }
    }
    for (int a = 0; a < spec.A; ++a) {
      p.set_transition(h, sm, a, sm, 1.0);
      if (spec.theta && h > spec.theta->h_star)
        p.set_transition(h, sp, a, a == password_at(spec, h) ? sp : sm, 1.0);
    }
  }
  p.validate();
  return {spec, p, make_meta(spec, p)};
}

HardInstance build_multistep_regret(const HardInstanceSpec& spec) {
  if (spec.family != Family::MultiStepRegret) throw ParameterError("not a multi-step regret spec");
  validate_spec(spec);
  Layout lay(spec);
  const int sp = lay.add_state("lock:+"), sm = lay.add_state("lock:-");
  const int ep = lay.add_state("e+"), em = lay.add_state("e-");
  const int term = lay.add_state("terminal");
  const int lock = lay.add_obs("lock"), good = lay.add_obs("good"), bad = lay.add_obs("bad");
  const int term_obs = lay.add_obs("terminal");
  const int H = spec.H;
  const auto rev = reveal_actions(spec);
  auto is_rev = [&](int a) { return std::find(rev.begin(), rev.end(), a) != rev.end(); };

  TabularPOMDP p(H, lay.states, lay.obs, lay.actions);
  set_tree(p, lay, spec);
  set_rewards(p, spec, good);

  for (int h = 1; h <= H; ++h) {
    const bool plus_live = spec.theta && h > spec.theta->h_star;
    p.set_masked(h, sp, !plus_live);
    p.set_masked(h, ep, !spec.theta);
    if (h < H) {
      if (plus_live) p.set_emission(h, sp, lock, 1.0);
      p.set_emission(h, sm, lock, 1.0);
    } else {
      if (plus_live) set_goodbad(p, H, sp, good, bad, true);
      set_goodbad(p, H, sm, good, bad, false);
    }
    if (spec.theta) set_signal(p, lay, h, ep, spec, spec.mu.data());
    set_signal(p, lay, h, em, spec, nullptr);
    p.set_emission(h, term, term_obs, 1.0);
  }
  for (int h = 1; h < H; ++h) {
    for (int l = 0; l < num_leaves(spec.n); ++l) {
      const int s = leaf_state(spec.n, l);
      for (int a = 1; a < spec.A; ++a) {
        if (is_entry(spec, h, l, a)) {
          p.set_transition(h, s, a, sp, spec.eps);
          p.set_transition(h, s, a, sm, 1.0 - spec.eps);
        } else {
          p.set_transition(h, s, a, sm, 1.0);
        }
      }
    }
    const bool reveal_step = is_reveal_step(spec, h);
    for (int a = 0; a < spec.A; ++a) {
      if (spec.theta) p.set_transition(h, ep, a, term, 1.0);
      p.set_transition(h, em, a, term, 1.0);
      p.set_transition(h, term, a, term, 1.0);
      p.set_transition(h, sm, a, reveal_step && is_rev(a) ? em : sm, 1.0);
      if (!(spec.theta && h > spec.theta->h_star)) continue;
      if (reveal_step && is_rev(a))
        p.set_transition(h, sp, a, a == spec.theta->reveal_action ? ep : em, 1.0);
      else
        p.set_transition(h, sp, a, a == password_at(spec, h) ? sp : sm, 1.0);
    }
  }
  p.validate();
  return {spec, p, make_meta(spec, p)};
}

HardInstance build_multistep_pac(const HardInstanceSpec& spec) {
  if (spec.family != Family::MultiStepPac) throw ParameterError("not a multi-step pac spec");
  validate_spec(spec);
  Layout lay(spec);
  const int L = spec.L, H = spec.H;
  std::vector<int> sp(L), sm(L), ep(L), em(L), term(L), lock_j(L), term_obs(L);
  for (int j = 0; j < L; ++j) {
    const std::string tag = ":" + std::to_string(j + 1);
    sp[j] = lay.add_state("lock+" + tag);
    sm[j] = lay.add_state("lock-" + tag);
    ep[j] = lay.add_state("e+" + tag);
    em[j] = lay.add_state("e-" + tag);
    term[j] = lay.add_state("terminal" + tag);
  }
  const int lock = lay.add_obs("lock"), good = lay.add_obs("good"), bad = lay.add_obs("bad");
  for (int j = 0; j < L; ++j) {
    lock_j[j] = lay.add_obs("lock:" + std::to_string(j + 1));
    term_obs[j] = lay.add_obs("terminal:" + std::to_string(j + 1));
  }

  TabularPOMDP p(H, lay.states, lay.obs, lay.actions);
  set_tree(p, lay, spec);
  set_rewards(p, spec, good);

  for (int h = 1; h <= H; ++h) {
    const bool plus_live = spec.theta && h > spec.theta->h_star;
    const int lock_obs_base = is_reveal_step(spec, h) ? -1 : lock;
    for (int j = 0; j < L; ++j) {
      p.set_masked(h, sp[j], !plus_live);
      p.set_masked(h, ep[j], !spec.theta);
      const int lo = lock_obs_base < 0 ? lock_j[j] : lock;
      if (h < H) {
        if (plus_live) p.set_emission(h, sp[j], lo, 1.0);
        p.set_emission(h, sm[j], lo, 1.0);
      } else {
        if (plus_live) set_goodbad(p, H, sp[j], good, bad, true);
        set_goodbad(p, H, sm[j], good, bad, false);
      }
      if (spec.theta) set_signal(p, lay, h, ep[j], spec, spec.mu.data() + j * spec.K);
      set_signal(p, lay, h, em[j], spec, nullptr);
      p.set_emission(h, term[j], term_obs[j], 1.0);
    }
  }
  for (int h = 1; h < H; ++h) {
    for (int l = 0; l < num_leaves(spec.n); ++l) {
      const int s = leaf_state(spec.n, l);
      for (int a = 1; a < spec.A; ++a) {
        const bool hit = is_entry(spec, h, l, a);
        for (int j = 0; j < L; ++j) {
          if (hit) {
            p.set_transition(h, s, a, sp[j], spec.eps / L);
            p.set_transition(h, s, a, sm[j], (1.0 - spec.eps) / L);
          } else {
            p.set_transition(h, s, a, sm[j], 1.0 / L);
          }
        }
      }
    }
    const bool reveal_step = is_reveal_step(spec, h);
    const bool plus_live = spec.theta && h > spec.theta->h_star;
    for (int j = 0; j < L; ++j)
      for (int a = 0; a < spec.A; ++a) {
        if (spec.theta) p.set_transition(h, ep[j], a, term[j], 1.0);
        p.set_transition(h, em[j], a, term[j], 1.0);
        p.set_transition(h, term[j], a, term[j], 1.0);
        const bool reveal = reveal_step && a == 0;
        p.set_transition(h, sm[j], a, reveal ? em[j] : sm[j], 1.0);
        if (!plus_live) continue;
        if (reveal)
          p.set_transition(h, sp[j], a, ep[j], 1.0);
        else
          p.set_transition(h, sp[j], a, a == password_at(spec, h) ? sp[j] : sm[j], 1.0);
      }
  }
  p.validate();
  return {spec, p, make_meta(spec, p)};
}

HardInstance build_instance(const HardInstanceSpec& spec) {
  switch (spec.family) {
    case Family::SingleStepPac: return build_single_step(spec);
    case Family::MultiStepRegret: return build_multistep_regret(spec);
    case Family::MultiStepPac: return build_multistep_pac(spec);
  }
  throw ParameterError("unknown family");
}

double closed_form_optimal_value(const HardInstanceSpec& spec) {
  return spec.is_null() ? (1.0 + spec.eps) / 4.0 : (1.0 + 2.0 * spec.eps) / 4.0;
}

std::vector<int> optimal_action_sequence(const HardInstanceSpec& spec) {
  std::vector<int> seq(spec.H, 0);
  if (spec.is_null()) return seq;
  const auto& t = *spec.theta;
  const auto route = route_to_leaf(spec.n, t.leaf);
  std::copy(route.begin(), route.end(), seq.begin());
  seq[t.h_star - 1] = t.entry_action;
  for (size_t i = 0; i < t.password.size(); ++i) seq[t.h_star + i] = t.password[i];
  return seq;
}

PolicyPtr optimal_policy(const HardInstanceSpec& spec) {
  return std::make_shared<ActionSequencePolicy>(spec.A, optimal_action_sequence(spec));
}

namespace {

// Number of admissible passwords for a given h_star.
std::uint64_t password_count(const HardInstanceSpec& spec, int h_star) {
  std::uint64_t c = 1;
  for (int h = h_star + 1; h <= spec.H - 1; ++h) c *= password_choices(spec, h).size();
  return c;
}

std::uint64_t per_h_star(const HardInstanceSpec& spec) {
  std::uint64_t c = static_cast<std::uint64_t>(num_leaves(spec.n)) * (spec.A - 1);
  if (spec.family == Family::MultiStepRegret) c *= reveal_actions(spec).size();
  return c;
}

}  // namespace

std::uint64_t count_theta(const HardInstanceSpec& tmpl) {
  std::uint64_t total = 0;
  for (int hs : valid_h_star(tmpl)) total += per_h_star(tmpl) * password_count(tmpl, hs);
  return total;
}

double log_cardinality_bound(const HardInstanceSpec& spec) {
  const int S = (1 << spec.n) - 1 +
                (spec.family == Family::SingleStepPac     ? 2
                 : spec.family == Family::MultiStepRegret ? 5
                                                          : 5 * spec.L);
  const double signs = (spec.family == Family::MultiStepPac ? spec.L * spec.K : spec.K);
  return signs * std::log(2.0) + spec.H * std::log(static_cast<double>(spec.A)) +
         std::log(static_cast<double>(S) * spec.A * spec.H);
}

std::vector<int> sample_mu(int length, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> mu(length);
  for (int& v : mu) v = (rng() >> 63) ? 1 : -1;
  return mu;
}

FamilyEnumerator::FamilyEnumerator(HardInstanceSpec tmpl, bool enumerate_mu, std::uint64_t mu_seed,
                                   std::uint64_t cap)
    : tmpl_(std::move(tmpl)), enumerate_mu_(enumerate_mu), mu_seed_(mu_seed) {
  tmpl_.theta.reset();
  mu_len_ = (tmpl_.family == Family::MultiStepPac ? tmpl_.L : 1) * tmpl_.K;
  if (tmpl_.mu.empty()) tmpl_.mu = sample_mu(mu_len_, mu_seed_);
  validate_spec(tmpl_);
  theta_count_ = count_theta(tmpl_);
  if (enumerate_mu_) {
    if (mu_len_ > 40) throw BudgetError("cannot enumerate 2^" + std::to_string(mu_len_) + " sign vectors");
    mu_count_ = std::uint64_t{1} << mu_len_;
  }
  size_ = 1 + theta_count_ * mu_count_;
  if (enumerate_mu_ && size_ > cap)
    throw BudgetError("family has " + std::to_string(size_) +
                      " members, above the iteration cap; sample mu instead");
}

HiddenParams FamilyEnumerator::theta_at(std::uint64_t index) const {
  const std::uint64_t block = per_h_star(tmpl_);
  const auto rev = reveal_actions(tmpl_);
  for (int hs : valid_h_star(tmpl_)) {
    const std::uint64_t here = block * password_count(tmpl_, hs);
    if (index >= here) {
      index -= here;
      continue;
    }
    HiddenParams t;
    t.h_star = hs;
    // Layout within an h_star block: leaf, entry action, reveal action, password.
    const std::uint64_t pw = password_count(tmpl_, hs);
    std::uint64_t pw_idx = index % pw;
    index /= pw;
    if (tmpl_.family == Family::MultiStepRegret) {
      t.reveal_action = rev[index % rev.size()];
      index /= rev.size();
    }
    t.entry_action = 1 + static_cast<int>(index % (tmpl_.A - 1));
    index /= (tmpl_.A - 1);
    t.leaf = static_cast<int>(index);
    t.password.assign(tmpl_.H - hs - 1, 0);
    for (int h = tmpl_.H - 1; h >= hs + 1; --h) {
      const auto ch = password_choices(tmpl_, h);
      t.password[h - hs - 1] = ch[pw_idx % ch.size()];
      pw_idx /= ch.size();
    }
    return t;
  }
  throw std::out_of_range("theta index out of range");
}

HardInstanceSpec FamilyEnumerator::at(std::uint64_t index) const {
  if (index >= size_) throw std::out_of_range("family index out of range");
  HardInstanceSpec spec = tmpl_;
  if (index == 0) return spec;
  const std::uint64_t k = index - 1;
  const std::uint64_t theta_idx = k / mu_count_;
  spec.theta = theta_at(theta_idx);
  if (enumerate_mu_) {
    const std::uint64_t bits = k % mu_count_;
    for (int i = 0; i < mu_len_; ++i) spec.mu[i] = ((bits >> i) & 1) ? -1 : 1;
  }
  return spec;
}

double FamilyEnumerator::log_cardinality() const {
  return std::log1p(static_cast<double>(theta_count_) * std::pow(2.0, mu_len_));
}

bool stays_at_root(const HardInstanceSpec& spec, const Trajectory& t) {
  return t.obs[spec.H - 1] == 0;
}

bool takes_reveal(const HardInstanceSpec& spec, const Trajectory& t) {
  const int tree = (1 << spec.n) - 1;
  const int lock = tree + 2 * spec.K;  // first extra observation in both multi-step layouts
  const auto rev = reveal_actions(spec);
  for (int h : reveal_steps(spec)) {
    const int o = t.obs[h - 1], a = t.act[h - 1];
    bool at_lock = false;
    if (spec.family == Family::MultiStepRegret) at_lock = (o == lock);
    if (spec.family == Family::MultiStepPac)
      at_lock = o >= lock + 3 && (o - lock - 3) % 2 == 0;  // lock:j
    if (at_lock && std::find(rev.begin(), rev.end(), a) != rev.end()) return true;
  }
  return false;
}

}  // namespace revlab

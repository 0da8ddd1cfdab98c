#include "revlab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "revlab/serialize.hpp"

namespace revlab {

// ---------------------------------------------------------------------------
// Environment and referee

Environment::Environment(TabularPOMDP model, HardInstanceSpec public_spec, std::uint64_t seed,
                         bool trace_latent)
    : sampler_(std::move(model)), public_(std::move(public_spec)), rng_(seed),
      trace_latent_(trace_latent) {
  if (public_.theta) throw ParameterError("the public spec must not carry the hidden parameter");
  public_.mu.clear();
}

Trajectory Environment::run(const PolicyPtr& pi) {
  Trajectory t;
  run_into(pi, t);
  return t;
}

void Environment::run_into(const PolicyPtr& pi, Trajectory& out) {
  sampler_.sample_into(*pi, rng_, out, trace_latent_);
  for (std::size_t i = 0; i < events_.size(); ++i)
    if (events_[i].second(out)) ++event_counts_[i];
  out.latent.clear();
  ++episodes_;
  if (!log_.empty() && log_.back().first == pi)
    ++log_.back().second;
  else
    log_.emplace_back(pi, 1);
}

std::unique_ptr<Environment> make_environment(const HardInstance& inst, std::uint64_t seed,
                                              bool trace_latent) {
  HardInstanceSpec pub = inst.spec;
  pub.theta.reset();
  pub.mu.clear();
  return std::make_unique<Environment>(inst.pomdp, pub, seed, trace_latent);
}

Referee::Referee(Environment& env, double optimal_value) : env_(env), vstar_(optimal_value) {}

void Referee::declare_event(const std::string& name, std::function<bool(const Trajectory&)> pred) {
  env_.events_.emplace_back(name, std::move(pred));
  env_.event_counts_.push_back(0);
}

std::map<std::string, std::size_t> Referee::event_counts() const {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < env_.events_.size(); ++i)
    out[env_.events_[i].first] = env_.event_counts_[i];
  return out;
}

double Referee::value_of(const PolicyPtr& pi) {
  auto it = cache_.find(pi.get());
  if (it != cache_.end()) return it->second;
  const double v = policy_value(model(), *pi);
  cache_[pi.get()] = v;
  return v;
}

std::vector<double> Referee::regret_trace() {
  std::vector<double> out;
  out.reserve(env_.episodes_);
  for (const auto& [pi, count] : env_.log_) {
    double r = vstar_ - value_of(pi);
    if (r < 0 && r > -1e-9) r = 0;
    out.insert(out.end(), count, r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

void write_learner_report(std::ostream& out, const LearnerReport& r) {
  out << "format revlab-learner-report\nversion 1\n";
  out << "algorithm " << r.algorithm << "\n";
  out << "episodes " << r.episodes << "\n";
  out << "verdict " << r.verdict << "\n";
  if (r.recovered) {
    const auto& t = *r.recovered;
    out << "recovered h_star " << t.h_star << " leaf " << t.leaf << " entry " << t.entry_action
        << " reveal " << t.reveal_action << " password";
    for (int a : t.password) out << ' ' << a;
    out << "\n";
  } else {
    out << "recovered none\n";
  }
  out << "output_actions";
  for (int a : r.output_actions) out << ' ' << a;
  out << "\n";
  for (const auto& [k, v] : r.stats) out << "stat " << k << ' ' << format_double(v) << "\n";
  for (const auto& [k, v] : r.events) out << "event " << k << ' ' << v << "\n";
  double total = 0;
  for (double x : r.regret) total += x;
  out << "regret_total " << format_double(total) << "\n";
  out << "end\n";
}

void write_regret_csv(std::ostream& out, const std::vector<double>& regret) {
  out << "episode,instantaneous,cumulative\n";
  double cum = 0;
  for (std::size_t i = 0; i < regret.size(); ++i) {
    cum += regret[i];
    out << (i + 1) << ',' << format_double(regret[i]) << ',' << format_double(cum) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Uniformity testing

long CollisionTester::batch_min() const {
  if (!(far_tv > 0 && far_tv < 1)) throw ParameterError("far_tv in (0, 1)");
  if (domain < 2) throw ParameterError("domain >= 2");
  return static_cast<long>(std::ceil(c_test * std::sqrt(static_cast<double>(domain)) /
                                     (far_tv * far_tv)));
}

namespace {

// P(Bin(k, p) >= (k+1)/2) for odd k.
double median_tail(int k, double p) {
  if (p <= 0) return 0;
  if (p >= 1) return 1;
  double total = 0;
  for (int j = (k + 1) / 2; j <= k; ++j)
    total += std::exp(std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0) +
                      j * std::log(p) + (k - j) * std::log1p(-p));
  return std::min(total, 1.0);
}

double collision_rate(const int* s, long b, std::vector<long>& cnt) {
  std::fill(cnt.begin(), cnt.end(), 0);
  for (long i = 0; i < b; ++i) ++cnt[s[i]];
  double pairs = 0;
  for (long c : cnt) pairs += 0.5 * static_cast<double>(c) * static_cast<double>(c - 1);
  return pairs / (0.5 * static_cast<double>(b) * static_cast<double>(b - 1));
}

}  // namespace

UniformityVerdict CollisionTester::test(const std::vector<int>& samples) const {
  const long need = batch_min();
  const long N = static_cast<long>(samples.size());
  if (N < std::max(need, 2L))
    throw BudgetError("uniformity test needs " + std::to_string(std::max(need, 2L)) +
                      " samples, got " + std::to_string(N));
  for (int s : samples)
    if (s < 0 || s >= domain) throw ParameterError("sample outside the test domain");

  const double n = domain;
  const double gap = 2.0 * far_tv * far_tv / n;
  int best_k = 1;
  double best_bound = std::numeric_limits<double>::infinity();
  long kmax = std::min<long>(N / std::max(need, 2L), 201);
  if (max_batches > 0) kmax = std::min<long>(kmax, max_batches);
  for (long k = 1; k <= kmax; k += 2) {
    const double b = static_cast<double>(N / k);
    const double var = (1.0 / n - 1.0 / (n * n)) / (0.5 * b * (b - 1.0));
    const double p = var / (var + gap * gap);
    const double bound = median_tail(static_cast<int>(k), p);
    if (bound < best_bound - 1e-15) {
      best_bound = bound;
      best_k = static_cast<int>(k);
    }
  }

  std::vector<long> cnt(domain);
  const double thr = (1.0 + 2.0 * far_tv * far_tv) / n;
  UniformityVerdict v;
  v.batches = best_k;
  v.threshold = 1.0 + 2.0 * far_tv * far_tv;
  v.statistic = collision_rate(samples.data(), N, cnt) * n;
  if (best_k == 1) {
    v.far = v.statistic / n > thr;
    return v;
  }
  const long b = N / best_k;
  int far = 0;
  for (int i = 0; i < best_k; ++i)
    if (collision_rate(samples.data() + i * b, b, cnt) > thr) ++far;
  v.far = far > best_k / 2;
  return v;
}

namespace {

std::vector<int> draw_from(const std::vector<double>& p, long n, Rng& rng) {
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  std::vector<int> out(n);
  for (auto& x : out) {
    const double u = uniform01(rng) * cdf.back();
    x = static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (x >= static_cast<int>(p.size())) x = static_cast<int>(p.size()) - 1;
  }
  return out;
}

}  // namespace

std::vector<int> draw_uniform_samples(int domain, long n, Rng& rng) {
  std::vector<int> out(n);
  for (auto& x : out) x = static_cast<int>(uniform01(rng) * domain);
  return out;
}

std::vector<int> draw_perturbed_samples(int domain, double tv, const std::vector<int>& mu, long n,
                                        Rng& rng) {
  if (domain % 2 != 0 || static_cast<int>(mu.size()) != domain / 2)
    throw ParameterError("perturbed draws need an even domain and one sign per pair");
  std::vector<double> p(domain);
  for (int i = 0; i < domain / 2; ++i) {
    p[2 * i] = (1.0 + 2.0 * tv * mu[i]) / domain;
    p[2 * i + 1] = (1.0 - 2.0 * tv * mu[i]) / domain;
  }
  return draw_from(p, n, rng);
}

// ---------------------------------------------------------------------------
// Brute-force learner

namespace {

struct Cell {
  int h = 0, leaf = 0, entry = 1, reveal = 0;
  std::vector<int> seq;  // actions after the entry step
  bool tail = false;     // judged by the terminal reward instead of a reveal
};

struct FamilyView {
  HardInstanceSpec spec;
  int tree = 0, sig0 = 0, lock = 0, good = 0;
  int domain = 0;
  std::vector<int> reveals;

  bool single = false;
  int window = 1;  // password actions added per stage-2 round

  explicit FamilyView(const HardInstanceSpec& s) : spec(s) {
    single = s.family == Family::SingleStepPac;
    window = single ? 1 : s.m;
    tree = (1 << s.n) - 1;
    sig0 = tree;
    lock = tree + 2 * s.K;
    good = lock + 1;
    domain = 2 * s.K * (s.family == Family::MultiStepPac ? s.L : 1);
    reveals = reveal_actions(s);
  }

  // Open-loop actions: route to the leaf, wait, enter, follow `seq`, then
  // reveal (unless tail), then wait.
  std::vector<int> actions(const Cell& c, const std::vector<int>& prefix) const {
    std::vector<int> a(spec.H, 0);
    const auto route = route_to_leaf(spec.n, c.leaf);
    std::copy(route.begin(), route.end(), a.begin());
    a[c.h - 1] = c.entry;
    int t = c.h + 1;
    for (int x : prefix) a[t++ - 1] = x;
    for (int x : c.seq) a[t++ - 1] = x;
    if (!c.tail && !single) a[t - 1] = c.reveal;
    return a;
  }

  std::vector<int> entry_steps() const { return single ? valid_h_star(spec) : reveal_steps(spec); }

  // Symbol seen after the cell's last action at step r: the signal o_{r+1},
  // paired with the lock observation o_r in the multi-step families.
  int symbol(const Trajectory& tr, int r) const {
    const int o2 = tr.obs[r] - sig0;
    if (o2 < 0 || o2 >= 2 * spec.K) return -1;
    if (single) return o2;
    if (spec.family == Family::MultiStepRegret) return tr.obs[r - 1] == lock ? o2 : -1;
    const int j2 = tr.obs[r - 1] - (lock + 3);  // lock:j sits at lock+3+2j
    if (j2 < 0 || j2 % 2 != 0 || j2 / 2 >= spec.L) return -1;
    return (j2 / 2) * 2 * spec.K + o2;
  }
};

// All sequences with position i drawn from choices[i].
std::vector<std::vector<int>> product(const std::vector<std::vector<int>>& choices) {
  std::vector<std::vector<int>> out{{}};
  for (const auto& ch : choices) {
    std::vector<std::vector<int>> next;
    for (const auto& p : out)
      for (int a : ch) {
        auto q = p;
        q.push_back(a);
        next.push_back(std::move(q));
      }
    out.swap(next);
  }
  return out;
}

std::vector<Cell> stage1_cells(const FamilyView& v) {
  const auto& s = v.spec;
  std::vector<Cell> cells;
  for (int h : v.entry_steps()) {
    const bool tail = h + v.window >= s.H;
    const int len = tail ? s.H - 1 - h : v.window - 1;
    std::vector<std::vector<int>> choices;
    for (int t = h + 1; t <= h + len; ++t) choices.push_back(password_choices(s, t));
    const auto seqs = product(choices);
    for (int leaf = 0; leaf < num_leaves(s.n); ++leaf)
      for (int a = 1; a < s.A; ++a)
        for (int r : tail || v.single ? std::vector<int>{0} : v.reveals)
          for (const auto& q : seqs) {
            Cell c;
            c.h = h;
            c.leaf = leaf;
            c.entry = a;
            c.reveal = r;
            c.seq = q;
            c.tail = tail;
            cells.push_back(std::move(c));
          }
  }
  return cells;
}

long stage2_upper(const FamilyView& v) {
  const auto& s = v.spec;
  const long segs = (s.H + v.window - 1) / v.window + 1;
  long per = 1;
  for (int i = 0; i < v.window; ++i) per *= s.A;
  return segs * per;
}

struct CellResult {
  bool far = false;
  double score = 0;
};

class Explorer {
 public:
  Explorer(Environment& env, const FamilyView& v, const BruteForcePlan& plan,
           const BruteForceOptions& opt)
      : env_(env), v_(v), plan_(plan), max_episodes_(opt.max_episodes) {
    tester_.domain = v.domain;
    tester_.far_tv = v.spec.sigma * v.spec.eps / 2.0;
    tester_.c_test = opt.c_test;
    tester_.max_batches = opt.max_batches;
  }

  bool exhausted(long n) const {
    return max_episodes_ > 0 && static_cast<long>(env_.episodes()) + n > max_episodes_;
  }

  CellResult run(const Cell& c, const std::vector<int>& prefix) {
    const auto acts = v_.actions(c, prefix);
    const PolicyPtr pi = std::make_shared<ActionSequencePolicy>(v_.spec.A, acts);
    CellResult res;
    if (c.tail) {
      long good = 0;
      for (long i = 0; i < plan_.n_tail; ++i) {
        env_.run_into(pi, tr_);
        good += tr_.obs[v_.spec.H - 1] == v_.good;
      }
      const double rate = static_cast<double>(good) / plan_.n_tail;
      const double thr = 0.25 + v_.spec.eps / 4.0;
      res.far = rate > thr;
      res.score = rate / thr;
      return res;
    }
    const int r = c.h + static_cast<int>(prefix.size() + c.seq.size()) + (v_.single ? 0 : 1);
    samples_.clear();
    bool stray = false;
    for (long i = 0; i < plan_.n1; ++i) {
      env_.run_into(pi, tr_);
      const int sym = v_.symbol(tr_, r);
      if (sym < 0)
        stray = true;
      else
        samples_.push_back(sym);
    }
    if (stray || static_cast<long>(samples_.size()) < 2) return res;
    const auto verdict = tester_.test(samples_);
    res.far = verdict.far;
    res.score = verdict.statistic / verdict.threshold;
    return res;
  }

 private:
  Environment& env_;
  const FamilyView& v_;
  BruteForcePlan plan_;
  long max_episodes_;
  CollisionTester tester_;
  Trajectory tr_;
  std::vector<int> samples_;
};

}  // namespace

BruteForcePlan plan_bruteforce(const HardInstanceSpec& public_spec, const BruteForceOptions& opt) {
  const FamilyView v(public_spec);
  BruteForcePlan p;
  p.stage1_cells = static_cast<long>(stage1_cells(v).size());
  p.tests = p.stage1_cells + stage2_upper(v);
  const double lg = std::log(static_cast<double>(p.tests) / opt.delta);
  const double KL = public_spec.K * (public_spec.family == Family::MultiStepPac ? public_spec.L : 1);
  const double se = public_spec.sigma * public_spec.eps;
  p.n1 = opt.cell_budget > 0 ? opt.cell_budget
                              : static_cast<long>(std::ceil(opt.c * std::sqrt(KL) / (se * se) * lg));
  p.n_tail = opt.tail_budget > 0
                 ? opt.tail_budget
                 : static_cast<long>(std::ceil(8.0 / (public_spec.eps * public_spec.eps) * lg));
  return p;
}

LearnerReport bruteforce_learn(Environment& env, const BruteForceOptions& opt) {
  const HardInstanceSpec& pub = env.public_spec();
  const FamilyView v(pub);
  const BruteForcePlan plan = plan_bruteforce(pub, opt);
  Explorer ex(env, v, plan, opt);

  LearnerReport rep;
  rep.algorithm = "bruteforce";
  rep.stats["n1"] = static_cast<double>(plan.n1);
  rep.stats["n_tail"] = static_cast<double>(plan.n_tail);
  rep.stats["tests"] = static_cast<double>(plan.tests);
  rep.stats["stage1_cells"] = static_cast<double>(plan.stage1_cells);
  const std::size_t start = env.episodes();

  auto finish_null = [&](const std::string& verdict) {
    rep.verdict = verdict;
    rep.output_actions.assign(pub.H, 0);
    rep.output = std::make_shared<ActionSequencePolicy>(pub.A, rep.output_actions);
    rep.episodes = env.episodes() - start;
    return rep;
  };

  // Stage 1.
  const auto cells = stage1_cells(v);
  int best = -1, far_cells = 0;
  double best_score = -1;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (ex.exhausted(cells[i].tail ? plan.n_tail : plan.n1)) return finish_null("incomplete");
    const auto r = ex.run(cells[i], {});
    if (!r.far) continue;
    ++far_cells;
    if (r.score > best_score) {
      best_score = r.score;
      best = static_cast<int>(i);
    }
  }
  rep.stats["stage1_far_cells"] = far_cells;
  if (best < 0) return finish_null("null");

  const Cell found = cells[best];
  HiddenParams theta;
  theta.h_star = found.h;
  theta.leaf = found.leaf;
  theta.entry_action = found.entry;
  theta.reveal_action = pub.family == Family::MultiStepRegret ? found.reveal : 0;
  std::vector<int> pw = found.seq;

  // Stage 2: extend the password m actions at a time, then finish with the
  // reward tail.
  int fallbacks = 0;
  if (!found.tail) {
    int cur = found.h + v.window;
    auto pick = [&](int len, bool tail) {
      std::vector<std::vector<int>> choices;
      for (int t = cur; t < cur + len; ++t) choices.push_back(password_choices(pub, t));
      int bi = -1;
      bool bfar = false;
      double bs = -1;
      const auto cands = product(choices);
      for (std::size_t i = 0; i < cands.size(); ++i) {
        Cell c = found;
        c.seq = cands[i];
        c.tail = tail;
        if (ex.exhausted(tail ? plan.n_tail : plan.n1)) return std::vector<int>{};
        const auto r = ex.run(c, pw);
        // Far candidates beat near ones; the score breaks ties within each.
        if ((r.far && !bfar) || (r.far == bfar && r.score > bs)) {
          bi = static_cast<int>(i);
          bfar = r.far;
          bs = r.score;
        }
      }
      if (!bfar) ++fallbacks;
      return cands[bi];
    };
    while (cur + v.window < pub.H) {
      const auto seg = pick(v.window, false);
      if (seg.empty()) return finish_null("incomplete");
      pw.insert(pw.end(), seg.begin(), seg.end());
      cur += v.window;
    }
    const auto seg = pick(pub.H - cur, true);
    if (seg.empty()) return finish_null("incomplete");
    pw.insert(pw.end(), seg.begin(), seg.end());
  }
  rep.stats["stage2_fallbacks"] = fallbacks;
  theta.password = pw;

  HardInstanceSpec guess = pub;
  guess.theta = theta;
  rep.verdict = "found";
  rep.recovered = theta;
  rep.output_actions = optimal_action_sequence(guess);
  rep.output = std::make_shared<ActionSequencePolicy>(pub.A, rep.output_actions);
  rep.episodes = env.episodes() - start;
  return rep;
}

// ---------------------------------------------------------------------------
// OMLE

std::vector<ModelEntry> hard_family_class(const HardInstanceSpec& tmpl, std::uint64_t mu_seed) {
  FamilyEnumerator fam(tmpl, false, mu_seed);
  std::vector<ModelEntry> out;
  out.reserve(fam.size());
  for (std::uint64_t i = 0; i < fam.size(); ++i) {
    const auto spec = fam.at(i);
    auto inst = build_instance(spec);
    ModelEntry e;
    e.label = i == 0 ? "null" : "member:" + std::to_string(i);
    e.optimal_value = inst.meta.optimal_value;
    e.optimal_policy = optimal_policy(spec);
    e.model = std::move(inst.pomdp);
    out.push_back(std::move(e));
  }
  return out;
}

double log_likelihood(const TabularPOMDP& model, const Trajectory& t) {
  return observation_log_prob(model, t.obs, t.act);
}

double omle_beta(std::size_t class_size, const OmleOptions& opt) {
  if (opt.beta > 0) return opt.beta;
  return opt.C * std::log(static_cast<double>(class_size) / opt.delta);
}

LearnerReport omle(const std::vector<ModelEntry>& model_class, Environment& env, long T,
                   const OmleOptions& opt,
                   const std::function<void(long, const std::vector<char>&)>& audit) {
  if (model_class.empty()) throw ParameterError("OMLE needs a non-empty model class");
  const std::size_t n = model_class.size();
  const double beta = omle_beta(n, opt);
  std::vector<double> ll(n, 0.0);
  std::vector<char> active(n, 1);
  LearnerReport rep;
  rep.algorithm = "omle";
  rep.stats["beta"] = beta;
  const std::size_t start = env.episodes();
  Trajectory tr;
  std::size_t chosen = 0;

  for (long k = 0; k < T; ++k) {
    // Optimistic choice; ties go to the larger likelihood, then the lower index.
    bool have = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      if (!have) {
        chosen = i;
        have = true;
        continue;
      }
      const auto& a = model_class[i];
      const auto& b = model_class[chosen];
      if (a.optimal_value > b.optimal_value + 1e-12 ||
          (std::abs(a.optimal_value - b.optimal_value) <= 1e-12 && ll[i] > ll[chosen]))
        chosen = i;
    }
    env.run_into(model_class[chosen].optimal_policy, tr);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isinf(ll[i]) && ll[i] < 0) continue;
      ll[i] += log_likelihood(model_class[i].model, tr);
      best = std::max(best, ll[i]);
    }
    if (std::isinf(best)) throw PreconditionError("no model in the class explains the data");
    for (std::size_t i = 0; i < n; ++i) active[i] = !std::isinf(ll[i]) && ll[i] >= best - beta;
    if (audit) audit(k, active);
  }

  rep.verdict = "exploit";
  rep.output = model_class[chosen].optimal_policy;
  if (const auto* seq = rep.output->action_sequence()) rep.output_actions = *seq;
  rep.episodes = env.episodes() - start;
  std::size_t alive = 0;
  for (char c : active) alive += c;
  rep.stats["final_active"] = static_cast<double>(alive);
  return rep;
}

// ---------------------------------------------------------------------------
// Baselines

LearnerReport explore_then_exploit(Environment& env, long T, double split, BruteForceOptions opt) {
  if (!(split > 0 && split < 1)) throw ParameterError("split in (0, 1)");
  const HardInstanceSpec& pub = env.public_spec();
  const long explore = static_cast<long>(std::ceil(split * T));
  const BruteForcePlan base = plan_bruteforce(pub, opt);
  const long cells = base.stage1_cells + stage2_upper(FamilyView(pub));
  const std::size_t start = env.episodes();
  LearnerReport rep;
  if (opt.cell_budget <= 0) opt.cell_budget = explore / cells;
  if (opt.tail_budget <= 0) opt.tail_budget = opt.cell_budget;
  opt.max_episodes = static_cast<long>(start) + explore;
  bool explored = false;
  if (opt.cell_budget >= 2) {
    try {
      rep = bruteforce_learn(env, opt);
      explored = true;
    } catch (const BudgetError&) {
    }
  }
  if (!explored || !rep.output) {
    rep.verdict = "null";
    rep.output_actions.assign(pub.H, 0);
    rep.output = std::make_shared<ActionSequencePolicy>(pub.A, rep.output_actions);
  }
  rep.algorithm = "explore-then-exploit";
  rep.stats["explore_budget"] = static_cast<double>(explore);
  rep.stats["cell_budget"] = static_cast<double>(opt.cell_budget);
  Trajectory tr;
  while (static_cast<long>(env.episodes() - start) < T) env.run_into(rep.output, tr);
  rep.episodes = env.episodes() - start;
  return rep;
}

LearnerReport always_explore(Environment& env, long T) {
  const FamilyView v(env.public_spec());
  const auto cells = stage1_cells(v);
  std::vector<PolicyPtr> pols;
  for (const auto& c : cells)
    pols.push_back(std::make_shared<ActionSequencePolicy>(v.spec.A, v.actions(c, {})));
  const std::size_t start = env.episodes();
  Trajectory tr;
  for (long k = 0; k < T; ++k) env.run_into(pols[k % pols.size()], tr);
  LearnerReport rep;
  rep.algorithm = "always-explore";
  rep.verdict = "explore";
  rep.output = pols.back();
  rep.episodes = env.episodes() - start;
  return rep;
}

LearnerReport uniform_random(Environment& env, long T) {
  const PolicyPtr pi = std::make_shared<UniformPolicy>(env.num_actions());
  const std::size_t start = env.episodes();
  Trajectory tr;
  for (long k = 0; k < T; ++k) env.run_into(pi, tr);
  LearnerReport rep;
  rep.algorithm = "uniform-random";
  rep.verdict = "explore";
  rep.output = pi;
  rep.episodes = env.episodes() - start;
  return rep;
}

}  // namespace revlab

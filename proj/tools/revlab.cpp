// Command-line front end: gen, analyze, certify, learn, diverge, exp.

#include <chrono>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "revlab/divergence.hpp"
#include "revlab/errors.hpp"
#include "revlab/experiments.hpp"
#include "revlab/hard_instances.hpp"
#include "revlab/learners.hpp"
#include "revlab/psr.hpp"
#include "revlab/revealing.hpp"
#include "revlab/serialize.hpp"

using namespace revlab;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  std::string out;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::size_t cap = kDefaultEnumerationCap;
};

// Instance selection shared by most subcommands.
struct InstanceArgs {
  std::string spec_file;
  std::string model_file;
  std::string family = "single-step-pac";
  double eps = 0.1, sigma = 0.5;
  int n = 1, m = 1, K = 1, L = 1, H = 4, A = 3;
  bool unchecked = false;
  long member = -1;  // -1 = reference model
  std::uint64_t mu_seed = 0;

  void attach(CLI::App* app, bool allow_model) {
    app->add_option("--spec", spec_file, "JSON instance spec (overrides the flags below)");
    if (allow_model) app->add_option("--model", model_file, "POMDP text file");
    app->add_option("--family", family, "single-step-pac | multi-step-regret | multi-step-pac");
    app->add_option("--eps", eps);
    app->add_option("--sigma", sigma);
    app->add_option("--depth", n, "tree depth");
    app->add_option("--window", m, "window of the multi-step families");
    app->add_option("-K", K);
    app->add_option("-L", L, "lock count");
    app->add_option("-H", H, "horizon");
    app->add_option("-A", A, "action count");
    app->add_flag("--unchecked", unchecked, "skip the largeness constraints");
    app->add_option("--member", member, "family member index; omit for the reference model");
    app->add_option("--mu-seed", mu_seed, "seed of the fixed sign vector");
  }

  HardInstanceSpec spec() const {
    Json j;
    if (!spec_file.empty()) {
      std::ifstream f(spec_file);
      if (!f) throw ConfigError("cannot open " + spec_file);
      j = Json::parse(f);
    } else {
      j = {{"family", family}, {"eps", eps}, {"sigma", sigma}, {"n", n}, {"m", m}, {"K", K},
           {"L", L}, {"H", H}, {"A", A}, {"unchecked", unchecked}, {"mu_seed", mu_seed}};
      if (member >= 0) j["member"] = member;
    }
    return spec_from_json(j);
  }
};

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot write " + path);
    }
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void print_meta(std::ostream& out, const HardInstance& inst) {
  out << "# family " << family_name(inst.spec.family) << " null " << inst.spec.is_null()
      << " states " << inst.meta.num_states << " observations " << inst.meta.num_observations
      << " window " << inst.meta.revealing_window << " bound "
      << format_double(inst.meta.revealing_bound) << " optimal-value "
      << format_double(inst.meta.optimal_value) << "\n";
}

int cmd_gen(const Globals& g, const InstanceArgs& ia, bool describe) {
  const auto inst = build_instance(ia.spec());
  Sink sink(g.out);
  save_pomdp(sink.get(), inst.pomdp);
  if (describe) print_meta(std::cerr, inst);
  return 0;
}

TabularPOMDP load_or_build(const InstanceArgs& ia, HardInstance* inst_out = nullptr) {
  if (!ia.model_file.empty()) return load_pomdp_file(ia.model_file);
  auto inst = build_instance(ia.spec());
  if (inst_out) *inst_out = inst;
  return inst.pomdp;
}

int cmd_analyze(const Globals& g, const InstanceArgs& ia, int h, int m) {
  const auto p = load_or_build(ia);
  const auto M = emission_action_matrix(p, h, m, g.cap);
  Sink sink(g.out);
  auto& out = sink.get();
  out << "block,row";
  for (int s = 0; s < p.num_states(); ++s) out << ',' << p.state_labels()[s];
  out << '\n';
  const int bs = M.block_size();
  for (long r = 0; r < M.mat.rows(); ++r) {
    out << r / bs << ',' << r % bs;
    for (long c = 0; c < M.mat.cols(); ++c) out << ',' << format_double(M.mat(r, c));
    out << '\n';
  }
  return 0;
}

int cmd_certify(const Globals& g, const InstanceArgs& ia, int window, bool matrices,
                bool stability, int random_probes) {
  HardInstance inst;
  const bool from_family = ia.model_file.empty();
  const auto p = load_or_build(ia, &inst);
  const int w = window > 0 ? window : (from_family ? inst.meta.revealing_window : 1);
  const double bound =
      from_family ? inst.meta.revealing_bound : std::numeric_limits<double>::infinity();
  const auto set = certify(p, w);
  Sink sink(g.out);
  write_certificates(sink.get(), set, bound, matrices);
  if (stability && set.valid) {
    const auto brep = build_brep(p, w, set.steps);
    const auto probes = default_probes(brep, p, random_probes, g.seed);
    write_stability_report(sink.get(), check_b_stability(brep, set.inverse_alpha, probes));
  }
  return set.valid && set.inverse_alpha <= bound + kResidualTol ? 0 : 1;
}

struct LearnArgs {
  std::string algorithm = "bruteforce";
  long T = 1000;
  double split = 0.1;
  BruteForceOptions bf;
  OmleOptions omle;
  std::string regret_csv;
};

int cmd_learn(const Globals& g, const InstanceArgs& ia, const LearnArgs& la) {
  const auto spec = ia.spec();
  const auto inst = build_instance(spec);
  auto env = make_environment(inst, g.seed);
  Referee ref(*env, inst.meta.optimal_value);
  if (spec.family == Family::MultiStepRegret)
    ref.declare_event("reveal", [spec](const Trajectory& t) { return takes_reveal(spec, t); });
  if (spec.family == Family::SingleStepPac)
    ref.declare_event("stay", [spec](const Trajectory& t) { return stays_at_root(spec, t); });

  LearnerReport rep;
  if (la.algorithm == "bruteforce") {
    rep = bruteforce_learn(*env, la.bf);
  } else if (la.algorithm == "omle") {
    auto tmpl = spec;
    tmpl.theta.reset();
    const auto cls = hard_family_class(tmpl, ia.mu_seed);
    rep = omle(cls, *env, la.T, la.omle);
  } else if (la.algorithm == "explore-then-exploit") {
    rep = explore_then_exploit(*env, la.T, la.split, la.bf);
  } else if (la.algorithm == "always-explore") {
    rep = always_explore(*env, la.T);
  } else if (la.algorithm == "random") {
    rep = uniform_random(*env, la.T);
  } else {
    throw ConfigError("unknown algorithm " + la.algorithm);
  }
  rep.regret = ref.regret_trace();
  rep.events = ref.event_counts();
  Sink sink(g.out);
  write_learner_report(sink.get(), rep);
  if (!la.regret_csv.empty()) {
    std::ofstream f(la.regret_csv);
    write_regret_csv(f, rep.regret);
  }
  return 0;
}

int cmd_diverge(const Globals& g, const InstanceArgs& ia, const std::string& check, int T,
                int pairs) {
  Sink sink(g.out);
  auto& out = sink.get();
  out << "lhs,rhs,gap\n";
  auto row = [&](double lhs, double rhs) {
    out << format_double(lhs) << ',' << format_double(rhs) << ',' << format_double(lhs - rhs)
        << '\n';
  };
  if (check == "inequalities") {
    // One row per pair: 2 tv^2 against KL.
    Rng rng(g.seed);
    for (int i = 0; i < pairs; ++i) {
      const auto [p, q] = random_distribution_pair(2 + static_cast<int>(rng() % 9), rng);
      const auto d = divergences(p, q);
      row(2 * d.tv * d.tv, d.kl);
    }
    return 0;
  }
  const auto spec = ia.spec();
  if (!spec.theta) throw ConfigError("diverge needs a non-null member (--member)");
  if (check == "ingster") {
    std::vector<TabularPOMDP> members;
    const int len = static_cast<int>(spec.mu.size());
    if (len > 12) throw BudgetError("too many sign vectors to mix");
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << len); ++b) {
      auto s = spec;
      for (int i = 0; i < len; ++i) s.mu[i] = (b >> i) & 1 ? -1 : 1;
      members.push_back(build_instance(s).pomdp);
    }
    std::vector<double> prior(members.size(), 1.0 / members.size());
    auto ref_spec = spec;
    ref_spec.theta.reset();
    const auto ref = build_instance(ref_spec).pomdp;
    for (int t = 1; t <= T; ++t) {
      const auto r = ingster_check(members, prior, ref, fixed_schedule({optimal_policy(spec)}), t,
                                   g.cap);
      row(r.lhs, r.rhs);
    }
  } else if (check == "chi2") {
    std::vector<int> other(spec.mu.size(), 1);
    const bool regret = spec.family == Family::MultiStepRegret;
    const auto r = chi2_inner_product_check(spec, other, fixed_schedule({optimal_policy(spec)}), T,
                                            regret ? 0 : T * spec.H, T, g.cap);
    row(r.lhs, r.bound);
  } else if (check == "conditional") {
    std::vector<int> other(spec.mu.size(), 1);
    const auto r = conditional_ratio_check(spec, other, g.cap * 5);
    row(r.max_dev_outside, 0);
    row(r.max_dev_reveal, 0);
    row(r.max_dev_correct, 0);
  } else {
    throw ConfigError("unknown check " + check);
  }
  return 0;
}

int cmd_exp(const Globals& g, const std::string& kind, const std::string& config_file,
            bool seed_given, bool cap_given) {
  std::ifstream f(config_file);
  if (!f) throw ConfigError("cannot open " + config_file);
  Json j = Json::parse(f);
  if (!j.contains("experiment")) j["experiment"] = kind;
  if (j["experiment"] != kind)
    throw ConfigError("config is for '" + j["experiment"].get<std::string>() + "', not '" +
                      kind + "'");
  if (seed_given) j["seed"] = g.seed;
  if (cap_given) j["cap"] = g.cap;
  j["jobs"] = g.jobs;
  const auto cfg = parse_experiment_config(j);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_experiment(cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto rec = persist_run(g.out.empty() ? "results" : g.out, cfg, res, wall);
  std::cout << kind << " " << (res.passed ? "PASS" : "FAIL") << " hash " << rec.hash << " run "
            << rec.run_dir << "\n";
  for (const auto& [k, v] : res.summary) std::cout << "  " << k << " = " << format_double(v) << "\n";
  return res.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"revlab: revealing POMDP laboratory"};
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "base random seed");
  app.add_option("--out", g.out, "output file (or directory for exp)");
  app.add_option("--jobs", g.jobs, "worker threads");
  auto* cap_opt = app.add_option("--cap", g.cap, "enumeration cap");

  InstanceArgs ia;

  auto* gen = app.add_subcommand("gen", "build a hard instance and write it as text");
  bool describe = false;
  ia.attach(gen, false);
  gen->add_flag("--describe", describe, "print metadata to stderr");

  auto* analyze = app.add_subcommand("analyze", "emission-action matrix as CSV");
  int an_h = 1, an_m = 1;
  ia.attach(analyze, true);
  analyze->add_option("--step", an_h, "step h")->required();
  analyze->add_option("--width", an_m, "window width");

  auto* cert = app.add_subcommand("certify", "revealing certificates and B-stability");
  int cert_w = 0, probes = 2;
  bool matrices = false, stability = false;
  ia.attach(cert, true);
  cert->add_option("--width", cert_w, "window (default: the family's)");
  cert->add_flag("--matrices", matrices, "include the inverse matrices");
  cert->add_flag("--stability", stability, "append the B-stability report");
  cert->add_option("--random-probes", probes, "random probes per step");

  auto* learn = app.add_subcommand("learn", "run a learner against a hidden instance");
  LearnArgs la;
  ia.attach(learn, false);
  learn->add_option("--algorithm", la.algorithm,
                    "bruteforce | omle | explore-then-exploit | always-explore | random");
  learn->add_option("-T,--episodes", la.T, "episodes for regret learners");
  learn->add_option("--split", la.split, "exploration fraction for explore-then-exploit");
  learn->add_option("--c", la.bf.c, "budget constant");
  learn->add_option("--c-test", la.bf.c_test, "tester constant");
  learn->add_option("--delta", la.bf.delta, "confidence");
  learn->add_option("--cell-budget", la.bf.cell_budget, "override the stage-1 cell budget");
  learn->add_option("--omle-C", la.omle.C, "confidence radius constant");
  learn->add_option("--omle-delta", la.omle.delta, "confidence");
  learn->add_option("--regret-csv", la.regret_csv, "write the regret trace here");

  auto* diverge = app.add_subcommand("diverge", "exact divergence identities as CSV");
  std::string check = "ingster";
  int dv_T = 2, pairs = 200;
  ia.attach(diverge, false);
  diverge->add_option("--check", check, "ingster | chi2 | conditional | inequalities");
  diverge->add_option("-T", dv_T, "episodes");
  diverge->add_option("--pairs", pairs, "random pairs for inequalities");

  auto* exp = app.add_subcommand("exp", "run a configured experiment");
  std::string kind, config;
  exp->add_option("kind", kind, "pac-scaling | sigma-scaling | regret | certify-sweep | identities")
      ->required()
      ->check(CLI::IsMember({"pac-scaling", "sigma-scaling", "regret", "certify-sweep",
                             "identities"}));
  exp->add_option("--config", config, "JSON config")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(g, ia, describe);
    if (analyze->parsed()) return cmd_analyze(g, ia, an_h, an_m);
    if (cert->parsed()) return cmd_certify(g, ia, cert_w, matrices, stability, probes);
    if (learn->parsed()) return cmd_learn(g, ia, la);
    if (diverge->parsed()) return cmd_diverge(g, ia, check, dv_T, pairs);
    if (exp->parsed()) return cmd_exp(g, kind, config, seed_opt->count() > 0, cap_opt->count() > 0);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

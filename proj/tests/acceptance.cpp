// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "revlab/errors.hpp"
#include "revlab/experiments.hpp"
#include "revlab/hard_instances.hpp"
#include "revlab/psr.hpp"
#include "revlab/revealing.hpp"
#include "revlab/simulate.hpp"

using namespace revlab;

namespace {

// Pinned tolerances and limits.
constexpr double kResidualMax = 1e-9;
constexpr double kLiftSlack = 1e-9;
constexpr double kValueTol = 1e-12;
constexpr double kBoundSlack = 1e-12;
constexpr double kFactorizationMax = 1e-10;
constexpr double kIngsterGapMax = 1e-9;
constexpr double kChi2Slack = 1e-9;
constexpr double kChi2ExactTol = 1e-12;
constexpr double kTesterErrorMax = 1.0 / 3.0;
constexpr double kSuccessMin = 0.75;
constexpr double kOmleExponentMax = 0.8;
constexpr int kDrawsPerFamily = 50;
constexpr int kRandomModels = 20;
constexpr int kPoliciesPerInstance = 100;
constexpr int kTesterTrials = 300;
constexpr int kLearnerTrials = 50;

std::string config_path(const std::string& name) { return std::string(REVLAB_CONFIG_DIR) + "/" + name; }

Json load(const std::string& name) {
  std::ifstream in(config_path(name));
  if (!in) throw ConfigError("missing shipped config " + config_path(name));
  return Json::parse(in);
}

std::string num(double x) {
  std::ostringstream s;
  s.precision(4);
  s << x;
  return s.str();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

HardInstanceSpec tiny(Family f) {
  HardInstanceSpec s;
  s.family = f;
  s.n = 1;
  s.m = 1;
  s.K = 2;
  s.L = 2;
  s.H = 4;
  s.A = f == Family::MultiStepRegret ? 6 : 3;
  s.sigma = 0.5;
  s.eps = 0.1;
  s.unchecked = true;
  return s;
}

// Random small parameterization; redrawn until it validates.
HardInstanceSpec random_spec(Family f, Rng& rng, bool null) {
  for (;;) {
    HardInstanceSpec s;
    s.family = f;
    s.unchecked = true;
    s.eps = 0.02 + 0.08 * uniform01(rng);
    s.sigma = std::exp(std::log(0.05) + uniform01(rng) * std::log(20.0));
    s.n = 1 + static_cast<int>(rng() % 2);
    s.K = 1 + static_cast<int>(rng() % 3);
    s.m = f == Family::SingleStepPac ? 1 : 1 + static_cast<int>(rng() % 2);
    s.L = f == Family::MultiStepPac ? 1 + static_cast<int>(rng() % 2) : 1;
    s.A = f == Family::MultiStepRegret ? 6 + static_cast<int>(rng() % 2)
                                       : 3 + static_cast<int>(rng() % 2);
    s.H = s.n + s.m + 1 + static_cast<int>(rng() % 2);
    try {
      FamilyEnumerator fam(s, false, rng());
      const auto out = fam.at(null ? 0 : 1 + rng() % (fam.size() - 1));
      validate_spec(out);
      return out;
    } catch (const ParameterError&) {
    }
  }
}

std::vector<HardInstanceSpec> certificate_draws() {
  std::vector<HardInstanceSpec> out;
  Rng rng(2024);
  for (auto f : {Family::SingleStepPac, Family::MultiStepRegret, Family::MultiStepPac})
    for (int i = 0; i < kDrawsPerFamily; ++i) out.push_back(random_spec(f, rng, i % 10 == 0));
  return out;
}

// Rows of the identity table keyed by check name.
std::vector<std::vector<std::string>> rows_for(const Table& t, const std::string& check) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : t.rows)
    if (r[0] == check) out.push_back(r);
  return out;
}

const ExperimentResult& identities_result() {
  static const ExperimentResult res = run_experiment(parse_experiment_config(load("identities-tiny.json")));
  return res;
}

Outcome c1_certificates() {
  std::size_t members = 0, nulls = 0, failures = 0;
  double worst_ratio = 0, worst_residual = 0;
  for (const auto& s : certificate_draws()) {
    const auto inst = build_instance(s);
    const auto set = certify(inst.pomdp, inst.meta.revealing_window);
    const double bound = s.is_null() ? 1.0 : 1.0 + 2.0 / s.sigma;
    double residual = 0;
    for (const auto& c : set.steps) residual = std::max(residual, c.residual);
    const bool ok = set.valid && set.inverse_alpha <= bound + kResidualMax && residual <= kResidualMax;
    failures += !ok;
    (s.is_null() ? nulls : members)++;
    worst_ratio = std::max(worst_ratio, set.inverse_alpha / bound);
    worst_residual = std::max(worst_residual, residual);
  }
  return {failures == 0, num(members) + " members + " + num(nulls) + " null over 3 families, " +
                             num(failures) + " failures, max certified/bound " + num(worst_ratio) +
                             ", max residual " + num(worst_residual)};
}

Outcome c2_lift() {
  std::size_t checked = 0, failures = 0, instances = 0;
  double worst = -1e300;
  auto lift_all = [&](const TabularPOMDP& p, int window) {
    const auto set = certify(p, window);
    if (!set.valid) {
      ++failures;
      return;
    }
    ++instances;
    for (const auto& c : set.steps) {
      if (c.h > p.horizon() - window) continue;
      for (int anchor = 0; anchor < p.num_actions(); ++anchor) {
        const auto up = lift_inverse(c, p, anchor);
        ++checked;
        worst = std::max(worst, up.norm - c.norm);
        failures += !(up.valid && up.norm <= c.norm + kLiftSlack);
      }
    }
  };
  Rng rng(7);
  for (int i = 0; i < kRandomModels; ++i) {
    const int S = 2 + static_cast<int>(rng() % 2);
    lift_all(random_revealing_pomdp(S, S + static_cast<int>(rng() % 2), 2 + static_cast<int>(rng() % 2),
                                    2 + static_cast<int>(rng() % 2), 500 + i),
             1);
  }
  // Every hard instance whose lifted window still fits the enumeration cap.
  std::size_t skipped = 0;
  for (const auto& s : certificate_draws()) {
    const auto inst = build_instance(s);
    const int w = inst.meta.revealing_window;
    const double rows = std::pow(inst.pomdp.num_observations(), w + 1) *
                        std::pow(inst.pomdp.num_actions(), w);
    if (rows > static_cast<double>(kDefaultEnumerationCap)) {
      ++skipped;
      continue;
    }
    lift_all(inst.pomdp, w);
  }
  return {failures == 0 && checked > 0,
          num(instances) + " models, " + num(checked) + " lifts, " + num(failures) +
              " failures, max(lifted - base) " + num(worst) + ", " + num(skipped) +
              " draws above the enumeration cap"};
}

Outcome c3_witness() {
  std::size_t checked = 0, unequal = 0;
  for (int m : {1, 2}) {
    auto t = tiny(Family::MultiStepRegret);
    t.m = m;
    t.H = t.n + 2 * m + 1;
    FamilyEnumerator fam(t, false, 5);
    for (std::uint64_t i = 1; i < fam.size(); i += std::max<std::uint64_t>(1, fam.size() / 25)) {
      const auto s = fam.at(i);
      // The window must lie inside the lock, before the reward step.
      if (s.theta->h_star + s.m >= s.H) continue;
      const auto inst = build_instance(s);
      const auto M = emission_action_matrix(inst.pomdp, s.theta->h_star + 1, s.m);
      const int sp = inst.pomdp.state_index("lock:+"), sm = inst.pomdp.state_index("lock:-");
      ++checked;
      unequal += !(M.mat.col(sp).array() == M.mat.col(sm).array()).all() ||
                 M.mat.col(sp).sum() == 0.0;
    }
  }
  return {unequal == 0 && checked > 0,
          num(checked) + " members (m = 1, 2), " + num(unequal) + " with differing or empty columns"};
}

Outcome c4_closed_form() {
  std::size_t checked = 0, failures = 0;
  double worst = 0;
  for (auto f : {Family::SingleStepPac, Family::MultiStepRegret, Family::MultiStepPac}) {
    FamilyEnumerator fam(tiny(f), false, 11);
    for (std::uint64_t i = 0; i < fam.size(); ++i) {
      const auto s = fam.at(i);
      const double expect = s.is_null() ? (1 + s.eps) / 4 : (1 + 2 * s.eps) / 4;
      const double got = optimal_value_bruteforce(build_instance(s).pomdp).value;
      worst = std::max(worst, std::abs(got - expect));
      failures += std::abs(got - expect) > kValueTol;
      ++checked;
    }
  }
  // Negative control: the corrupted identity config must fail.
  const auto bad = run_experiment(parse_experiment_config(load("identities-corrupt.json")));
  const bool control = !bad.passed;
  return {failures == 0 && control, num(checked) + " tiny instances (all members), max error " +
                                        num(worst) + ", corrupted control " +
                                        (control ? "rejected" : "NOT rejected")};
}

Outcome c5_suboptimality() {
  std::size_t policies = 0, violations = 0;
  double worst = 1e300;
  for (auto f : {Family::SingleStepPac, Family::MultiStepRegret, Family::MultiStepPac}) {
    FamilyEnumerator fam(tiny(f), false, 13);
    for (std::uint64_t idx : {std::uint64_t{0}, std::uint64_t{1}, fam.size() / 2, fam.size() - 1}) {
      const auto s = fam.at(idx);
      const auto inst = build_instance(s);
      for (int k = 0; k < kPoliciesPerInstance; ++k) {
        const RandomHistoryPolicy pi(s.A, 9000 + k, (k % 5) / 4.0);
        double value = 0, stay = 0, reveal = 0;
        for (const auto& w : enumerate_distribution(inst.pomdp, pi)) {
          value += w.prob * w.traj.total_reward();
          stay += w.prob * stays_at_root(s, w.traj);
          if (f == Family::MultiStepRegret) reveal += w.prob * takes_reveal(s, w.traj);
        }
        const double gap = inst.meta.optimal_value - value;
        const double bound = s.is_null() ? s.eps / 4 * (1 - stay) + reveal / 4 : s.eps / 4 * stay;
        worst = std::min(worst, gap - bound);
        violations += gap + kBoundSlack < bound;
        ++policies;
      }
    }
  }
  return {violations == 0, num(policies) + " (instance, policy) pairs, " + num(violations) +
                               " violations, min slack " + num(worst)};
}

Outcome c6_brep() {
  std::vector<std::pair<TabularPOMDP, int>> models;  // model, revealing window
  for (auto f : {Family::SingleStepPac, Family::MultiStepRegret, Family::MultiStepPac}) {
    FamilyEnumerator fam(tiny(f), false, 17);
    for (std::uint64_t i : {std::uint64_t{0}, fam.size() / 3}) {
      auto inst = build_instance(fam.at(i));
      models.emplace_back(std::move(inst.pomdp), inst.meta.revealing_window);
    }
  }
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    models.emplace_back(random_revealing_pomdp(3, 4, 2, 3, seed), 1);
  double worst_residual = 0, worst_margin = 1e300;
  std::size_t pairs = 0, failures = 0, probes = 0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& [p, window] = models[i];
    const auto set = certify(p, window);
    if (!set.valid) {
      ++failures;
      continue;
    }
    const auto b = build_brep(p, window, set.steps);
    const auto fr = verify_factorization(b, p);
    pairs += fr.pairs;
    worst_residual = std::max(worst_residual, fr.residual);
    const auto st = check_b_stability(b, set.inverse_alpha, default_probes(b, p, 2, i));
    probes += st.probes.size();
    worst_margin = std::min(worst_margin, st.worst_weak_margin);
    failures += fr.residual > kFactorizationMax || !st.passed();
  }
  return {failures == 0, num(models.size()) + " models, " + num(pairs) +
                             " (history, test) pairs, max residual " + num(worst_residual) + ", " +
                             num(probes) + " probes, min weak margin " + num(worst_margin)};
}

Outcome c7_ingster() {
  const auto& t = identities_result().tables.at("identities");
  std::size_t n = 0, bad = 0;
  double worst = 0;
  for (const char* check : {"ingster-T1", "ingster-T2"})
    for (const auto& r : rows_for(t, check)) {
      ++n;
      const double gap = std::stod(r[4]);
      worst = std::max(worst, gap);
      bad += gap > kIngsterGapMax;
    }
  const auto ineq = rows_for(t, "divergence-inequalities");
  const bool ineq_ok = ineq.size() == 1 && std::stod(ineq[0][2]) == 0.0 &&
                       ineq[0][1] == "200 pairs";
  return {n >= 2 && bad == 0 && ineq_ok,
          num(n) + " Ingster rows (T = 1, 2), max gap " + num(worst) + "; inequality suite " +
              (ineq.empty() ? std::string("missing") : ineq[0][1] + ", " + ineq[0][2] + " violations")};
}

Outcome c8_chi2() {
  const auto& t = identities_result().tables.at("identities");
  std::size_t n = 0, bad = 0;
  for (const auto& r : rows_for(t, "chi2-inner-product")) {
    ++n;
    bad += std::stod(r[2]) > std::stod(r[3]) + kChi2Slack;
  }
  std::size_t exact = 0, exact_bad = 0;
  double worst = 0;
  for (const auto& r : rows_for(t, "chi2-single-correct")) {
    ++exact;
    const double gap = std::abs(std::stod(r[2]) - std::stod(r[3]));
    worst = std::max(worst, gap);
    exact_bad += gap > kChi2ExactTol;
  }
  return {n > 0 && exact > 0 && bad == 0 && exact_bad == 0,
          num(n) + " inner-product schedules, " + num(bad) + " above bound; " + num(exact) +
              " single-correct schedules, max |lhs - (1 + 4 eps^2 / 3)| " + num(worst)};
}

Outcome c9_tester() {
  // Error rates at the budget calibrated for 2K = 20 over the same 300 draws,
  // plus a held-out set of 300 draws reported for reference.
  CalibrationOptions opt;
  opt.trials = kTesterTrials;
  const auto point = calibrate_tester(20, 0.1, opt);
  const auto e = tester_error_rates(20, 0.1, point.budget, kTesterTrials, opt.seed);
  const auto held = tester_error_rates(20, 0.1, point.budget, kTesterTrials, opt.seed + 1000);
  const bool rates_ok = point.converged && e.false_far <= kTesterErrorMax &&
                        e.false_uniform <= kTesterErrorMax;

  const auto res = run_experiment(parse_experiment_config(load("pac-scaling-tester.json")));
  std::string grid;
  for (const auto& r : res.tables.at("calibration").rows) grid += (grid.empty() ? "" : ",") + r[0];
  return {rates_ok && res.passed,
          "2K = 20 budget " + num(point.budget) + ": false-far " + num(e.false_far) +
              ", false-uniform " + num(e.false_uniform) + " (held-out " + num(held.false_far) + ", " +
              num(held.false_uniform) + "); slope over K in {" + grid + "} " +
              num(res.summary.at("slope")) + " in [" + num(res.summary.at("slope_lo")) + ", " +
              num(res.summary.at("slope_hi")) + "]"};
}

Outcome c10_bruteforce() {
  const auto tmpl = spec_from_json(load("tiny-multistep-pac.json"));
  auto null = tmpl;
  null.theta.reset();
  const auto members = trial_members(null, kLearnerTrials, 1, true);
  const double success = bruteforce_success_rate(members, BruteForceOptions{}, 1);
  const auto k = run_experiment(parse_experiment_config(load("pac-scaling-bruteforce.json")));
  const auto s = run_experiment(parse_experiment_config(load("sigma-scaling.json")));
  return {success >= kSuccessMin && k.passed && s.passed,
          "success " + num(success) + " over " + num(kLearnerTrials) + " tiny members; K slope " +
              num(k.summary.at("slope")) + " in [0.35, 0.65], sigma slope " +
              num(s.summary.at("slope")) + " in [-2.5, -1.5]"};
}

Outcome c11_omle() {
  const Json j = load("regret-single-step.json");
  const auto res = run_experiment(parse_experiment_config(j));
  const double delta = j.at("omle").at("delta").get<double>();
  const int runs = j.at("regret").at("runs").get<int>();
  const double floor = 1 - delta - 3 * std::sqrt(delta * (1 - delta) / runs);
  const double survival = res.summary.at("single-step-pac:omle:survival");
  const double omle_exp = res.summary.at("single-step-pac:omle:exponent");
  const double random_exp = res.summary.at("single-step-pac:random:exponent");
  const bool ok = survival >= floor && omle_exp <= kOmleExponentMax && omle_exp < random_exp;
  std::string ete;
  if (res.summary.count("single-step-pac:explore-then-exploit:exponent"))
    ete = ", explore-then-exploit " + num(res.summary.at("single-step-pac:explore-then-exploit:exponent"));
  return {ok, "survival " + num(survival) + " >= " + num(floor) + " over " + num(runs) +
                  " runs; exponents omle " + num(omle_exp) + ", random " + num(random_exp) + ete};
}

Outcome c12_separation() {
  std::size_t instances = 0, trajectories = 0, reveal = 0, rewarded = 0;
  for (int n : {1, 2}) {
    auto t = tiny(Family::MultiStepRegret);
    t.n = n;
    t.H = n + 3;
    FamilyEnumerator fam(t, false, 19);
    const std::uint64_t step = std::max<std::uint64_t>(1, fam.size() / 40);
    for (std::uint64_t i = 0; i < fam.size(); i += step) {
      const auto r = structural_separation(fam.at(i));
      ++instances;
      trajectories += r.trajectories;
      reveal += r.reveal_trajectories;
      rewarded += r.reveal_rewarded;
    }
  }
  return {reveal > 0 && rewarded == 0,
          num(instances) + " instances, " + num(trajectories) + " trajectories, " + num(reveal) +
              " with a reveal action, " + num(rewarded) + " of those rewarded"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "revealing certificates", 60, c1_certificates},
      {2, "lift monotonicity", 60, c2_lift},
      {3, "non-revealing witness", 0, c3_witness},
      {4, "closed-form values", 60, c4_closed_form},
      {5, "suboptimality bound", 0, c5_suboptimality},
      {6, "B-representation", 120, c6_brep},
      {7, "Ingster identity and divergence inequalities", 0, c7_ingster},
      {8, "chi-square inner product", 0, c8_chi2},
      {9, "uniformity tester", 300, c9_tester},
      {10, "brute-force learner", 900, c10_bruteforce},
      {11, "OMLE", 1200, c11_omle},
      {12, "structural regret separation", 0, c12_separation},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string timing = num(secs) + " s";
    if (c.limit_seconds > 0) {
      timing += " / limit " + num(c.limit_seconds) + " s";
      pass = pass && secs < c.limit_seconds;
    }
    failed += !pass;
    std::printf("[%s] C%d %s: %s (%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

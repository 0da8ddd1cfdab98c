#include "revlab/psr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <random>

#include "revlab/serialize.hpp"

namespace revlab {

namespace {

long ipow(long base, int e) {
  long r = 1;
  while (e-- > 0) r *= base;
  return r;
}

// T(next, s) for unmasked s.
Eigen::MatrixXd transition_matrix(const TabularPOMDP& p, int h, int a) {
  const int S = p.num_states();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(S, S);
  for (int s = 0; s < S; ++s) {
    if (p.masked(h, s)) continue;
    for (int t = 0; t < S; ++t) T(t, s) = p.transition(h, s, a, t);
  }
  return T;
}

}  // namespace

int core_window(int horizon, int m, int h) {
  if (h == horizon + 1) return 0;
  return std::min(m, horizon - h + 1);
}

long core_test_count(int num_obs, int num_actions, int window) {
  if (window == 0) return 1;
  return ipow(num_obs, window) * ipow(num_actions, window - 1);
}

BRepresentation build_brep(const TabularPOMDP& pomdp, int m,
                           const std::vector<InverseCertificate>& certs) {
  const int H = pomdp.horizon(), S = pomdp.num_states(), O = pomdp.num_observations(),
            A = pomdp.num_actions();
  if (m < 1 || m > H) throw ShapeError("window must lie in [1, H]");
  BRepresentation b;
  b.H = H;
  b.m = m;
  b.O = O;
  b.A = A;
  b.S = S;
  b.window.assign(H + 2, 0);
  for (int h = 1; h <= H + 1; ++h) b.window[h] = core_window(H, m, h);
  b.B.assign(H, {});

  for (int h = 1; h <= H; ++h) {
    const long rows = b.tests(h + 1), cols = b.tests(h);
    auto& step = b.B[h - 1];
    step.assign(static_cast<std::size_t>(O) * A, Eigen::MatrixXd::Zero(rows, cols));
    if (h <= H - m) {
      if (static_cast<int>(certs.size()) < h || !certs[h - 1].valid || certs[h - 1].h != h ||
          certs[h - 1].m != m)
        throw PreconditionError("missing or invalid certificate at step " + std::to_string(h));
      Eigen::MatrixXd pinv = certs[h - 1].inverse;
      for (int s = 0; s < S; ++s)
        if (pomdp.masked(h, s)) pinv.row(s).setZero();
      const Eigen::MatrixXd Mnext = emission_action_matrix(pomdp, h + 1, m).mat;
      for (int a = 0; a < A; ++a) {
        const Eigen::MatrixXd MT = Mnext * transition_matrix(pomdp, h, a);
        for (int o = 0; o < O; ++o) {
          Eigen::VectorXd d = Eigen::VectorXd::Zero(S);
          for (int s = 0; s < S; ++s)
            if (!pomdp.masked(h, s)) d(s) = pomdp.emission(h, s, o);
          step[o * A + a] = MT * d.asDiagonal() * pinv;
        }
      }
    } else {
      // Shift operator: test (o, a, t') at h maps to t' at h+1.
      const int w = b.window[h];
      const long on = ipow(O, w - 1), an = ipow(A, std::max(w - 2, 0));
      for (int o = 0; o < O; ++o)
        for (int a = 0; a < A; ++a) {
          auto& M = step[o * A + a];
          if (w == 1) {
            M(0, o) = 1.0;
            continue;
          }
          for (long ar = 0; ar < an; ++ar)
            for (long orest = 0; orest < on; ++orest) {
              const long t = (a * an + ar) * (on * O) + o * on + orest;
              M(ar * on + orest, t) = 1.0;
            }
        }
    }
  }

  Eigen::VectorXd mu(S);
  for (int s = 0; s < S; ++s) mu(s) = pomdp.initial(s);
  b.q0 = emission_action_matrix(pomdp, 1, b.window[1]).mat * mu;

  double worst = 0;
  for (const auto& step : b.B)
    for (const auto& M : step)
      if (M.size() > 0) worst = std::max(worst, M.cwiseAbs().colwise().sum().maxCoeff());
  b.magnitude = 1.0 + worst;
  return b;
}

double test_probability(const TabularPOMDP& pomdp, int h, const std::vector<double>& latent,
                        const std::vector<int>& obs, const std::vector<int>& acts) {
  const int S = pomdp.num_states();
  std::vector<double> a = latent, next(S);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const int step = h + static_cast<int>(k);
    for (int s = 0; s < S; ++s)
      if (a[s] != 0.0) a[s] *= pomdp.emission(step, s, obs[k]);
    if (k + 1 == obs.size()) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (int s = 0; s < S; ++s) {
      if (a[s] == 0.0) continue;
      for (int t = 0; t < S; ++t) next[t] += a[s] * pomdp.transition(step, s, acts[k], t);
    }
    a.swap(next);
  }
  double total = 0;
  for (double x : a) total += x;
  return total;
}

namespace {

// Decodes test index t at window w into (obs, acts).
void decode_test(long t, int w, int O, int A, std::vector<int>& obs, std::vector<int>& acts) {
  obs.assign(w, 0);
  acts.assign(std::max(w - 1, 0), 0);
  const long on = ipow(O, w);
  long oi = t % on, ai = t / on;
  for (int k = w - 1; k >= 0; --k) {
    obs[k] = static_cast<int>(oi % O);
    oi /= O;
  }
  for (int k = w - 2; k >= 0; --k) {
    acts[k] = static_cast<int>(ai % A);
    ai /= A;
  }
}

}  // namespace

FactorizationReport verify_factorization(const BRepresentation& brep, const TabularPOMDP& pomdp,
                                         std::size_t cap) {
  const int H = brep.H, S = brep.S, O = brep.O, A = brep.A;
  FactorizationReport rep;
  std::vector<int> obs, acts;

  std::function<void(int, const std::vector<double>&, const Eigen::VectorXd&)> visit =
      [&](int h, const std::vector<double>& alpha, const Eigen::VectorXd& v) {
        if (++rep.histories > cap) throw EnumerationTooLarge("factorization check exceeds cap");
        const bool dead = std::all_of(alpha.begin(), alpha.end(), [](double x) { return x == 0.0; });
        if (dead) {
          rep.residual = std::max(rep.residual, v.cwiseAbs().maxCoeff());
          ++rep.pairs;
          return;
        }
        if (h == H + 1) {
          double total = 0;
          for (double x : alpha) total += x;
          rep.residual = std::max(rep.residual, std::abs(total - v(0)));
          ++rep.pairs;
          return;
        }
        const int w = brep.window[h];
        for (long t = 0; t < v.size(); ++t) {
          decode_test(t, w, O, A, obs, acts);
          const double p = test_probability(pomdp, h, alpha, obs, acts);
          rep.residual = std::max(rep.residual, std::abs(p - v(t)));
          ++rep.pairs;
        }
        std::vector<double> next(S);
        for (int o = 0; o < O; ++o) {
          std::vector<double> w_o(S, 0.0);
          for (int s = 0; s < S; ++s)
            if (alpha[s] != 0.0) w_o[s] = alpha[s] * pomdp.emission(h, s, o);
          for (int a = 0; a < A; ++a) {
            if (h < H) {
              std::fill(next.begin(), next.end(), 0.0);
              for (int s = 0; s < S; ++s) {
                if (w_o[s] == 0.0) continue;
                for (int t = 0; t < S; ++t) next[t] += w_o[s] * pomdp.transition(h, s, a, t);
              }
              visit(h + 1, next, brep.at(h, o, a) * v);
            } else {
              visit(h + 1, w_o, brep.at(h, o, a) * v);
            }
          }
        }
      };

  std::vector<double> alpha(S);
  for (int s = 0; s < S; ++s) alpha[s] = pomdp.initial(s);
  visit(1, alpha, brep.q0);
  return rep;
}

namespace {

class StabilityEngine {
 public:
  StabilityEngine(const BRepresentation& b, double lambda, std::size_t cap)
      : b_(b), lambda_(lambda), cap_(cap) {
    zero_.resize(b.H);
    for (int h = 1; h <= b.H; ++h) {
      zero_[h - 1].resize(static_cast<std::size_t>(b.O) * b.A);
      for (int i = 0; i < b.O * b.A; ++i) zero_[h - 1][i] = b.B[h - 1][i].isZero(0.0);
    }
  }

  // max over policies of sum_tau pi(tau) |B_{H:h}(tau) v|, recursing as
  // sum over o of max over a.
  double lhs(int h, const Eigen::VectorXd& v) {
    if (++nodes_ > cap_) throw BudgetError("stability recursion exceeds the node cap");
    if (h == b_.H + 1) return std::abs(v(0));
    if (v.isZero(0.0)) return 0.0;
    double total = 0;
    for (int o = 0; o < b_.O; ++o) {
      double best = 0;
      for (int a = 0; a < b_.A; ++a) {
        if (zero_[h - 1][o * b_.A + a]) continue;
        Eigen::VectorXd next = b_.at(h, o, a) * v;
        best = std::max(best, lhs(h + 1, next));
      }
      total += best;
    }
    return total;
  }

  // max over policies of [sum_tau pi |B x| - lambda * sum_t pi(t) |x(t)|].
  double strong(int h0, const Eigen::VectorXd& x) {
    x_ = &x;
    h0_ = h0;
    w_ = b_.window[h0];
    return strong_rec(0, x, 0, 0);
  }

  std::size_t nodes() const { return nodes_; }

 private:
  double strong_rec(int k, const Eigen::VectorXd& v, long a_idx, long o_idx) {
    if (++nodes_ > cap_) throw BudgetError("stability recursion exceeds the node cap");
    const int h = h0_ + k;
    const long on = ipow(b_.O, w_);
    const bool zero = v.isZero(0.0);
    double total = 0;
    for (int o = 0; o < b_.O; ++o) {
      const long oi = o_idx * b_.O + o;
      double term = 0;
      if (k == w_ - 1) term -= lambda_ * std::abs((*x_)(a_idx * on + oi));
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < b_.A; ++a) {
        const bool z = zero || zero_[h - 1][o * b_.A + a];
        double val;
        if (k == w_ - 1) {
          val = z ? 0.0 : lhs(h + 1, b_.at(h, o, a) * v);
        } else {
          Eigen::VectorXd next = z ? Eigen::VectorXd::Zero(b_.tests(h + 1))
                                   : Eigen::VectorXd(b_.at(h, o, a) * v);
          val = strong_rec(k + 1, next, a_idx * b_.A + a, oi);
        }
        best = std::max(best, val);
        // Once v is zero, every action yields the same value when the test
        // has completed.
        if (zero && k == w_ - 1) break;
      }
      total += term + best;
    }
    return total;
  }

  const BRepresentation& b_;
  double lambda_;
  std::size_t cap_, nodes_ = 0;
  std::vector<std::vector<char>> zero_;
  const Eigen::VectorXd* x_ = nullptr;
  int h0_ = 0, w_ = 0;
};

// max over test policies of sum_t pi(t) |x(t)|.
double pi_prime_norm(const Eigen::VectorXd& x, int w, int O, int A) {
  if (w == 0) return std::abs(x(0));
  const long on = ipow(O, w);
  std::function<double(int, long, long)> rec = [&](int k, long a_idx, long o_idx) {
    double total = 0;
    for (int o = 0; o < O; ++o) {
      const long oi = o_idx * O + o;
      if (k == w - 1) {
        total += std::abs(x(a_idx * on + oi));
        continue;
      }
      double best = 0;
      for (int a = 0; a < A; ++a) best = std::max(best, rec(k + 1, a_idx * A + a, oi));
      total += best;
    }
    return total;
  };
  return rec(0, 0, 0);
}

// Predictive states along reachable histories, per step.
std::vector<std::vector<Eigen::VectorXd>> collect_predictive(const BRepresentation& brep,
                                                             std::size_t per_step) {
  std::vector<std::vector<Eigen::VectorXd>> out(brep.H + 1);
  std::function<void(int, const Eigen::VectorXd&)> visit = [&](int h, const Eigen::VectorXd& v) {
    const long block = ipow(brep.O, brep.window[h]);
    const double p = v.head(block).sum();
    if (p <= 1e-12) return;
    if (out[h].size() < per_step) out[h].push_back(v / p);
    if (h == brep.H) return;
    for (int o = 0; o < brep.O; ++o)
      for (int a = 0; a < brep.A; ++a) visit(h + 1, brep.at(h, o, a) * v);
  };
  visit(1, brep.q0);
  return out;
}

}  // namespace

ProbeSet default_probes(const BRepresentation& brep, const TabularPOMDP& pomdp,
                        int random_per_step, std::uint64_t seed,
                        std::size_t max_predictive_per_step) {
  (void)pomdp;
  ProbeSet ps;
  const auto pred = collect_predictive(brep, max_predictive_per_step);
  for (int h = 1; h <= brep.H; ++h) {
    const long n = brep.tests(h);
    for (long i = 0; i < n; ++i) {
      ps.h.push_back(h);
      ps.kind.push_back("unit");
      ps.x.push_back(Eigen::VectorXd::Unit(n, i));
    }
    for (const auto& q : pred[h]) {
      ps.h.push_back(h);
      ps.kind.push_back("predictive");
      ps.x.push_back(q);
    }
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(h)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < random_per_step; ++r) {
      Eigen::VectorXd x(n);
      for (long i = 0; i < n; ++i) x(i) = gauss(rng);
      ps.h.push_back(h);
      ps.kind.push_back("random");
      ps.x.push_back(x);
    }
  }
  return ps;
}

StabilityReport check_b_stability(const BRepresentation& brep, double lambda,
                                  const ProbeSet& probes, std::size_t node_cap) {
  StabilityReport rep;
  rep.lambda = lambda;
  rep.worst_weak_margin = std::numeric_limits<double>::infinity();
  rep.worst_strong_margin = std::numeric_limits<double>::infinity();
  StabilityEngine eng(brep, lambda, node_cap);
  for (std::size_t i = 0; i < probes.x.size(); ++i) {
    const int h = probes.h[i];
    const auto& x = probes.x[i];
    if (x.size() != brep.tests(h)) throw ShapeError("probe length does not match the core tests");
    ProbeResult r;
    r.h = h;
    r.kind = probes.kind[i];
    r.lhs = eng.lhs(h, x);
    r.star = star_norm(x, static_cast<int>(ipow(brep.O, brep.window[h])));
    r.pi_prime = pi_prime_norm(x, brep.window[h], brep.O, brep.A);
    r.weak_bound = lambda * std::max(r.star, r.pi_prime);
    r.weak_ok = r.lhs <= r.weak_bound + 1e-9;
    r.strong_gap = eng.strong(h, x);
    r.strong_ok = r.strong_gap <= 1e-9;
    rep.failures_weak += !r.weak_ok;
    rep.failures_strong += !r.strong_ok;
    rep.worst_weak_margin = std::min(rep.worst_weak_margin, r.weak_bound - r.lhs);
    rep.worst_strong_margin = std::min(rep.worst_strong_margin, -r.strong_gap);
    rep.probes.push_back(std::move(r));
  }
  return rep;
}

std::vector<int> predictive_rank(const BRepresentation& brep, const TabularPOMDP& pomdp) {
  (void)pomdp;
  const auto pred = collect_predictive(brep, 100'000);
  std::vector<int> ranks(brep.H + 1, 0);
  for (int h = 1; h <= brep.H; ++h) {
    if (pred[h].empty()) continue;
    Eigen::MatrixXd D(pred[h].size(), brep.tests(h));
    for (std::size_t i = 0; i < pred[h].size(); ++i) D.row(i) = pred[h][i].transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-8 * sv(0)) ++r;
    ranks[h] = r;
  }
  return ranks;
}

void write_stability_report(std::ostream& out, const StabilityReport& r) {
  out << "format revlab-stability\nversion 1\n";
  out << "lambda " << format_double(r.lambda) << "\n";
  out << "probes " << r.probes.size() << "\n";
  out << "failures_weak " << r.failures_weak << "\n";
  out << "failures_strong " << r.failures_strong << "\n";
  out << "worst_weak_margin " << format_double(r.worst_weak_margin) << "\n";
  out << "worst_strong_margin " << format_double(r.worst_strong_margin) << "\n";
  out << "# h kind lhs star pi_prime weak_bound weak_ok strong_gap strong_ok\n";
  for (const auto& p : r.probes)
    out << "probe " << p.h << ' ' << p.kind << ' ' << format_double(p.lhs) << ' '
        << format_double(p.star) << ' ' << format_double(p.pi_prime) << ' '
        << format_double(p.weak_bound) << ' ' << p.weak_ok << ' ' << format_double(p.strong_gap)
        << ' ' << p.strong_ok << "\n";
  out << "end\n";
}

}  // namespace revlab

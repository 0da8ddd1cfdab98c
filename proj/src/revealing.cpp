#include "revlab/revealing.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <functional>
#include <numeric>
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

// Indices of rows of M+ with a nonzero entry.
std::vector<int> nonzero_rows(const Eigen::MatrixXd& inv) {
  std::vector<int> rows;
  for (int i = 0; i < inv.rows(); ++i)
    if ((inv.row(i).array() != 0.0).any()) rows.push_back(i);
  return rows;
}

std::vector<int> nonzero_blocks(const Eigen::MatrixXd& inv, int block_size) {
  std::vector<int> blocks;
  for (int b = 0; b * block_size < inv.cols(); ++b)
    if ((inv.middleCols(b * block_size, block_size).array() != 0.0).any()) blocks.push_back(b);
  return blocks;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void join(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

int EmissionActionMatrix::num_blocks() const { return static_cast<int>(ipow(num_actions, m - 1)); }

EmissionActionMatrix emission_action_matrix(const TabularPOMDP& pomdp, int h, int m,
                                            std::size_t cap) {
  const int H = pomdp.horizon(), S = pomdp.num_states(), O = pomdp.num_observations(),
            A = pomdp.num_actions();
  if (m < 1 || h < 1 || h > H - m + 1) throw ShapeError("window does not fit the horizon");
  const long n = ipow(O, m), blocks = ipow(A, m - 1);
  if (static_cast<double>(n) * static_cast<double>(blocks) > static_cast<double>(cap))
    throw EnumerationTooLarge("emission-action matrix exceeds the enumeration cap");

  EmissionActionMatrix out;
  out.h = h;
  out.m = m;
  out.num_obs = O;
  out.num_actions = A;
  out.mat = Eigen::MatrixXd::Zero(n * blocks, S);
  out.column_masked.assign(S, 0);

  std::vector<int> aseq(std::max(m - 1, 0));
  std::function<void(int, const std::vector<double>&, long, long, int)> fill =
      [&](int k, const std::vector<double>& d, long a_idx, long o_idx, int col) {
        const int step = h + k;
        for (int o = 0; o < O; ++o) {
          std::vector<double> w(S, 0.0);
          double total = 0.0;
          for (int s = 0; s < S; ++s) {
            if (d[s] == 0.0) continue;
            w[s] = d[s] * pomdp.emission(step, s, o);
            total += w[s];
          }
          if (total == 0.0) continue;
          const long next_idx = o_idx * O + o;
          if (k == m - 1) {
            out.mat(a_idx * n + next_idx, col) = total;
            continue;
          }
          std::vector<double> d2(S, 0.0);
          for (int s = 0; s < S; ++s) {
            if (w[s] == 0.0) continue;
            for (int t = 0; t < S; ++t) d2[t] += w[s] * pomdp.transition(step, s, aseq[k], t);
          }
          fill(k + 1, d2, a_idx, next_idx, col);
        }
      };

  for (int s = 0; s < S; ++s) {
    if (pomdp.masked(h, s)) {
      out.column_masked[s] = 1;
      continue;
    }
    for (long a_idx = 0; a_idx < blocks; ++a_idx) {
      long rest = a_idx;
      for (int k = m - 2; k >= 0; --k) {
        aseq[k] = static_cast<int>(rest % A);
        rest /= A;
      }
      std::vector<double> d(S, 0.0);
      d[s] = 1.0;
      fill(0, d, a_idx, 0, s);
    }
  }
  return out;
}

double star_norm(const Eigen::VectorXd& x, int block_size) {
  double sq = 0.0;
  for (long b = 0; b * block_size < x.size(); ++b) {
    const double l1 = x.segment(b * block_size, block_size).cwiseAbs().sum();
    sq += l1 * l1;
  }
  return std::sqrt(sq);
}

double star_to_one_norm(const Eigen::MatrixXd& inverse, int block_size) {
  if (block_size <= 0 || inverse.cols() % block_size != 0)
    throw ShapeError("column count is not a multiple of the block size");
  const auto rows = nonzero_rows(inverse);
  if (rows.empty()) return 0.0;
  const auto blocks = nonzero_blocks(inverse, block_size);
  if (blocks.size() == 1) return inverse.cwiseAbs().colwise().sum().maxCoeff();

  const int r = static_cast<int>(rows.size());
  if (r > kSignEnumerationRows)
    throw BudgetError("sign enumeration over " + std::to_string(r) + " rows exceeds budget");

  // Gray-code walk over signs of rows 1..r-1; row 0 fixed to +1 by symmetry.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(inverse.cols());
  for (int i : rows) v += inverse.row(i).transpose();
  auto dual = [&] {
    double sq = 0.0;
    for (int b : blocks) {
      const double mx = v.segment(static_cast<long>(b) * block_size, block_size).cwiseAbs().maxCoeff();
      sq += mx * mx;
    }
    return std::sqrt(sq);
  };
  std::vector<int> sign(r, 1);
  double best = dual();
  const std::uint64_t patterns = std::uint64_t{1} << (r - 1);
  for (std::uint64_t k = 1; k < patterns; ++k) {
    const int bit = std::countr_zero(k) + 1;
    sign[bit] = -sign[bit];
    v += (2.0 * sign[bit]) * inverse.row(rows[bit]).transpose();
    best = std::max(best, dual());
  }
  return best;
}

double star_to_one_norm_bruteforce(const Eigen::MatrixXd& inverse, int block_size) {
  const auto rows = nonzero_rows(inverse);
  if (rows.empty()) return 0.0;
  const int B = static_cast<int>(inverse.cols() / block_size);
  const int r = static_cast<int>(rows.size());
  // Per block: choice index in [0, 2*block_size): coordinate and sign.
  std::vector<int> choice(B, 0);
  double best = 0.0;
  Eigen::VectorXd g(B);
  while (true) {
    for (std::uint64_t t = 0; t < (std::uint64_t{1} << r); ++t) {
      for (int b = 0; b < B; ++b) {
        const int col = b * block_size + choice[b] / 2;
        const double sgn = (choice[b] % 2 == 0) ? 1.0 : -1.0;
        double acc = 0.0;
        for (int i = 0; i < r; ++i)
          acc += ((t >> i) & 1 ? -1.0 : 1.0) * inverse(rows[i], col);
        g[b] = sgn * acc;
      }
      // max over w >= 0, |w|_2 = 1 of <w, g>.
      const double pos = g.cwiseMax(0.0).norm();
      best = std::max(best, pos > 0 ? pos : g.maxCoeff());
    }
    int b = 0;
    while (b < B && ++choice[b] == 2 * block_size) choice[b++] = 0;
    if (b == B) break;
  }
  return best;
}

double star_to_one_norm_sampled(const Eigen::MatrixXd& inverse, int block_size, int samples,
                                std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  const long B = inverse.cols() / block_size;
  double best = 0.0;
  Eigen::VectorXd x(inverse.cols());
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd w(B);
    for (long b = 0; b < B; ++b) w[b] = std::abs(normal(rng));
    w /= w.norm();
    x.setZero();
    for (long b = 0; b < B; ++b) {
      auto seg = x.segment(b * block_size, block_size);
      if (rng() & 1) {
        const int o = static_cast<int>(rng() % block_size);
        seg[o] = (rng() & 1) ? 1.0 : -1.0;
      } else {
        for (int o = 0; o < block_size; ++o) seg[o] = normal(rng);
        seg /= seg.cwiseAbs().sum();
      }
      seg *= w[b];
    }
    best = std::max(best, (inverse * x).cwiseAbs().sum());
  }
  return best;
}

Eigen::MatrixXd reachable_columns(const TabularPOMDP& pomdp, int h) {
  const int S = pomdp.num_states(), A = pomdp.num_actions();
  if (h == 1) {
    Eigen::MatrixXd t(S, 1);
    for (int s = 0; s < S; ++s) t(s, 0) = pomdp.initial(s);
    return t;
  }
  std::vector<int> live;
  for (int s = 0; s < S; ++s)
    if (!pomdp.masked(h - 1, s)) live.push_back(s);
  Eigen::MatrixXd t(S, static_cast<long>(live.size()) * A);
  for (size_t i = 0; i < live.size(); ++i)
    for (int a = 0; a < A; ++a)
      for (int s2 = 0; s2 < S; ++s2)
        t(s2, static_cast<long>(i) * A + a) = pomdp.transition(h - 1, live[i], a, s2);
  return t;
}

InverseCertificate verify_generalized_inverse(const TabularPOMDP& pomdp, int h, int m,
                                              const Eigen::MatrixXd& inverse, std::string tag) {
  const auto eam = emission_action_matrix(pomdp, h, m);
  if (inverse.rows() != pomdp.num_states() || inverse.cols() != eam.mat.rows())
    throw ShapeError("inverse must be states x emission-action rows");
  const Eigen::MatrixXd t = reachable_columns(pomdp, h);
  InverseCertificate c;
  c.h = h;
  c.m = m;
  c.tag = std::move(tag);
  c.inverse = inverse;
  c.block_size = eam.block_size();
  c.residual = (inverse * eam.mat * t - t).cwiseAbs().maxCoeff();
  c.norm = star_to_one_norm(inverse, c.block_size);
  c.valid = c.residual <= kResidualTol;
  return c;
}

InverseCertificate construct_block_inverse(const TabularPOMDP& pomdp, int h, int m) {
  const int S = pomdp.num_states();
  const auto eam = emission_action_matrix(pomdp, h, m);
  const Eigen::MatrixXd t = reachable_columns(pomdp, h);
  std::vector<int> support;
  for (int s = 0; s < S; ++s)
    if ((t.row(s).array() > 0.0).any()) support.push_back(s);

  const int n = eam.block_size(), blocks = eam.num_blocks();
  Eigen::MatrixXd best;
  double best_norm = std::numeric_limits<double>::infinity();

  for (int b = 0; b < blocks; ++b) {
    const auto block = eam.mat.middleRows(static_cast<long>(b) * n, n);
    UnionFind uf(S);
    for (int row = 0; row < n; ++row) {
      int first = -1;
      for (int s : support) {
        if (block(row, s) == 0.0) continue;
        if (first < 0) first = s;
        else uf.join(s, first);
      }
    }
    std::vector<std::vector<int>> groups;
    std::vector<int> group_of(S, -1);
    for (int s : support) {
      const int root = uf.find(s);
      if (group_of[root] < 0) {
        group_of[root] = static_cast<int>(groups.size());
        groups.emplace_back();
      }
      groups[group_of[root]].push_back(s);
    }

    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(S, eam.mat.rows());
    bool ok = true;
    for (const auto& g : groups) {
      std::vector<int> rows;
      for (int row = 0; row < n; ++row)
        for (int s : g)
          if (block(row, s) != 0.0) {
            rows.push_back(row);
            break;
          }
      if (g.size() == 1) {
        for (int row : rows) inv(g[0], static_cast<long>(b) * n + row) = 1.0;
        continue;
      }
      Eigen::MatrixXd sub(rows.size(), g.size());
      for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < g.size(); ++j) sub(i, j) = block(rows[i], g[j]);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub);
      const auto& sv = svd.singularValues();
      if (sv.size() < static_cast<long>(g.size()) || sv[sv.size() - 1] <= 1e-10 * sv[0]) {
        ok = false;
        break;
      }
      const Eigen::MatrixXd pinv = (sub.transpose() * sub).ldlt().solve(sub.transpose());
      for (size_t j = 0; j < g.size(); ++j)
        for (size_t i = 0; i < rows.size(); ++i)
          inv(g[j], static_cast<long>(b) * n + rows[i]) = pinv(j, i);
    }
    if (!ok) continue;
    const double norm = star_to_one_norm(inv, n);
    if (norm < best_norm - 1e-12) {
      best_norm = norm;
      best = std::move(inv);
    }
  }
  if (best.size() == 0)
    throw UnsupportedError("no action sequence separates the reachable states at step " +
                           std::to_string(h));
  return verify_generalized_inverse(pomdp, h, m, best, "block");
}

InverseCertificate lift_inverse(const InverseCertificate& cert, const TabularPOMDP& pomdp,
                                int anchor_action) {
  if (!cert.valid) throw PreconditionError("cannot lift an invalid certificate");
  const int O = pomdp.num_observations(), A = pomdp.num_actions(), m = cert.m;
  if (cert.h > pomdp.horizon() - m) throw ShapeError("lifted window does not fit the horizon");
  if (anchor_action < 0 || anchor_action >= A) throw ShapeError("anchor action out of range");
  const long n_old = ipow(O, m), blocks_old = ipow(A, m - 1);
  const long n_new = n_old * O;
  Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(cert.inverse.rows(), blocks_old * A * n_new);
  for (long a = 0; a < blocks_old; ++a)
    for (long o = 0; o < n_old; ++o) {
      const auto col = cert.inverse.col(a * n_old + o);
      if ((col.array() == 0.0).all()) continue;
      for (int o2 = 0; o2 < O; ++o2)
        lifted.col((a * A + anchor_action) * n_new + o * O + o2) = col;
    }
  return verify_generalized_inverse(pomdp, cert.h, m + 1, lifted, "lifted");
}

CertificateSet certify(const TabularPOMDP& pomdp, int m) {
  CertificateSet set;
  set.m = m;
  set.valid = true;
  for (int h = 1; h <= pomdp.horizon() - m + 1; ++h) {
    set.steps.push_back(construct_block_inverse(pomdp, h, m));
    set.inverse_alpha = std::max(set.inverse_alpha, set.steps.back().norm);
    set.valid = set.valid && set.steps.back().valid;
  }
  return set;
}

TabularPOMDP random_revealing_pomdp(int S, int O, int A, int H, std::uint64_t seed,
                                    double diagonal) {
  if (O < S) throw ParameterError("random revealing models need O >= S");
  if (!(diagonal > 0 && diagonal <= 1)) throw ParameterError("diagonal weight in (0, 1]");
  std::vector<std::string> sl, ol, al;
  for (int s = 0; s < S; ++s) sl.push_back("s" + std::to_string(s));
  for (int o = 0; o < O; ++o) ol.push_back("o" + std::to_string(o));
  for (int a = 0; a < A; ++a) al.push_back("a" + std::to_string(a));
  TabularPOMDP p(H, sl, ol, al);
  Rng rng(seed);
  std::exponential_distribution<double> expo(1.0);
  auto simplex = [&](int n) {
    std::vector<double> w(n);
    double total = 0;
    for (auto& x : w) total += x = expo(rng);
    for (auto& x : w) x /= total;
    return w;
  };
  const auto init = simplex(S);
  for (int s = 0; s < S; ++s) p.set_initial(s, init[s]);
  for (int h = 1; h <= H; ++h)
    for (int s = 0; s < S; ++s) {
      const auto noise = simplex(O);
      for (int o = 0; o < O; ++o)
        p.set_emission(h, s, o, (1 - diagonal) * noise[o] + (o == s ? diagonal : 0.0));
      if (h == H) continue;
      for (int a = 0; a < A; ++a) {
        const auto next = simplex(S);
        for (int s2 = 0; s2 < S; ++s2) p.set_transition(h, s, a, s2, next[s2]);
      }
    }
  for (int o = 0; o < O; ++o)
    for (int a = 0; a < A; ++a) p.set_reward(H, o, a, uniform01(rng));
  p.validate();
  return p;
}

void write_certificates(std::ostream& out, const CertificateSet& set, double claimed_bound,
                        bool include_matrices) {
  out << "format revlab-certificates\nversion 1\n";
  out << "window " << set.m << '\n';
  out << "claimed-bound " << format_double(claimed_bound) << '\n';
  out << "inverse-alpha " << format_double(set.inverse_alpha) << '\n';
  out << "within-bound " << (set.inverse_alpha <= claimed_bound + kResidualTol ? 1 : 0) << '\n';
  out << "valid " << (set.valid ? 1 : 0) << '\n';
  for (const auto& c : set.steps) {
    out << "step " << c.h << " tag " << c.tag << " norm " << format_double(c.norm)
        << " residual " << format_double(c.residual) << " valid " << (c.valid ? 1 : 0) << '\n';
    if (!include_matrices) continue;
    out << "inverse " << c.h << ' ' << c.inverse.rows() << ' ' << c.inverse.cols() << '\n';
    for (long i = 0; i < c.inverse.rows(); ++i) {
      for (long j = 0; j < c.inverse.cols(); ++j)
        out << (j ? " " : "") << format_double(c.inverse(i, j));
      out << '\n';
    }
  }
  out << "end\n";
}

}  // namespace revlab

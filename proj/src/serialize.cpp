#include "revlab/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace revlab {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  double x = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), x);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw ShapeError("bad number '" + token + "'");
  return x;
}

namespace {

void write_labels(std::ostream& out, const char* kind, const std::vector<std::string>& labels) {
  for (size_t i = 0; i < labels.size(); ++i) out << kind << ' ' << i << ' ' << labels[i] << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next non-empty, non-comment line split on whitespace.
  std::vector<std::string> line() {
    std::string text;
    while (std::getline(in_, text)) {
      ++lineno_;
      if (text.empty() || text[0] == '#') continue;
      std::istringstream ss(text);
      std::vector<std::string> tok;
      for (std::string t; ss >> t;) tok.push_back(t);
      if (!tok.empty()) return tok;
    }
    fail("unexpected end of input");
  }

  std::vector<std::string> expect(const std::string& key, size_t count) {
    auto tok = line();
    if (tok[0] != key) fail("expected '" + key + "', found '" + tok[0] + "'");
    if (tok.size() != count + 1) fail("'" + key + "' needs " + std::to_string(count) + " fields");
    return tok;
  }

  int integer(const std::string& s) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail("bad integer '" + s + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& why) {
    throw ShapeError("pomdp text line " + std::to_string(lineno_) + ": " + why);
  }

 private:
  std::istream& in_;
  int lineno_ = 0;
};

}  // namespace

void save_pomdp(std::ostream& out, const TabularPOMDP& m) {
  const int H = m.horizon(), S = m.num_states(), O = m.num_observations(), A = m.num_actions();
  for (const auto* labels : {&m.state_labels(), &m.observation_labels(), &m.action_labels()})
    for (const auto& l : *labels)
      if (l.empty() || l.find_first_of(" \t\n") != std::string::npos)
        throw ShapeError("labels must be non-empty and free of whitespace: '" + l + "'");

  out << "format revlab-pomdp\nversion " << kPomdpFormatVersion << '\n';
  out << "horizon " << H << "\nstates " << S << "\nobservations " << O << "\nactions " << A
      << '\n';
  write_labels(out, "state", m.state_labels());
  write_labels(out, "observation", m.observation_labels());
  write_labels(out, "action", m.action_labels());
  out << "initial";
  for (int s = 0; s < S; ++s) out << ' ' << format_double(m.initial(s));
  out << '\n';
  for (int h = 1; h <= H; ++h) {
    out << "mask " << h << ' ';
    for (int s = 0; s < S; ++s) out << (m.masked(h, s) ? '1' : '0');
    out << '\n';
  }
  for (int h = 1; h <= H; ++h)
    for (int s = 0; s < S; ++s) {
      out << "emission " << h << ' ' << s;
      for (int o = 0; o < O; ++o) out << ' ' << format_double(m.emission_raw(h, s, o));
      out << '\n';
    }
  for (int h = 1; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        out << "transition " << h << ' ' << s << ' ' << a;
        for (int t = 0; t < S; ++t) out << ' ' << format_double(m.transition_raw(h, s, a, t));
        out << '\n';
      }
  for (int h = 1; h <= H; ++h)
    for (int o = 0; o < O; ++o) {
      out << "reward " << h << ' ' << o;
      for (int a = 0; a < A; ++a) out << ' ' << format_double(m.reward(h, o, a));
      out << '\n';
    }
  out << "end\n";
}

TabularPOMDP load_pomdp(std::istream& in) {
  Reader r(in);
  if (r.expect("format", 1)[1] != "revlab-pomdp") r.fail("not a revlab-pomdp file");
  const int version = r.integer(r.expect("version", 1)[1]);
  if (version != kPomdpFormatVersion) r.fail("unsupported version " + std::to_string(version));
  const int H = r.integer(r.expect("horizon", 1)[1]);
  const int S = r.integer(r.expect("states", 1)[1]);
  const int O = r.integer(r.expect("observations", 1)[1]);
  const int A = r.integer(r.expect("actions", 1)[1]);
  if (H < 1 || S < 1 || O < 1 || A < 1) r.fail("dimensions must be positive");

  auto labels = [&](const char* kind, int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) {
      auto tok = r.expect(kind, 2);
      if (r.integer(tok[1]) != i) r.fail(std::string(kind) + " labels out of order");
      out.push_back(tok[2]);
    }
    return out;
  };
  auto states = labels("state", S);
  auto observations = labels("observation", O);
  auto actions = labels("action", A);
  TabularPOMDP m(H, std::move(states), std::move(observations), std::move(actions));

  auto tok = r.expect("initial", S);
  for (int s = 0; s < S; ++s) m.set_initial(s, parse_double(tok[1 + s]));
  for (int h = 1; h <= H; ++h) {
    tok = r.expect("mask", 2);
    if (r.integer(tok[1]) != h || static_cast<int>(tok[2].size()) != S) r.fail("bad mask line");
    for (int s = 0; s < S; ++s) {
      if (tok[2][s] != '0' && tok[2][s] != '1') r.fail("mask bits must be 0 or 1");
      m.set_masked(h, s, tok[2][s] == '1');
    }
  }
  for (int h = 1; h <= H; ++h)
    for (int s = 0; s < S; ++s) {
      tok = r.expect("emission", 2 + O);
      if (r.integer(tok[1]) != h || r.integer(tok[2]) != s) r.fail("emission rows out of order");
      for (int o = 0; o < O; ++o) m.set_emission(h, s, o, parse_double(tok[3 + o]));
    }
  for (int h = 1; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        tok = r.expect("transition", 3 + S);
        if (r.integer(tok[1]) != h || r.integer(tok[2]) != s || r.integer(tok[3]) != a)
          r.fail("transition rows out of order");
        for (int t = 0; t < S; ++t) m.set_transition(h, s, a, t, parse_double(tok[4 + t]));
      }
  for (int h = 1; h <= H; ++h)
    for (int o = 0; o < O; ++o) {
      tok = r.expect("reward", 2 + A);
      if (r.integer(tok[1]) != h || r.integer(tok[2]) != o) r.fail("reward rows out of order");
      for (int a = 0; a < A; ++a) m.set_reward(h, o, a, parse_double(tok[3 + a]));
    }
  r.expect("end", 0);
  return m;
}

std::string pomdp_to_string(const TabularPOMDP& m) {
  std::ostringstream ss;
  save_pomdp(ss, m);
  return ss.str();
}

TabularPOMDP pomdp_from_string(const std::string& text) {
  std::istringstream ss(text);
  return load_pomdp(ss);
}

void save_pomdp_file(const std::string& path, const TabularPOMDP& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  save_pomdp(f, m);
}

TabularPOMDP load_pomdp_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return load_pomdp(f);
}

}  // namespace revlab

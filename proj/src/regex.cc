#include "ordo/regex.h"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>

#include <fmt/format.h>

namespace ordo::regex {

struct Regex::Node {
  Kind kind;
  char sym = 0;
  bool nullable = false;
  std::vector<Regex> kids;
};

namespace {

std::shared_ptr<const Regex::Node> make_node(Regex::Kind k, char sym,
                                             bool nullable,
                                             std::vector<Regex> kids) {
  auto n = std::make_shared<Regex::Node>();
  n->kind = k;
  n->sym = sym;
  n->nullable = nullable;
  n->kids = std::move(kids);
  return n;
}

const std::shared_ptr<const Regex::Node>& empty_node() {
  static const auto n = make_node(Regex::Kind::Empty, 0, false, {});
  return n;
}

const std::shared_ptr<const Regex::Node>& eps_node() {
  static const auto n = make_node(Regex::Kind::Eps, 0, true, {});
  return n;
}

}  // namespace

Regex::Regex() : node_(empty_node()) {}

Regex Regex::empty() { return Regex(empty_node()); }
Regex Regex::eps() { return Regex(eps_node()); }
Regex Regex::sym(char a) { return Regex(make_node(Kind::Sym, a, false, {})); }

Regex Regex::cat(const Regex& a, const Regex& b) {
  if (a.is_empty() || b.is_empty()) return empty();
  if (a.kind() == Kind::Eps) return b;
  if (b.kind() == Kind::Eps) return a;
  if (a.kind() == Kind::Cat) return cat(a.children()[0], cat(a.children()[1], b));
  return Regex(make_node(Kind::Cat, 0, nullable(a) && nullable(b), {a, b}));
}

Regex Regex::alt(const Regex& a, const Regex& b) { return alt(std::vector{a, b}); }

Regex Regex::alt(std::vector<Regex> rs) {
  std::vector<Regex> flat;
  for (auto& r : rs) {
    if (r.kind() == Kind::Alt) {
      flat.insert(flat.end(), r.children().begin(), r.children().end());
    } else if (!r.is_empty()) {
      flat.push_back(std::move(r));
    }
  }
  std::sort(flat.begin(), flat.end());
  flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
  // eps is absorbed by any other nullable alternative
  bool other_nullable = std::any_of(flat.begin(), flat.end(), [](const Regex& r) {
    return r.kind() != Kind::Eps && nullable(r);
  });
  if (other_nullable) {
    std::erase_if(flat, [](const Regex& r) { return r.kind() == Kind::Eps; });
  }
  if (flat.empty()) return empty();
  if (flat.size() == 1) return flat.front();
  bool n = std::any_of(flat.begin(), flat.end(), [](const Regex& r) { return nullable(r); });
  return Regex(make_node(Kind::Alt, 0, n, std::move(flat)));
}

Regex Regex::star(const Regex& r) {
  switch (r.kind()) {
    case Kind::Empty:
    case Kind::Eps:
      return eps();
    case Kind::Star:
      return r;
    case Kind::Alt: {
      auto kids = r.children();
      if (kids.front().kind() == Kind::Eps) {
        return star(alt(std::vector<Regex>(kids.begin() + 1, kids.end())));
      }
      break;
    }
    default:
      break;
  }
  return Regex(make_node(Kind::Star, 0, true, {r}));
}

Regex::Kind Regex::kind() const { return node_->kind; }
char Regex::symbol() const { return node_->sym; }
std::span<const Regex> Regex::children() const { return node_->kids; }

std::strong_ordering operator<=>(const Regex& a, const Regex& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.kind() <=> b.kind(); c != 0) return c;
  if (auto c = a.symbol() <=> b.symbol(); c != 0) return c;
  auto ka = a.children(), kb = b.children();
  return std::lexicographical_compare_three_way(ka.begin(), ka.end(), kb.begin(),
                                                kb.end());
}

std::set<char> Regex::symbols() const {
  std::set<char> out;
  std::vector<const Regex*> todo{this};
  while (!todo.empty()) {
    const Regex* r = todo.back();
    todo.pop_back();
    if (r->kind() == Kind::Sym) out.insert(r->symbol());
    for (const auto& k : r->children()) todo.push_back(&k);
  }
  return out;
}

namespace {

int precedence(Regex::Kind k) {
  switch (k) {
    case Regex::Kind::Alt:
      return 0;
    case Regex::Kind::Cat:
      return 1;
    default:
      return 2;
  }
}

void print(const Regex& r, int ctx, std::string& out) {
  bool parens = precedence(r.kind()) < ctx;
  if (parens) out += '(';
  switch (r.kind()) {
    case Regex::Kind::Empty:
      out += '0';
      break;
    case Regex::Kind::Eps:
      out += "eps";
      break;
    case Regex::Kind::Sym:
      // keep a literal e·p·s sequence from reading back as the keyword
      if (r.symbol() == 's' && out.ends_with("ep")) out += ' ';
      out += r.symbol();
      break;
    case Regex::Kind::Cat:
      print(r.children()[0], 1, out);
      print(r.children()[1], 1, out);
      break;
    case Regex::Kind::Alt: {
      bool first = true;
      for (const auto& k : r.children()) {
        if (!first) out += '|';
        first = false;
        print(k, 1, out);
      }
      break;
    }
    case Regex::Kind::Star:
      print(r.children()[0], 2, out);
      out += '*';
      break;
  }
  if (parens) out += ')';
}

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Regex run() {
    Regex r = alternation();
    skip();
    if (pos_ != s_.size()) fail(fmt::format("unexpected '{}'", s_[pos_]));
    return r;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw SyntaxError(pos_, fmt::format("regex: {} at offset {}", msg, pos_));
  }

  bool at_atom() {
    skip();
    if (pos_ >= s_.size()) return false;
    char c = s_[pos_];
    return std::isalpha(static_cast<unsigned char>(c)) || c == '0' || c == '(';
  }

  Regex alternation() {
    std::vector<Regex> alts{concatenation()};
    skip();
    while (pos_ < s_.size() && s_[pos_] == '|') {
      ++pos_;
      alts.push_back(concatenation());
      skip();
    }
    return Regex::alt(std::move(alts));
  }

  Regex concatenation() {
    // an empty operand is an error; the empty word is written eps
    if (!at_atom()) fail(pos_ < s_.size() ? fmt::format("unexpected '{}'", s_[pos_]) : "missing operand");
    Regex acc = starred();
    while (at_atom()) acc = Regex::cat(acc, starred());
    return acc;
  }

  Regex starred() {
    Regex r = atom();
    skip();
    while (pos_ < s_.size() && s_[pos_] == '*') {
      ++pos_;
      r = Regex::star(r);
      skip();
    }
    return r;
  }

  Regex atom() {
    skip();
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Regex r = alternation();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return r;
    }
    if (c == '0') {
      ++pos_;
      return Regex::empty();
    }
    if (s_.substr(pos_, 3) == "eps") {
      pos_ += 3;
      return Regex::eps();
    }
    ++pos_;
    return Regex::sym(c);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string Regex::to_string() const {
  std::string out;
  print(*this, 0, out);
  return out;
}

Regex parse(std::string_view text) { return Parser(text).run(); }

StateBudgetExceeded::StateBudgetExceeded(std::size_t budget)
    : std::runtime_error(fmt::format("automaton exceeds state budget of {}", budget)) {}

bool nullable(const Regex& r) { return r.node_->nullable; }

Regex derivative(const Regex& r, char a) {
  switch (r.kind()) {
    case Regex::Kind::Empty:
    case Regex::Kind::Eps:
      return Regex::empty();
    case Regex::Kind::Sym:
      return r.symbol() == a ? Regex::eps() : Regex::empty();
    case Regex::Kind::Cat: {
      const Regex& head = r.children()[0];
      const Regex& tail = r.children()[1];
      Regex d = Regex::cat(derivative(head, a), tail);
      return nullable(head) ? Regex::alt(d, derivative(tail, a)) : d;
    }
    case Regex::Kind::Alt: {
      std::vector<Regex> ds;
      for (const auto& k : r.children()) ds.push_back(derivative(k, a));
      return Regex::alt(std::move(ds));
    }
    case Regex::Kind::Star:
      return Regex::cat(derivative(r.children()[0], a), r);
  }
  return Regex::empty();
}

bool matches(const Regex& r, std::string_view word) {
  Regex cur = r;
  for (char a : word) {
    cur = derivative(cur, a);
    if (cur.is_empty()) return false;
  }
  return nullable(cur);
}

int Dfa::symbol_index(char a) const {
  auto it = std::lower_bound(alphabet.begin(), alphabet.end(), a);
  if (it == alphabet.end() || *it != a) return -1;
  return static_cast<int>(it - alphabet.begin());
}

bool Dfa::accepts(std::string_view word) const {
  int q = start;
  for (char a : word) {
    int i = symbol_index(a);
    if (i < 0) return false;
    q = delta[q][i];
  }
  return accepting[q];
}

Dfa to_dfa(const Regex& r, const std::set<char>& alphabet, std::size_t budget) {
  Dfa d;
  d.alphabet.assign(alphabet.begin(), alphabet.end());
  std::map<Regex, int> ids;
  std::vector<Regex> states;
  auto intern = [&](const Regex& s) {
    auto [it, fresh] = ids.emplace(s, static_cast<int>(states.size()));
    if (fresh) {
      if (states.size() >= budget) throw StateBudgetExceeded(budget);
      states.push_back(s);
      d.accepting.push_back(nullable(s));
      d.delta.emplace_back(d.alphabet.size(), -1);
    }
    return it->second;
  };
  d.start = intern(r);
  for (std::size_t q = 0; q < states.size(); ++q) {
    for (std::size_t i = 0; i < d.alphabet.size(); ++i) {
      int next = intern(derivative(states[q], d.alphabet[i]));
      d.delta[q][i] = next;
    }
  }
  return d;
}

Dfa to_dfa(const Regex& r, std::size_t budget) { return to_dfa(r, r.symbols(), budget); }

Regex from_dfa(const Dfa& d) {
  const int n = static_cast<int>(d.size());
  const int k = static_cast<int>(d.alphabet.size());

  std::vector<bool> reach(n, false), coreach(n, false);
  std::vector<int> todo{d.start};
  reach[d.start] = true;
  while (!todo.empty()) {
    int q = todo.back();
    todo.pop_back();
    for (int i = 0; i < k; ++i) {
      int p = d.delta[q][i];
      if (!reach[p]) {
        reach[p] = true;
        todo.push_back(p);
      }
    }
  }
  for (int q = 0; q < n; ++q) coreach[q] = d.accepting[q];
  for (bool changed = true; changed;) {
    changed = false;
    for (int q = 0; q < n; ++q) {
      if (coreach[q]) continue;
      for (int i = 0; i < k; ++i) {
        if (coreach[d.delta[q][i]]) {
          coreach[q] = true;
          changed = true;
          break;
        }
      }
    }
  }
  if (!coreach[d.start]) return Regex::empty();

  // Generalized automaton: live states keep their indices, n is the fresh
  // start and n+1 the fresh final state.
  const int S = n, F = n + 1;
  std::vector<std::vector<Regex>> R(n + 2, std::vector<Regex>(n + 2));
  std::vector<int> live;
  for (int q = 0; q < n; ++q) {
    if (!(reach[q] && coreach[q])) continue;
    live.push_back(q);
    if (d.accepting[q]) R[q][F] = Regex::eps();
    for (int i = 0; i < k; ++i) {
      int p = d.delta[q][i];
      if (reach[p] && coreach[p]) R[q][p] = Regex::alt(R[q][p], Regex::sym(d.alphabet[i]));
    }
  }
  R[S][d.start] = Regex::eps();

  std::vector<int> remaining = live;
  while (!remaining.empty()) {
    // Eliminate the state with the fewest paths through it.
    std::size_t best = 0;
    long best_cost = -1;
    for (std::size_t idx = 0; idx < remaining.size(); ++idx) {
      int q = remaining[idx];
      long in = !R[S][q].is_empty(), out = !R[q][F].is_empty();
      for (int p : remaining) {
        if (p == q) continue;
        in += !R[p][q].is_empty();
        out += !R[q][p].is_empty();
      }
      if (best_cost < 0 || in * out < best_cost) {
        best_cost = in * out;
        best = idx;
      }
    }
    int q = remaining[best];
    remaining.erase(remaining.begin() + static_cast<long>(best));
    Regex loop = Regex::star(R[q][q]);
    std::vector<int> sources = remaining, targets = remaining;
    sources.push_back(S);
    targets.push_back(F);
    for (int i : sources) {
      if (R[i][q].is_empty()) continue;
      for (int j : targets) {
        if (R[q][j].is_empty()) continue;
        R[i][j] = Regex::alt(R[i][j], Regex::cat(R[i][q], Regex::cat(loop, R[q][j])));
      }
    }
  }
  return R[S][F];
}

namespace {

std::set<char> joint_alphabet(const Regex& a, const Regex& b) {
  auto s = a.symbols();
  auto t = b.symbols();
  s.insert(t.begin(), t.end());
  return s;
}

}  // namespace

bool includes(const Regex& big, const Regex& small, std::size_t budget) {
  if (big == small || small.is_empty()) return true;
  auto sigma = joint_alphabet(big, small);
  Dfa ds = to_dfa(small, sigma, budget);
  Dfa db = to_dfa(big, sigma, budget);
  std::set<std::pair<int, int>> seen{{ds.start, db.start}};
  std::deque<std::pair<int, int>> todo{{ds.start, db.start}};
  while (!todo.empty()) {
    auto [p, q] = todo.front();
    todo.pop_front();
    if (ds.accepting[p] && !db.accepting[q]) return false;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      std::pair<int, int> next{ds.delta[p][i], db.delta[q][i]};
      if (seen.insert(next).second) todo.push_back(next);
    }
  }
  return true;
}

bool equivalent(const Regex& a, const Regex& b, std::size_t budget) {
  return a == b || (includes(a, b, budget) && includes(b, a, budget));
}

Regex product_derivative(const Regex& num, const Regex& den, std::size_t budget) {
  auto sigma = joint_alphabet(num, den);
  Dfa dn = to_dfa(num, sigma, budget);
  Dfa dd = to_dfa(den, sigma, budget);
  const std::size_t k = sigma.size();

  // States of num reachable by some word of den.
  std::set<int> from;
  std::set<std::pair<int, int>> seen{{dn.start, dd.start}};
  std::deque<std::pair<int, int>> todo{{dn.start, dd.start}};
  while (!todo.empty()) {
    auto [p, q] = todo.front();
    todo.pop_front();
    if (dd.accepting[q]) from.insert(p);
    for (std::size_t i = 0; i < k; ++i) {
      std::pair<int, int> next{dn.delta[p][i], dd.delta[q][i]};
      if (seen.insert(next).second) todo.push_back(next);
    }
  }
  if (from.empty()) {
    std::vector<Regex> syms;
    for (char a : sigma) syms.push_back(Regex::sym(a));
    return Regex::star(Regex::alt(std::move(syms)));
  }

  // Subset construction; a subset accepts when all of its members do.
  Dfa z;
  z.alphabet.assign(sigma.begin(), sigma.end());
  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> subsets;
  auto intern = [&](std::vector<int> s) {
    auto [it, fresh] = ids.emplace(s, static_cast<int>(subsets.size()));
    if (fresh) {
      if (subsets.size() >= budget) throw StateBudgetExceeded(budget);
      bool acc = std::all_of(s.begin(), s.end(), [&](int q) { return dn.accepting[q]; });
      z.accepting.push_back(acc);
      z.delta.emplace_back(k, -1);
      subsets.push_back(std::move(s));
    }
    return it->second;
  };
  z.start = intern(std::vector<int>(from.begin(), from.end()));
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    for (std::size_t i = 0; i < k; ++i) {
      std::set<int> next;
      for (int q : subsets[s]) next.insert(dn.delta[q][i]);
      int id = intern(std::vector<int>(next.begin(), next.end()));
      z.delta[s][i] = id;
    }
  }
  return from_dfa(z);
}

}  // namespace ordo::regex

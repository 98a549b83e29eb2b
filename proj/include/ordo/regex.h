#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ordo::regex {

// Regular expressions over single-character symbols. Every value is built
// through the smart constructors, so two regexes that differ only by the
// unit/zero laws, associativity, or ACI of alternation compare equal.
class Regex {
 public:
  enum class Kind { Empty, Eps, Sym, Cat, Alt, Star };

  Regex();  // the empty language

  static Regex empty();
  static Regex eps();
  static Regex sym(char a);
  static Regex cat(const Regex& a, const Regex& b);
  static Regex alt(const Regex& a, const Regex& b);
  static Regex alt(std::vector<Regex> rs);
  static Regex star(const Regex& r);

  Kind kind() const;
  char symbol() const;
  std::span<const Regex> children() const;

  bool is_empty() const { return kind() == Kind::Empty; }
  std::set<char> symbols() const;
  std::string to_string() const;

  friend std::strong_ordering operator<=>(const Regex& a, const Regex& b);
  friend bool nullable(const Regex& r);
  friend bool operator==(const Regex& a, const Regex& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 struct Node;

 private:
  explicit Regex(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t offset, const std::string& msg)
      : std::runtime_error(msg), offset(offset) {}
  std::size_t offset;
};

class StateBudgetExceeded : public std::runtime_error {
 public:
  explicit StateBudgetExceeded(std::size_t budget);
};

inline constexpr std::size_t kDefaultStateBudget = 20000;

// Grammar: alt := cat ('|' cat)* ; cat := star* ; star := atom '*'* ;
// atom := letter | 'eps' | '0' | '(' alt ')'. An empty cat is eps; `0` is
// the empty language.
Regex parse(std::string_view text);

bool nullable(const Regex& r);
Regex derivative(const Regex& r, char a);
bool matches(const Regex& r, std::string_view word);

struct Dfa {
  std::vector<char> alphabet;           // sorted, distinct
  std::vector<std::vector<int>> delta;  // delta[state][symbol index]
  std::vector<bool> accepting;
  int start = 0;

  std::size_t size() const { return accepting.size(); }
  int symbol_index(char a) const;  // -1 outside the alphabet
  bool accepts(std::string_view word) const;
};

Dfa to_dfa(const Regex& r, const std::set<char>& alphabet,
           std::size_t budget = kDefaultStateBudget);
Dfa to_dfa(const Regex& r, std::size_t budget = kDefaultStateBudget);

// Reads a regex back from an automaton by state elimination.
Regex from_dfa(const Dfa& d);

// L(small) ⊆ L(big)
bool includes(const Regex& big, const Regex& small,
              std::size_t budget = kDefaultStateBudget);
bool equivalent(const Regex& a, const Regex& b,
                std::size_t budget = kDefaultStateBudget);

// The largest z with L(den)·z ⊆ L(num).
Regex product_derivative(const Regex& num, const Regex& den,
                         std::size_t budget = kDefaultStateBudget);

}  // namespace ordo::regex

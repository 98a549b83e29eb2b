#include <doctest.h>

#include "ordo/regex.h"
#include "support/regex_oracle.h"

using ordo::regex::Regex;
namespace rx = ordo::regex;

namespace {

Regex re(const char* s) { return rx::parse(s); }

}  // namespace

TEST_CASE("smart constructors normalize") {
  CHECK(Regex::cat(Regex::empty(), re("r")).is_empty());
  CHECK(Regex::cat(Regex::eps(), re("r")) == re("r"));
  CHECK(Regex::cat(re("r"), Regex::eps()) == re("r"));
  CHECK(Regex::alt(re("w"), re("r")) == re("r|w"));
  CHECK(Regex::alt(re("r"), re("r")) == re("r"));
  CHECK(Regex::alt(Regex::empty(), re("r")) == re("r"));
  CHECK(Regex::star(re("r*")) == re("r*"));
  CHECK(Regex::star(Regex::empty()) == Regex::eps());
  CHECK(Regex::star(Regex::eps()) == Regex::eps());
  CHECK(re("(rw)c") == re("r(wc)"));
  CHECK(re("eps|r*") == re("r*"));
}

TEST_CASE("printing") {
  CHECK(re("(r|w)*c").to_string() == "(r|w)*c");
  CHECK(re("(w | r)* c").to_string() == "(r|w)*c");
  CHECK(re("r*").to_string() == "r*");
  CHECK(re("(rc)*").to_string() == "(rc)*");
  CHECK(re("eps").to_string() == "eps");
  CHECK(re("0").to_string() == "0");
  CHECK(re("eps|rc").to_string() == "eps|rc");
  CHECK(Regex::cat(Regex::sym('e'), Regex::cat(Regex::sym('p'), Regex::sym('s'))).to_string() == "ep s");
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(rx::parse("(r"), rx::SyntaxError);
  CHECK_THROWS_AS(rx::parse("r)"), rx::SyntaxError);
  CHECK_THROWS_AS(rx::parse("r+"), rx::SyntaxError);
  CHECK_THROWS_AS(rx::parse(""), rx::SyntaxError);
  CHECK_THROWS_AS(rx::parse("r|"), rx::SyntaxError);
  CHECK_THROWS_AS(rx::parse("()"), rx::SyntaxError);
}

TEST_CASE("print then parse is the identity on normalized regexes") {
  std::mt19937 rng(7);
  for (int i = 0; i < 300; ++i) {
    Regex r = oracle::build(*oracle::random_raw(rng, "rwc", 4));
    CHECK(rx::parse(r.to_string()) == r);
  }
}

TEST_CASE("nullable") {
  CHECK(rx::nullable(re("(r|w)*")));
  CHECK_FALSE(rx::nullable(re("c")));
  CHECK_FALSE(rx::nullable(re("(r|w)*c")));
}

TEST_CASE("derivative") {
  CHECK(rx::derivative(re("(r|w)*c"), 'r') == re("(r|w)*c"));
  CHECK(rx::derivative(re("c"), 'c') == Regex::eps());
  CHECK(rx::derivative(re("c"), 'r').is_empty());

  // Every derivative agrees with the oracle on its residual language.
  for (const auto& w : oracle::words("rwc", 5)) {
    if (w.empty()) continue;
    bool expected = oracle::member(re("(r|w)*c"), w);
    CHECK(oracle::member(rx::derivative(re("(r|w)*c"), w[0]), w.substr(1)) == expected);
  }
}

TEST_CASE("to_dfa") {
  std::set<char> rwc{'r', 'w', 'c'};
  auto c = rx::to_dfa(re("c"), rwc);
  CHECK(c.size() == 3);
  CHECK(c.accepts("c"));
  CHECK_FALSE(c.accepts("cc"));

  auto none = rx::to_dfa(Regex::empty(), rwc);
  CHECK(none.size() == 1);
  CHECK_FALSE(none.accepting[0]);

  auto rw = rx::to_dfa(re("(r|w)*"), rwc);
  CHECK(rw.size() == 2);
  CHECK(rw.accepting[rw.start]);
  CHECK(rw.delta[rw.start][rw.symbol_index('r')] == rw.start);
  CHECK(rw.delta[rw.start][rw.symbol_index('w')] == rw.start);
  int sink = rw.delta[rw.start][rw.symbol_index('c')];
  CHECK_FALSE(rw.accepting[sink]);

  for (const char* src : {"c", "(r|w)*", "(r|w)*c", "r*w|(cr)*"}) {
    auto d = rx::to_dfa(re(src), rwc);
    for (const auto& w : oracle::words("rwc", 4)) {
      CHECK(d.accepts(w) == oracle::member(re(src), w));
    }
  }
}

TEST_CASE("state budget") {
  CHECK_THROWS_AS(rx::to_dfa(re("(r|w)*r(r|w)(r|w)(r|w)(r|w)"), 8), rx::StateBudgetExceeded);
}

TEST_CASE("includes") {
  CHECK(rx::includes(re("(r|w)*"), re("r*")));
  CHECK(rx::includes(re("(r|w)*c"), Regex::cat(re("(r|w)*"), re("(r|w)*c"))));
  CHECK_FALSE(rx::includes(re("r"), re("w")));
  CHECK(rx::equivalent(re("(r|w)*"), re("(r*w*)*")));
}

TEST_CASE("from_dfa reads back the same language") {
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    Regex r = oracle::build(*oracle::random_raw(rng, "rwc", 4));
    CHECK(rx::equivalent(rx::from_dfa(rx::to_dfa(r)), r));
  }
}

TEST_CASE("product derivative") {
  auto e = re("(r|w)*c");
  auto by_r = rx::product_derivative(e, re("r*"));
  auto by_w = rx::product_derivative(e, re("w*"));
  CHECK(rx::equivalent(by_r, e));
  CHECK(rx::equivalent(by_w, e));
  CHECK(by_r.to_string() == "(r|w)*c");
  CHECK(rx::product_derivative(e, Regex::eps()) == e);
  CHECK(rx::product_derivative(re("rc"), re("r")) == re("c"));
  CHECK(rx::product_derivative(e, re("c")) == Regex::eps());
  CHECK(rx::product_derivative(re("c"), re("r")).is_empty());
  CHECK(rx::product_derivative(re("r"), re("r")) == Regex::eps());
}

TEST_CASE("includes agrees with brute force on random pairs") {
  std::mt19937 rng(20240901);
  auto ws = oracle::words("rwc", 6);
  int positives = 0;
  for (int i = 0; i < 250; ++i) {
    auto p = oracle::random_pair(rng, "rwc", 4);
    bool brute = true;
    for (const auto& w : ws) {
      if (oracle::member(*p.small, w) && !oracle::member(*p.big, w)) {
        brute = false;
        break;
      }
    }
    bool got = rx::includes(oracle::build(*p.big), oracle::build(*p.small));
    positives += got;
    CHECK(got == brute);
  }
  CHECK(positives > 50);
}

TEST_CASE("product derivative is sound and maximal on random pairs") {
  std::mt19937 rng(99);
  auto ws5 = oracle::words("rwc", 5);
  int tried = 0;
  while (tried < 100) {
    auto num = oracle::build(*oracle::random_raw(rng, "rwc", 4));
    auto den = oracle::build(*oracle::random_raw(rng, "rwc", 3));
    if (den.is_empty()) continue;
    ++tried;
    auto z = rx::product_derivative(num, den);
    CHECK(rx::includes(num, Regex::cat(den, z)));
    std::vector<std::string> den_words;
    for (const auto& u : ws5) {
      if (oracle::member(den, u)) den_words.push_back(u);
    }
    for (const auto& w : ws5) {
      if (oracle::member(z, w)) continue;
      bool refuted = false;
      for (const auto& u : den_words) {
        if (!oracle::member(num, u + w)) {
          refuted = true;
          break;
        }
      }
      CHECK_MESSAGE(refuted, "num=", num.to_string(), " den=", den.to_string(), " w=", w);
    }
  }
}

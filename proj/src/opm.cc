#include "ordo/opm.h"

#include <algorithm>

#include <fmt/format.h>

namespace ordo::opm {

FiniteOpm::FiniteOpm(std::string name, std::vector<std::string> names, int neutral,
                     std::vector<std::vector<int>> mul, std::vector<std::vector<bool>> leq)
    : name_(std::move(name)),
      names_(std::move(names)),
      neutral_(neutral),
      mul_(std::move(mul)),
      leq_(std::move(leq)) {}

int FiniteOpm::index(const Element& x) const {
  const auto* f = std::get_if<FiniteElement>(&x);
  if (!f || f->index < 0 || f->index >= static_cast<int>(names_.size())) {
    throw std::invalid_argument(fmt::format("element does not belong to OPM '{}'", name_));
  }
  return f->index;
}

std::optional<Element> FiniteOpm::mul(const Element& x, const Element& y) const {
  int r = mul_[index(x)][index(y)];
  if (r < 0) return std::nullopt;
  return FiniteElement{r};
}

bool FiniteOpm::leq(const Element& x, const Element& y) const {
  return leq_[index(x)][index(y)];
}

bool FiniteOpm::eq(const Element& x, const Element& y) const { return index(x) == index(y); }

bool FiniteOpm::residual_exists(const Element& x, const Element& y) const {
  return continuation(x, y).has_value();
}

std::optional<Element> FiniteOpm::continuation(const Element& x, const Element& y) const {
  std::vector<int> witnesses;
  for (int z = 0; z < static_cast<int>(names_.size()); ++z) {
    int p = mul_[index(x)][z];
    if (p >= 0 && leq_[p][index(y)]) witnesses.push_back(z);
  }
  for (int z : witnesses) {
    bool maximal = std::none_of(witnesses.begin(), witnesses.end(),
                                [&](int w) { return w != z && leq_[z][w] && !leq_[w][z]; });
    if (maximal) return FiniteElement{z};
  }
  return std::nullopt;
}

Element FiniteOpm::parse(std::string_view text) const {
  auto trimmed = text;
  while (!trimmed.empty() && trimmed.front() == ' ') trimmed.remove_prefix(1);
  while (!trimmed.empty() && trimmed.back() == ' ') trimmed.remove_suffix(1);
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
    if (names_[i] == trimmed) return FiniteElement{i};
  }
  throw SyntaxError(fmt::format("'{}' is not an element of OPM '{}' (expected one of {})",
                                trimmed, name_, fmt::join(names_, ", ")));
}

std::string FiniteOpm::print(const Element& x) const { return names_[index(x)]; }

std::vector<Element> FiniteOpm::carrier() const {
  std::vector<Element> out;
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) out.push_back(FiniteElement{i});
  return out;
}

namespace {

const regex::Regex& re(const Element& x) {
  const auto* r = std::get_if<regex::Regex>(&x);
  if (!r) throw std::invalid_argument("element does not belong to OPM 'regex'");
  return *r;
}

}  // namespace

std::optional<Element> RegexOpm::mul(const Element& x, const Element& y) const {
  return regex::Regex::cat(re(x), re(y));
}

bool RegexOpm::leq(const Element& x, const Element& y) const { return regex::includes(re(y), re(x)); }

bool RegexOpm::eq(const Element& x, const Element& y) const {
  return regex::equivalent(re(x), re(y));
}

bool RegexOpm::residual_exists(const Element& x, const Element& y) const {
  return continuation(x, y).has_value();
}

std::optional<Element> RegexOpm::continuation(const Element& x, const Element& y) const {
  // With x empty every z qualifies; the product derivative is then all words.
  auto z = regex::product_derivative(re(y), re(x));
  if (z.is_empty()) return std::nullopt;
  return z;
}

Element RegexOpm::parse(std::string_view text) const {
  try {
    return regex::parse(text);
  } catch (const regex::SyntaxError& e) {
    throw SyntaxError(e.what());
  }
}

std::string RegexOpm::print(const Element& x) const { return re(x).to_string(); }

std::optional<std::string> RegexOpm::reject_envelope(const Element& x) const {
  if (re(x).is_empty()) return "the empty language cannot index a resource";
  return std::nullopt;
}

const FiniteOpm& ownership() {
  // carrier order: eps, b, *
  static const FiniteOpm instance(
      "ownership", {"eps", "b", "*"}, 0,
      {
          {0, 1, 2},
          {1, 1, 2},
          {2, -1, -1},
      },
      {
          {true, true, false},
          {false, true, false},
          {false, false, true},
      });
  return instance;
}

const RegexOpm& regular() {
  static const RegexOpm instance;
  return instance;
}

const Opm* find(std::string_view name) {
  if (name == "regex") return &regular();
  if (name == "ownership") return &ownership();
  return nullptr;
}

std::vector<std::string_view> names() { return {"regex", "ownership"}; }

}  // namespace ordo::opm

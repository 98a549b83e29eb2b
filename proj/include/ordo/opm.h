#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ordo/regex.h"

namespace ordo::opm {

// An element of a finite carrier, by index into the instance's name table.
struct FiniteElement {
  int index = 0;
  auto operator<=>(const FiniteElement&) const = default;
};

using Element = std::variant<FiniteElement, regex::Regex>;

class SyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A decidable ordered partial monoid. Elements passed in must come from the
// same instance.
class Opm {
 public:
  virtual ~Opm() = default;

  virtual std::string_view name() const = 0;
  virtual Element neutral() const = 0;
  virtual std::optional<Element> mul(const Element& x, const Element& y) const = 0;
  virtual bool leq(const Element& x, const Element& y) const = 0;
  virtual bool eq(const Element& x, const Element& y) const = 0;

  // ∃z. x⊙z ≤ y
  virtual bool residual_exists(const Element& x, const Element& y) const = 0;

  // A canonical witness z for x⊙z ≤ y: the largest one for the regex
  // instance, the ≤-maximal one (earliest in carrier order on ties) for
  // finite instances.
  virtual std::optional<Element> continuation(const Element& x, const Element& y) const = 0;

  bool droppable(const Element& x) const { return leq(neutral(), x); }

  virtual Element parse(std::string_view text) const = 0;
  virtual std::string print(const Element& x) const = 0;

  // Why x may not index a fresh resource, if it may not.
  virtual std::optional<std::string> reject_envelope(const Element&) const {
    return std::nullopt;
  }
};

// A finite OPM given by its multiplication and order tables.
class FiniteOpm final : public Opm {
 public:
  // mul[i][j] is the index of i⊙j or -1; leq[i][j] decides i ≤ j.
  FiniteOpm(std::string name, std::vector<std::string> names, int neutral,
            std::vector<std::vector<int>> mul, std::vector<std::vector<bool>> leq);

  std::string_view name() const override { return name_; }
  Element neutral() const override { return FiniteElement{neutral_}; }
  std::optional<Element> mul(const Element& x, const Element& y) const override;
  bool leq(const Element& x, const Element& y) const override;
  bool eq(const Element& x, const Element& y) const override;
  bool residual_exists(const Element& x, const Element& y) const override;
  std::optional<Element> continuation(const Element& x, const Element& y) const override;
  Element parse(std::string_view text) const override;
  std::string print(const Element& x) const override;

  std::vector<Element> carrier() const;

 private:
  int index(const Element& x) const;

  std::string name_;
  std::vector<std::string> names_;
  int neutral_;
  std::vector<std::vector<int>> mul_;
  std::vector<std::vector<bool>> leq_;
};

// Regular languages under concatenation, ordered by inclusion. The carrier
// is the non-empty languages.
class RegexOpm final : public Opm {
 public:
  std::string_view name() const override { return "regex"; }
  Element neutral() const override { return regex::Regex::eps(); }
  std::optional<Element> mul(const Element& x, const Element& y) const override;
  bool leq(const Element& x, const Element& y) const override;
  bool eq(const Element& x, const Element& y) const override;
  bool residual_exists(const Element& x, const Element& y) const override;
  std::optional<Element> continuation(const Element& x, const Element& y) const override;
  Element parse(std::string_view text) const override;
  std::string print(const Element& x) const override;
  std::optional<std::string> reject_envelope(const Element& x) const override;
};

// The ownership instance: eps (discardable), b (borrowed), * (owned).
const FiniteOpm& ownership();
const RegexOpm& regular();

// Registry by name; nullptr when unknown.
const Opm* find(std::string_view name);
std::vector<std::string_view> names();
inline constexpr std::string_view kDefaultOpm = "regex";

}  // namespace ordo::opm

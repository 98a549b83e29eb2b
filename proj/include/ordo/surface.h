#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ordo/core.h"
#include "ordo/opm.h"

namespace ordo::surface {

// Byte offsets into the source, half open.
struct Span {
  std::size_t begin = 0, end = 0;
  bool contains(const Span& s) const { return begin <= s.begin && s.end <= end; }
};

struct LineCol {
  std::size_t line, col;  // 1-based; col counts code points
};
LineCol line_col(std::string_view source, std::size_t offset);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// A binder is a name, or `_` which can never be referenced.
struct Binder {
  std::string name;
  Span span;
};

// Inferable forms.
struct UnitE {};
struct NewE {
  opm::Element index;
};
struct OpE {
  opm::Element index;
  ExprPtr arg;
};
struct SplitE {
  opm::Element index;
  ExprPtr arg;
};
struct DropE {
  ExprPtr arg;
};
struct VarE {
  std::string name;
};
struct AppE {
  ExprPtr fn, arg;
};
struct PairE {
  ExprPtr first, second;
};
struct LetPairE {
  Binder first, second;
  ExprPtr head, body;
};
struct AnnE {
  ExprPtr expr;
  core::TypePtr type;
};
// `let x = e in b`, `let x : T = e in b`, and `e1; e2` (binder `_`, no
// annotation). The checker picks the binding mode.
struct LetE {
  Binder binder;
  core::TypePtr annotation;  // may be null
  ExprPtr bound, body;
  bool from_sequence = false;
};
// Checkable only. A pair pattern `\(a, b). e` stands for a fresh parameter
// eliminated by a let-pair; function definitions `f (a, b) = e` produce it.
struct LamE {
  Binder param;
  std::optional<std::pair<Binder, Binder>> pattern;
  ExprPtr body;
};

struct Expr {
  std::variant<UnitE, NewE, OpE, SplitE, DropE, VarE, AppE, PairE, LetPairE, AnnE, LetE, LamE> node;
  Span span;
};

struct ParseError {
  enum class Kind { UnexpectedToken, UnbalancedParenthesis, BadCharacter, BadIndex };
  Kind kind;
  Span span;
  std::string message;
  std::vector<std::string> expected;
};

const char* kind_name(ParseError::Kind k);  // "unexpected-token", ...

struct ParseResult {
  ExprPtr program;  // null iff errors is non-empty
  std::vector<ParseError> errors;
};

// Regex or other OPM indices inside `{...}` are read with `o`.
ParseResult parse(std::string_view source, const opm::Opm& o);

std::string pretty(const opm::Opm& o, const Expr& e);

// Structural equality up to renaming of bound variables; spans ignored.
bool alpha_equal(const opm::Opm& o, const Expr& a, const Expr& b);

// Every identifier spelled anywhere in e, bound or free.
void collect_identifiers(const Expr& e, std::vector<std::string>& out);

// Calls f on each direct subexpression.
template <class F>
void for_each_child(const Expr& e, F&& f) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, OpE> || std::is_same_v<N, SplitE> || std::is_same_v<N, DropE>) {
          f(*n.arg);
        } else if constexpr (std::is_same_v<N, AppE>) {
          f(*n.fn);
          f(*n.arg);
        } else if constexpr (std::is_same_v<N, PairE>) {
          f(*n.first);
          f(*n.second);
        } else if constexpr (std::is_same_v<N, LetPairE>) {
          f(*n.head);
          f(*n.body);
        } else if constexpr (std::is_same_v<N, AnnE>) {
          f(*n.expr);
        } else if constexpr (std::is_same_v<N, LetE>) {
          f(*n.bound);
          f(*n.body);
        } else if constexpr (std::is_same_v<N, LamE>) {
          f(*n.body);
        }
      },
      e.node);
}

}  // namespace ordo::surface

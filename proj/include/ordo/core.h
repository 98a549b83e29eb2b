#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>

#include "ordo/opm.h"

namespace ordo::core {

enum class Effect : std::uint8_t { Pure = 0, Impure = 1 };

inline Effect join(Effect a, Effect b) { return a == Effect::Impure ? a : b; }
inline bool subeffect(Effect a, Effect b) { return a <= b; }

// Abstraction/application modes: plain, unordered capture (°), right (>),
// left (<).
enum class Mode : std::uint8_t { Plain, Unordered, Right, Left };
// ⊗ and ⊙
enum class PairKind : std::uint8_t { Unordered, Ordered };

const char* mode_mark(Mode m);      // "", "°", ">", "<"
const char* mode_letter(Mode m);    // u, o, r, l
const char* pair_infix(PairKind k); // ox, .o

// ---------------------------------------------------------------- types

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct UnitType {};
struct TraceType {
  opm::Element index;
};
struct ArrowType {
  Mode mode;
  Effect effect;
  TypePtr param, result;
};
struct ProductType {
  PairKind kind;
  TypePtr first, second;
};

struct Type {
  std::variant<UnitType, TraceType, ArrowType, ProductType> node;
};

TypePtr unit_type();
TypePtr trace_type(opm::Element m);
TypePtr arrow_type(Mode mode, Effect e, TypePtr param, TypePtr result);
TypePtr product_type(PairKind kind, TypePtr first, TypePtr second);

bool unr(const Type& t);
bool ord(const Type& t);

// Structural, with indices compared by the OPM's semantic equality.
bool type_equal(const opm::Opm& o, const Type& a, const Type& b);

// Uses [m] for trace types; `surface` switches to the {m} notation.
std::string print_type(const opm::Opm& o, const Type& t, bool surface = false);

// ---------------------------------------------------------------- terms

struct Location {
  std::uint64_t id;
  auto operator<=>(const Location&) const = default;
};

struct Constant {
  enum class Kind { Unit, New, Op, Split, Drop } kind;
  opm::Element m1, m2;  // New/Op use m1; Split uses both
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Var {
  std::string name;
};
struct Lambda {
  Mode mode;
  std::string param;
  TermPtr body;
  TypePtr param_type;  // elaboration records it; optional for test builders
};
struct Apply {
  Mode mode;
  TermPtr fn, arg;
};
struct Pair {
  PairKind kind;
  TermPtr first, second;
};
struct LetPair {
  PairKind kind;
  std::string first, second;
  TermPtr head, body;
};

struct Term {
  std::variant<Constant, Location, Var, Lambda, Apply, Pair, LetPair> node;
};

TermPtr unit();
TermPtr constant(Constant c);
TermPtr new_(opm::Element m);
TermPtr op(opm::Element m);
TermPtr split(opm::Element m1, opm::Element m2);
TermPtr drop();
TermPtr loc(Location l);
TermPtr var(std::string x);
TermPtr lam(Mode mode, std::string x, TermPtr body, TypePtr param_type = nullptr);
TermPtr app(Mode mode, TermPtr fn, TermPtr arg);
TermPtr pair(PairKind kind, TermPtr a, TermPtr b);
TermPtr let_pair(PairKind kind, std::string x, std::string y, TermPtr head, TermPtr body);

std::set<std::string> fv(const Term& t);
bool is_value(const Term& t);

// M[V/x]; binders are renamed if they would capture a free variable of V.
TermPtr subst(const TermPtr& m, const TermPtr& v, const std::string& x);

std::map<Location, std::size_t> location_occurrences(const Term& t);

// The stable text format. A plain/°/< application of an abstraction is
// shown as a let, one per line.
std::string print_term(const opm::Opm& o, const Term& t);

}  // namespace ordo::core

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ordo/core.h"
#include "ordo/opm.h"

namespace ordo::context {

struct VarBinding {
  std::string name;
  core::TypePtr type;
};
struct LocBinding {
  core::Location loc;
  opm::Element index;
};
using Binding = std::variant<VarBinding, LocBinding>;

bool unr(const Binding& b);
bool binding_equal(const opm::Opm& o, const Binding& a, const Binding& b);
std::string print_binding(const opm::Opm& o, const Binding& b);

// Bunched typing contexts: ·, a binding, "Γ1, Γ2" and "Γ1 ∥ Γ2".
class Context {
 public:
  enum class Kind { Empty, Single, Seq, Par };

  Context();  // ·

  static Context empty() { return Context(); }
  static Context single(Binding b);
  static Context var(std::string x, core::TypePtr t);
  static Context loc(core::Location l, opm::Element m);
  static Context seq(Context a, Context b);
  static Context par(Context a, Context b);

  Kind kind() const;
  const Binding& binding() const;
  const Context& left() const;
  const Context& right() const;

  struct Node;

 private:
  explicit Context(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// A context with exactly one hole.
class Pattern {
 public:
  enum class Kind { Hole, SeqLeft, SeqRight, ParLeft, ParRight };

  Pattern();  // []

  static Pattern hole() { return Pattern(); }
  static Pattern seq(Pattern g, Context c);  // G, Γ
  static Pattern seq(Context c, Pattern g);  // Γ, G
  static Pattern par(Pattern g, Context c);  // G ∥ Γ
  static Pattern par(Context c, Pattern g);  // Γ ∥ G

  Kind kind() const { return kind_; }
  const Pattern& inner() const { return *inner_; }
  const Context& other() const { return other_; }

  Context fill(const Context& c) const;

 private:
  Kind kind_ = Kind::Hole;
  std::shared_ptr<const Pattern> inner_;
  Context other_;
};

struct GraphRep {
  std::vector<Binding> labels;
  std::set<std::pair<std::size_t, std::size_t>> edges;

  std::size_t size() const { return labels.size(); }
  bool has_edge(std::size_t a, std::size_t b) const { return edges.count({a, b}) > 0; }
};

struct Interp {
  GraphRep graph;                   // ordered bindings
  std::vector<Binding> unrestricted;  // a set, up to binding_equal
};

GraphRep graph_join(const GraphRep& a, const GraphRep& b);
GraphRep graph_union(const GraphRep& a, const GraphRep& b);

Interp interpret(const opm::Opm& o, const Context& c);

// Label-preserving bijections: iso requires equal edge sets, spans only
// E(a) ⊆ E(b).
bool iso(const opm::Opm& o, const GraphRep& a, const GraphRep& b);
bool spans(const opm::Opm& o, const GraphRep& a, const GraphRep& b);

bool equiv(const opm::Opm& o, const Context& a, const Context& b);
// a ≲ b: b imposes at least the ordering constraints of a.
bool subcontext(const opm::Opm& o, const Context& a, const Context& b);

std::set<std::string> dom(const Context& c);
bool is_unrestricted(const Context& c);  // every binding is unr

// Removes · by the unit laws.
Context simplify(const Context& c);

Context restrict(const Context& c, const std::set<std::string>& keep);

// Why the context is ill-formed, if it is.
std::optional<std::string> check_well_formed(const opm::Opm& o, const Context& c);

// Shape extractors for patterns, each defined up to ≃:
//   hole_first(G)  = Γ       when G ≃ ([], Γ)
//   hole_last(G)   = Γ       when G ≃ (Γ, [])
//   hole_beside(G) = Γ       when G ≃ ([] ∥ Γ)
//   hole_between(G) = (Γ1, Γ2) when G ≃ (Γ1, [], Γ2)
std::optional<Context> hole_first(const opm::Opm& o, const Pattern& g);
std::optional<Context> hole_last(const opm::Opm& o, const Pattern& g);
std::optional<Context> hole_beside(const opm::Opm& o, const Pattern& g);
std::optional<std::pair<Context, Context>> hole_between(const opm::Opm& o, const Pattern& g);

struct Decomposition {
  Pattern pattern;
  Context focus;
};

// Splits off the part of c a subterm with free variables `vars` may use,
// leaving a pattern for the rest. Absent when the ordered bindings of
// `vars` are interleaved with others.
std::optional<Decomposition> decompose(const opm::Opm& o, const Context& c,
                                       const std::set<std::string>& vars);

// Runtime-context utilities.
Context focus(const Context& c, core::Location l);
std::optional<std::vector<std::size_t>> unique_topological_ordering(const GraphRep& g);
std::optional<opm::Element> usage_projection(const opm::Opm& o, const Context& c);

std::string print(const opm::Opm& o, const Context& c);
std::string print(const opm::Opm& o, const Pattern& g);
std::string to_dot(const opm::Opm& o, const Interp& i, const std::string& title);

}  // namespace ordo::context

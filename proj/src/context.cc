#include "ordo/context.h"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>

#include <fmt/format.h>

namespace ordo::context {

bool unr(const Binding& b) {
  if (const auto* v = std::get_if<VarBinding>(&b)) return core::unr(*v->type);
  return false;
}

bool binding_equal(const opm::Opm& o, const Binding& a, const Binding& b) {
  if (a.index() != b.index()) return false;
  if (const auto* va = std::get_if<VarBinding>(&a)) {
    const auto& vb = std::get<VarBinding>(b);
    return va->name == vb.name && core::type_equal(o, *va->type, *vb.type);
  }
  const auto& la = std::get<LocBinding>(a);
  const auto& lb = std::get<LocBinding>(b);
  return la.loc == lb.loc && o.eq(la.index, lb.index);
}

namespace {

const core::Location kMarker{std::numeric_limits<std::uint64_t>::max()};

bool is_marker(const Binding& b) {
  const auto* l = std::get_if<LocBinding>(&b);
  return l && l->loc == kMarker;
}

}  // namespace

std::string print_binding(const opm::Opm& o, const Binding& b) {
  if (is_marker(b)) return "[]";
  if (const auto* v = std::get_if<VarBinding>(&b)) return v->name + " : " + core::print_type(o, *v->type);
  const auto& l = std::get<LocBinding>(b);
  return fmt::format("#{} : [{}]", l.loc.id, o.print(l.index));
}

// ---------------------------------------------------------------- contexts

struct Context::Node {
  Kind kind;
  Binding binding;
  Context left, right;
};

Context::Context() : node_(nullptr) {}

Context Context::single(Binding b) {
  return Context(std::make_shared<const Node>(Node{Kind::Single, std::move(b), {}, {}}));
}
Context Context::var(std::string x, core::TypePtr t) {
  return single(VarBinding{std::move(x), std::move(t)});
}
Context Context::loc(core::Location l, opm::Element m) { return single(LocBinding{l, std::move(m)}); }
Context Context::seq(Context a, Context b) {
  return Context(std::make_shared<const Node>(Node{Kind::Seq, {}, std::move(a), std::move(b)}));
}
Context Context::par(Context a, Context b) {
  return Context(std::make_shared<const Node>(Node{Kind::Par, {}, std::move(a), std::move(b)}));
}

Context::Kind Context::kind() const { return node_ ? node_->kind : Kind::Empty; }
const Binding& Context::binding() const { return node_->binding; }
const Context& Context::left() const { return node_->left; }
const Context& Context::right() const { return node_->right; }

Pattern::Pattern() = default;

Pattern Pattern::seq(Pattern g, Context c) {
  Pattern p;
  p.kind_ = Kind::SeqLeft;
  p.inner_ = std::make_shared<const Pattern>(std::move(g));
  p.other_ = std::move(c);
  return p;
}
Pattern Pattern::seq(Context c, Pattern g) {
  Pattern p = seq(std::move(g), std::move(c));
  p.kind_ = Kind::SeqRight;
  return p;
}
Pattern Pattern::par(Pattern g, Context c) {
  Pattern p = seq(std::move(g), std::move(c));
  p.kind_ = Kind::ParLeft;
  return p;
}
Pattern Pattern::par(Context c, Pattern g) {
  Pattern p = seq(std::move(g), std::move(c));
  p.kind_ = Kind::ParRight;
  return p;
}

Context Pattern::fill(const Context& c) const {
  switch (kind_) {
    case Kind::Hole:
      return c;
    case Kind::SeqLeft:
      return Context::seq(inner_->fill(c), other_);
    case Kind::SeqRight:
      return Context::seq(other_, inner_->fill(c));
    case Kind::ParLeft:
      return Context::par(inner_->fill(c), other_);
    case Kind::ParRight:
      return Context::par(other_, inner_->fill(c));
  }
  return c;
}

// ---------------------------------------------------------------- graphs

GraphRep graph_join(const GraphRep& a, const GraphRep& b) {
  GraphRep g = graph_union(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) g.edges.emplace(i, a.size() + j);
  }
  return g;
}

GraphRep graph_union(const GraphRep& a, const GraphRep& b) {
  GraphRep g = a;
  g.labels.insert(g.labels.end(), b.labels.begin(), b.labels.end());
  for (auto [i, j] : b.edges) g.edges.emplace(a.size() + i, a.size() + j);
  return g;
}

namespace {

void add_unrestricted(const opm::Opm& o, std::vector<Binding>& set, const Binding& b) {
  for (const auto& x : set) {
    if (binding_equal(o, x, b)) return;
  }
  set.push_back(b);
}

bool covers(const opm::Opm& o, const std::vector<Binding>& big, const std::vector<Binding>& small) {
  return std::all_of(small.begin(), small.end(), [&](const Binding& s) {
    return std::any_of(big.begin(), big.end(), [&](const Binding& b) { return binding_equal(o, b, s); });
  });
}

}  // namespace

Interp interpret(const opm::Opm& o, const Context& c) {
  switch (c.kind()) {
    case Context::Kind::Empty:
      return {};
    case Context::Kind::Single: {
      Interp i;
      if (unr(c.binding())) {
        i.unrestricted.push_back(c.binding());
      } else {
        i.graph.labels.push_back(c.binding());
      }
      return i;
    }
    case Context::Kind::Seq:
    case Context::Kind::Par: {
      Interp a = interpret(o, c.left());
      Interp b = interpret(o, c.right());
      Interp out;
      out.graph = c.kind() == Context::Kind::Seq ? graph_join(a.graph, b.graph)
                                                 : graph_union(a.graph, b.graph);
      out.unrestricted = std::move(a.unrestricted);
      for (const auto& u : b.unrestricted) add_unrestricted(o, out.unrestricted, u);
      return out;
    }
  }
  return {};
}

namespace {

// Searches label-preserving bijections f with (u,v) ∈ E(a) ⇒ (f u, f v) ∈
// E(b), and the converse too when `exact`.
bool embeds(const opm::Opm& o, const GraphRep& a, const GraphRep& b, bool exact) {
  const std::size_t n = a.size();
  if (n != b.size()) return false;
  if (exact ? a.edges.size() != b.edges.size() : a.edges.size() > b.edges.size()) return false;

  std::vector<const Binding*> reps;
  auto class_of = [&](const Binding& x) {
    for (std::size_t k = 0; k < reps.size(); ++k) {
      if (binding_equal(o, *reps[k], x)) return k;
    }
    reps.push_back(&x);
    return reps.size() - 1;
  };
  std::vector<std::size_t> ca(n), cb(n);
  for (std::size_t i = 0; i < n; ++i) ca[i] = class_of(a.labels[i]);
  for (std::size_t i = 0; i < n; ++i) cb[i] = class_of(b.labels[i]);
  {
    auto sa = ca, sb = cb;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
  }

  std::vector<std::size_t> in_a(n), out_a(n), in_b(n), out_b(n);
  for (auto [i, j] : a.edges) ++out_a[i], ++in_a[j];
  for (auto [i, j] : b.edges) ++out_b[i], ++in_b[j];

  std::vector<std::vector<std::size_t>> candidates(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w = 0; w < n; ++w) {
      if (ca[v] != cb[w]) continue;
      bool fits = exact ? (in_a[v] == in_b[w] && out_a[v] == out_b[w])
                        : (in_a[v] <= in_b[w] && out_a[v] <= out_b[w]);
      if (fits) candidates[v].push_back(w);
    }
    if (candidates[v].empty()) return false;
    std::sort(candidates[v].begin(), candidates[v].end(), [&](std::size_t x, std::size_t y) {
      return std::pair(in_b[x], out_b[x]) < std::pair(in_b[y], out_b[y]);
    });
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return candidates[x].size() < candidates[y].size();
  });

  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> f(n, kUnset);
  std::vector<bool> used(n, false);

  std::function<bool(std::size_t)> place = [&](std::size_t k) {
    if (k == n) return true;
    std::size_t v = order[k];
    for (std::size_t w : candidates[v]) {
      if (used[w]) continue;
      bool ok = true;
      for (std::size_t j = 0; j < k && ok; ++j) {
        std::size_t u = order[j];
        bool ab_uv = a.has_edge(u, v), ab_vu = a.has_edge(v, u);
        bool bb_uv = b.has_edge(f[u], w), bb_vu = b.has_edge(w, f[u]);
        if ((ab_uv && !bb_uv) || (ab_vu && !bb_vu)) ok = false;
        if (exact && ((bb_uv && !ab_uv) || (bb_vu && !ab_vu))) ok = false;
      }
      if (!ok) continue;
      f[v] = w;
      used[w] = true;
      if (place(k + 1)) return true;
      used[w] = false;
      f[v] = kUnset;
    }
    return false;
  };
  return place(0);
}

}  // namespace

bool iso(const opm::Opm& o, const GraphRep& a, const GraphRep& b) { return embeds(o, a, b, true); }
bool spans(const opm::Opm& o, const GraphRep& a, const GraphRep& b) { return embeds(o, a, b, false); }

bool equiv(const opm::Opm& o, const Context& a, const Context& b) {
  Interp ia = interpret(o, a), ib = interpret(o, b);
  return covers(o, ia.unrestricted, ib.unrestricted) && covers(o, ib.unrestricted, ia.unrestricted) &&
         iso(o, ia.graph, ib.graph);
}

bool subcontext(const opm::Opm& o, const Context& a, const Context& b) {
  Interp ia = interpret(o, a), ib = interpret(o, b);
  return covers(o, ia.unrestricted, ib.unrestricted) && spans(o, ia.graph, ib.graph);
}

// ---------------------------------------------------------------- structure

namespace {

void collect_dom(const Context& c, std::set<std::string>& out) {
  switch (c.kind()) {
    case Context::Kind::Empty:
      return;
    case Context::Kind::Single:
      if (const auto* v = std::get_if<VarBinding>(&c.binding())) out.insert(v->name);
      return;
    default:
      collect_dom(c.left(), out);
      collect_dom(c.right(), out);
  }
}

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::none_of(a.begin(), a.end(), [&](const std::string& x) { return b.count(x) > 0; });
}

// Replaces bindings by ·: ordered ones whose vertex index is in `vertices`
// (numbered left to right as interpret does), and unrestricted ones when
// `drop_unr`.
Context erase(const Context& c, const std::set<std::size_t>& vertices, bool drop_unr, std::size_t& next) {
  switch (c.kind()) {
    case Context::Kind::Empty:
      return c;
    case Context::Kind::Single:
      if (unr(c.binding())) return drop_unr ? Context() : c;
      return vertices.count(next++) ? Context() : c;
    case Context::Kind::Seq: {
      Context l = erase(c.left(), vertices, drop_unr, next);
      return Context::seq(l, erase(c.right(), vertices, drop_unr, next));
    }
    case Context::Kind::Par: {
      Context l = erase(c.left(), vertices, drop_unr, next);
      return Context::par(l, erase(c.right(), vertices, drop_unr, next));
    }
  }
  return c;
}

}  // namespace

std::set<std::string> dom(const Context& c) {
  std::set<std::string> out;
  collect_dom(c, out);
  return out;
}

bool is_unrestricted(const Context& c) {
  switch (c.kind()) {
    case Context::Kind::Empty:
      return true;
    case Context::Kind::Single:
      return unr(c.binding());
    default:
      return is_unrestricted(c.left()) && is_unrestricted(c.right());
  }
}

Context simplify(const Context& c) {
  if (c.kind() != Context::Kind::Seq && c.kind() != Context::Kind::Par) return c;
  Context l = simplify(c.left()), r = simplify(c.right());
  if (l.kind() == Context::Kind::Empty) return r;
  if (r.kind() == Context::Kind::Empty) return l;
  return c.kind() == Context::Kind::Seq ? Context::seq(l, r) : Context::par(l, r);
}

Context restrict(const Context& c, const std::set<std::string>& keep) {
  switch (c.kind()) {
    case Context::Kind::Empty:
      return c;
    case Context::Kind::Single:
      if (const auto* v = std::get_if<VarBinding>(&c.binding())) {
        return keep.count(v->name) ? c : Context();
      }
      return c;
    case Context::Kind::Seq:
      return Context::seq(restrict(c.left(), keep), restrict(c.right(), keep));
    case Context::Kind::Par:
      return Context::par(restrict(c.left(), keep), restrict(c.right(), keep));
  }
  return c;
}

std::optional<std::string> check_well_formed(const opm::Opm& o, const Context& c) {
  std::map<std::string, core::TypePtr> types;
  std::set<std::string> ordered;
  std::optional<std::string> problem;
  std::function<void(const Context&)> walk = [&](const Context& x) {
    if (problem) return;
    if (x.kind() == Context::Kind::Single) {
      const auto* v = std::get_if<VarBinding>(&x.binding());
      if (!v) return;
      auto [it, fresh] = types.emplace(v->name, v->type);
      if (!fresh && !core::type_equal(o, *it->second, *v->type)) {
        problem = fmt::format("'{}' is bound at two different types", v->name);
      } else if (!core::unr(*v->type) && !ordered.insert(v->name).second) {
        problem = fmt::format("ordered binding '{}' occurs more than once", v->name);
      }
    } else if (x.kind() != Context::Kind::Empty) {
      walk(x.left());
      walk(x.right());
    }
  };
  walk(c);
  return problem;
}

// ---------------------------------------------------------------- decomposition

namespace {

Context marker(const opm::Opm& o) { return Context::loc(kMarker, o.neutral()); }

std::optional<std::size_t> marker_vertex(const GraphRep& g) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (is_marker(g.labels[i])) return i;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Context> hole_first(const opm::Opm& o, const Pattern& g) {
  Context rest = simplify(g.fill(Context()));
  if (!equiv(o, g.fill(marker(o)), Context::seq(marker(o), rest))) return std::nullopt;
  return rest;
}

std::optional<Context> hole_last(const opm::Opm& o, const Pattern& g) {
  Context rest = simplify(g.fill(Context()));
  if (!equiv(o, g.fill(marker(o)), Context::seq(rest, marker(o)))) return std::nullopt;
  return rest;
}

std::optional<Context> hole_beside(const opm::Opm& o, const Pattern& g) {
  Context rest = simplify(g.fill(Context()));
  if (!equiv(o, g.fill(marker(o)), Context::par(marker(o), rest))) return std::nullopt;
  return rest;
}

std::optional<std::pair<Context, Context>> hole_between(const opm::Opm& o, const Pattern& g) {
  Context filled = g.fill(marker(o));
  GraphRep graph = interpret(o, filled).graph;
  auto h = marker_vertex(graph);
  if (!h) return std::nullopt;
  std::set<std::size_t> before{*h}, after{*h};
  for (auto [i, j] : graph.edges) {
    if (j == *h) before.insert(i);
    if (i == *h) after.insert(j);
  }
  std::size_t next = 0;
  Context first = simplify(erase(filled, after, false, next));
  next = 0;
  Context second = simplify(erase(filled, before, true, next));
  if (!equiv(o, filled, Context::seq(first, Context::seq(marker(o), second)))) return std::nullopt;
  return std::pair{first, second};
}

std::optional<Decomposition> decompose(const opm::Opm& o, const Context& c,
                                       const std::set<std::string>& vars) {
  using K = Context::Kind;
  switch (c.kind()) {
    case K::Empty:
      return Decomposition{Pattern::hole(), Context()};
    case K::Single: {
      const auto* v = std::get_if<VarBinding>(&c.binding());
      if (!v || !vars.count(v->name)) return Decomposition{Pattern::par(Pattern::hole(), c), Context()};
      if (core::unr(*v->type)) return Decomposition{Pattern::par(Pattern::hole(), c), c};
      return Decomposition{Pattern::hole(), c};
    }
    case K::Seq:
    case K::Par:
      break;
  }

  const Context& c1 = c.left();
  const Context& c2 = c.right();
  const bool apart1 = disjoint(dom(c1), vars);
  const bool apart2 = disjoint(dom(c2), vars);
  std::optional<std::optional<Decomposition>> memo1, memo2;
  auto d1 = [&]() -> const std::optional<Decomposition>& {
    if (!memo1) memo1 = decompose(o, c1, vars);
    return *memo1;
  };
  auto d2 = [&]() -> const std::optional<Decomposition>& {
    if (!memo2) memo2 = decompose(o, c2, vars);
    return *memo2;
  };

  if (c.kind() == K::Seq) {
    if (apart1 && d2()) return Decomposition{Pattern::seq(c1, d2()->pattern), d2()->focus};
    if (apart2 && d1()) return Decomposition{Pattern::seq(d1()->pattern, c2), d1()->focus};
    if (!d1() || !d2()) return std::nullopt;
    auto before = hole_last(o, d1()->pattern);
    auto after = hole_first(o, d2()->pattern);
    if (before && after) {
      return Decomposition{Pattern::seq(*before, Pattern::seq(Pattern::hole(), *after)),
                           Context::seq(d1()->focus, d2()->focus)};
    }
    return std::nullopt;
  }

  if (apart1 && d2()) return Decomposition{Pattern::par(c1, d2()->pattern), d2()->focus};
  if (apart2 && d1()) return Decomposition{Pattern::par(d1()->pattern, c2), d1()->focus};
  if (!d1() || !d2()) return std::nullopt;
  const Pattern& g1 = d1()->pattern;
  const Pattern& g2 = d2()->pattern;
  const Context& f1 = d1()->focus;
  const Context& f2 = d2()->focus;
  Context both = Context::par(f1, f2);

  {
    auto b1 = hole_beside(o, g1), b2 = hole_beside(o, g2);
    if (b1 && b2) return Decomposition{Pattern::par(Context::par(*b1, *b2), Pattern::hole()), both};
  }
  auto first1 = hole_first(o, g1), first2 = hole_first(o, g2);
  if (first1 && first2) {
    return Decomposition{Pattern::seq(Pattern::hole(), Context::par(*first1, *first2)), both};
  }
  auto last1 = hole_last(o, g1), last2 = hole_last(o, g2);
  if (last1 && last2) {
    return Decomposition{Pattern::seq(Context::par(*last1, *last2), Pattern::hole()), both};
  }
  if (last1 && first2) {
    return Decomposition{Pattern::seq(*last1, Pattern::seq(Pattern::hole(), *first2)),
                         Context::seq(f2, f1)};
  }
  if (first1 && last2) {
    return Decomposition{Pattern::seq(*last2, Pattern::seq(Pattern::hole(), *first1)),
                         Context::seq(f1, f2)};
  }
  auto between1 = hole_between(o, g1), between2 = hole_between(o, g2);
  if (between1 && between2) {
    return Decomposition{
        Pattern::seq(Context::par(between1->first, between2->first),
                     Pattern::seq(Pattern::hole(), Context::par(between1->second, between2->second))),
        both};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- runtime contexts

Context focus(const Context& c, core::Location l) {
  switch (c.kind()) {
    case Context::Kind::Empty:
      return c;
    case Context::Kind::Single: {
      const auto* b = std::get_if<LocBinding>(&c.binding());
      return (b && b->loc != l) ? Context() : c;
    }
    case Context::Kind::Seq:
      return Context::seq(focus(c.left(), l), focus(c.right(), l));
    case Context::Kind::Par:
      return Context::par(focus(c.left(), l), focus(c.right(), l));
  }
  return c;
}

std::optional<std::vector<std::size_t>> unique_topological_ordering(const GraphRep& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> indegree(n, 0);
  for (auto [i, j] : g.edges) ++indegree[j];
  std::vector<bool> done(n, false);
  std::vector<std::size_t> order;
  while (order.size() < n) {
    std::optional<std::size_t> source;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v] || indegree[v] != 0) continue;
      if (source) return std::nullopt;  // two candidates for the next slot
      source = v;
    }
    if (!source) return std::nullopt;  // cycle
    done[*source] = true;
    order.push_back(*source);
    for (auto [i, j] : g.edges) {
      if (i == *source) --indegree[j];
    }
  }
  return order;
}

std::optional<opm::Element> usage_projection(const opm::Opm& o, const Context& c) {
  GraphRep g = interpret(o, c).graph;
  auto order = unique_topological_ordering(g);
  if (!order) return std::nullopt;
  opm::Element acc = o.neutral();
  for (std::size_t v : *order) {
    const auto* b = std::get_if<LocBinding>(&g.labels[v]);
    if (!b) return std::nullopt;
    auto next = o.mul(acc, b->index);
    if (!next) return std::nullopt;
    acc = *next;
  }
  return acc;
}

// ---------------------------------------------------------------- printing

namespace {

void print(const opm::Opm& o, const Context& c, Context::Kind parent, bool right_child, std::string& out) {
  switch (c.kind()) {
    case Context::Kind::Empty:
      out += "·";
      return;
    case Context::Kind::Single:
      out += print_binding(o, c.binding());
      return;
    default:
      break;
  }
  bool compound_parent = parent == Context::Kind::Seq || parent == Context::Kind::Par;
  bool parens = compound_parent && (parent != c.kind() || right_child);
  if (parens) out += '(';
  print(o, c.left(), c.kind(), false, out);
  out += c.kind() == Context::Kind::Seq ? ", " : " ∥ ";
  print(o, c.right(), c.kind(), true, out);
  if (parens) out += ')';
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

}  // namespace

std::string print(const opm::Opm& o, const Context& c) {
  std::string out;
  print(o, c, Context::Kind::Empty, false, out);
  return out;
}

std::string print(const opm::Opm& o, const Pattern& g) { return print(o, g.fill(marker(o))); }

std::string to_dot(const opm::Opm& o, const Interp& i, const std::string& title) {
  std::string out = fmt::format("digraph \"{}\" {{\n  rankdir=LR;\n", dot_escape(title));
  for (std::size_t v = 0; v < i.graph.size(); ++v) {
    out += fmt::format("  v{} [label=\"{}\"];\n", v, dot_escape(print_binding(o, i.graph.labels[v])));
  }
  for (auto [a, b] : i.graph.edges) out += fmt::format("  v{} -> v{};\n", a, b);
  if (!i.unrestricted.empty()) {
    out += "  subgraph cluster_unrestricted {\n    label=\"unrestricted\";\n    style=dashed;\n";
    for (std::size_t u = 0; u < i.unrestricted.size(); ++u) {
      out += fmt::format("    u{} [shape=box, label=\"{}\"];\n", u,
                         dot_escape(print_binding(o, i.unrestricted[u])));
    }
    out += "  }\n";
  }
  out += "}\n";
  return out;
}

}  // namespace ordo::context

#include "ordo/interp.h"

#include <fmt/format.h>

namespace ordo::interp {

using core::Apply;
using core::Constant;
using core::Lambda;
using core::LetPair;
using core::Location;
using core::Mode;
using core::Pair;
using core::Term;
using core::TermPtr;

const char* reason_name(Stuck::Reason r) {
  switch (r) {
    case Stuck::Reason::OpInadmissible: return "op-inadmissible";
    case Stuck::Reason::CloseIncomplete: return "close-incomplete";
    case Stuck::Reason::NoRule: return "no-rule";
  }
  return "?";
}

namespace {

const char* beta_name(Mode m) {
  switch (m) {
    case Mode::Plain: return "RE-Beta";
    case Mode::Unordered: return "RE-UBeta";
    case Mode::Right: return "RE-RBeta";
    case Mode::Left: return "RE-LBeta";
  }
  return "?";
}

std::string cell_text(const opm::Opm& o, const Cell& c) {
  return fmt::format("({}, {}, {})", c.refcount, o.print(c.envelope), o.print(c.trace));
}

const Constant* as_constant(const TermPtr& t) { return std::get_if<Constant>(&t->node); }
const Location* as_location(const TermPtr& t) { return std::get_if<Location>(&t->node); }
bool is_unit(const TermPtr& t) {
  const auto* c = as_constant(t);
  return c && c->kind == Constant::Kind::Unit;
}

// Evaluation order: left to right everywhere except left application,
// whose argument goes first.
const TermPtr* next_redex(const TermPtr& t) {
  if (core::is_value(*t)) return nullptr;
  if (const auto* a = std::get_if<Apply>(&t->node)) {
    const TermPtr* first = &a->fn;
    const TermPtr* second = &a->arg;
    if (a->mode == Mode::Left) std::swap(first, second);
    if (!core::is_value(**first)) return next_redex(*first);
    if (!core::is_value(**second)) return next_redex(*second);
    return &t;
  }
  if (const auto* p = std::get_if<Pair>(&t->node)) {
    if (!core::is_value(*p->first)) return next_redex(p->first);
    return next_redex(p->second);
  }
  if (const auto* lp = std::get_if<LetPair>(&t->node)) {
    if (!core::is_value(*lp->head)) return next_redex(lp->head);
    return &t;
  }
  return &t;  // a free variable
}

// Rebuilds t with the subterm at `target` replaced.
TermPtr plug(const TermPtr& t, const TermPtr* target, const TermPtr& with) {
  if (&t == target) return with;
  if (const auto* a = std::get_if<Apply>(&t->node)) {
    return core::app(a->mode, plug(a->fn, target, with), plug(a->arg, target, with));
  }
  if (const auto* p = std::get_if<Pair>(&t->node)) {
    return core::pair(p->kind, plug(p->first, target, with), plug(p->second, target, with));
  }
  if (const auto* lp = std::get_if<LetPair>(&t->node)) {
    return core::let_pair(lp->kind, lp->first, lp->second, plug(lp->head, target, with), lp->body);
  }
  return t;
}

struct Contracted {
  TermPtr result;
  Event event;
};

std::variant<Contracted, Stuck> contract(const opm::Opm& o, const TermPtr& redex, Heap& h) {
  auto stuck = [&](Stuck::Reason r, std::string detail) { return Stuck{r, std::move(detail), redex}; };
  if (const auto* lp = std::get_if<LetPair>(&redex->node)) {
    const auto* p = std::get_if<Pair>(&lp->head->node);
    if (!p || p->kind != lp->kind || lp->first == lp->second) {
      return stuck(Stuck::Reason::NoRule, "the let does not match the pair it takes apart");
    }
    // substitute both at once so the second value is not searched for x
    auto body = core::subst(lp->body, p->first, lp->first);
    body = core::subst(body, p->second, lp->second);
    return Contracted{body, {lp->kind == core::PairKind::Unordered ? "RE-ULet" : "RE-OLet", redex, "", {}}};
  }
  const auto* a = std::get_if<Apply>(&redex->node);
  if (!a) return stuck(Stuck::Reason::NoRule, "free variable");
  if (const auto* lam = std::get_if<Lambda>(&a->fn->node)) {
    if (lam->mode != a->mode) {
      return stuck(Stuck::Reason::NoRule,
                   fmt::format("abstraction and application modes differ ('{}' vs '{}')", core::mode_letter(lam->mode),
                               core::mode_letter(a->mode)));
    }
    return Contracted{core::subst(lam->body, a->arg, lam->param), {beta_name(a->mode), redex, "", {}}};
  }
  const auto* c = as_constant(a->fn);
  if (!c || a->mode != Mode::Plain) return stuck(Stuck::Reason::NoRule, "no rule applies");
  if (c->kind == Constant::Kind::New) {
    if (!is_unit(a->arg)) return stuck(Stuck::Reason::NoRule, "new expects unit");
    Location l{h.next++};
    Cell cell{0, c->m1, o.neutral()};
    h.cells.emplace(l, cell);
    return Contracted{core::loc(l), {"RC-Ne", redex, fmt::format("+#{} {}", l.id, cell_text(o, cell)), l}};
  }
  const auto* l = as_location(a->arg);
  if (!l || !h.cells.count(*l)) return stuck(Stuck::Reason::NoRule, "expected a live location");
  Cell& cell = h.cells.at(*l);
  switch (c->kind) {
    case Constant::Kind::Op: {
      auto extended = o.mul(cell.trace, c->m1);
      if (!extended || !o.residual_exists(*extended, cell.envelope)) {
        return stuck(Stuck::Reason::OpInadmissible,
                     fmt::format("#{}: {} after trace {} cannot stay within {}", l->id, o.print(c->m1),
                                 o.print(cell.trace), o.print(cell.envelope)));
      }
      auto before = o.print(cell.trace);
      cell.trace = *extended;
      return Contracted{a->arg, {"RC-Op", redex, fmt::format("#{} trace {} -> {}", l->id, before, o.print(cell.trace)), *l}};
    }
    case Constant::Kind::Drop:
      if (cell.refcount > 0) {
        --cell.refcount;
        return Contracted{core::unit(), {"RC-Cl1", redex,
                                         fmt::format("#{} refs {} -> {}", l->id, cell.refcount + 1, cell.refcount), *l}};
      }
      if (!o.leq(cell.trace, cell.envelope)) {
        return stuck(Stuck::Reason::CloseIncomplete,
                     fmt::format("#{}: trace {} is not a complete use of {}", l->id, o.print(cell.trace),
                                 o.print(cell.envelope)));
      }
      h.cells.erase(*l);
      return Contracted{core::unit(), {"RC-Cl2", redex, fmt::format("-#{}", l->id), *l}};
    case Constant::Kind::Split:
      ++cell.refcount;
      return Contracted{core::pair(core::PairKind::Ordered, a->arg, a->arg),
                        {"RC-Sp", redex, fmt::format("#{} refs {} -> {}", l->id, cell.refcount - 1, cell.refcount), *l}};
    default:
      return stuck(Stuck::Reason::NoRule, "no rule applies");
  }
}

}  // namespace

TermPtr find_redex(const Term& t) {
  // next_redex works on pointers into the tree, so wrap a non-owning copy
  TermPtr holder = std::make_shared<Term>(t);
  const TermPtr* r = next_redex(holder);
  if (!r) return nullptr;
  return r == &holder ? holder : *r;
}

StepOutcome step(const opm::Opm& o, const Config& cfg) {
  const TermPtr* redex = next_redex(cfg.term);
  if (!redex) return Done{cfg};
  Heap heap = cfg.heap;
  auto r = contract(o, *redex, heap);
  if (auto* s = std::get_if<Stuck>(&r)) return *s;
  auto& c = std::get<Contracted>(r);
  return Stepped{{plug(cfg.term, redex, c.result), std::move(heap)}, std::move(c.event)};
}

std::vector<std::string> matching_rules(const opm::Opm& o, const Term& redex, const Heap& h) {
  std::vector<std::string> out;
  if (const auto* lp = std::get_if<LetPair>(&redex.node)) {
    const auto* p = std::get_if<Pair>(&lp->head->node);
    bool values = p && core::is_value(*p->first) && core::is_value(*p->second) && lp->first != lp->second;
    if (values && p->kind == core::PairKind::Unordered && lp->kind == core::PairKind::Unordered) out.push_back("RE-ULet");
    if (values && p->kind == core::PairKind::Ordered && lp->kind == core::PairKind::Ordered) out.push_back("RE-OLet");
    return out;
  }
  const auto* a = std::get_if<Apply>(&redex.node);
  if (!a || !core::is_value(*a->arg)) return out;
  const auto* lam = std::get_if<Lambda>(&a->fn->node);
  for (Mode m : {Mode::Plain, Mode::Unordered, Mode::Right, Mode::Left}) {
    if (lam && lam->mode == m && a->mode == m) out.push_back(beta_name(m));
  }
  const auto* c = as_constant(a->fn);
  if (!c || a->mode != Mode::Plain) return out;
  if (c->kind == Constant::Kind::New && is_unit(a->arg)) out.push_back("RC-Ne");
  const auto* l = as_location(a->arg);
  auto it = l ? h.cells.find(*l) : h.cells.end();
  if (it == h.cells.end()) return out;
  const Cell& cell = it->second;
  if (c->kind == Constant::Kind::Op) {
    auto extended = o.mul(cell.trace, c->m1);
    if (extended && o.residual_exists(*extended, cell.envelope)) out.push_back("RC-Op");
  }
  if (c->kind == Constant::Kind::Drop && cell.refcount > 0) out.push_back("RC-Cl1");
  if (c->kind == Constant::Kind::Drop && cell.refcount == 0 && o.leq(cell.trace, cell.envelope)) {
    out.push_back("RC-Cl2");
  }
  if (c->kind == Constant::Kind::Split) out.push_back("RC-Sp");
  return out;
}

std::vector<std::string> runtime_oracle(const Config& cfg) {
  std::vector<std::string> out;
  auto occ = core::location_occurrences(*cfg.term);
  for (const auto& [l, cell] : cfg.heap.cells) {
    auto it = occ.find(l);
    std::size_t n = it == occ.end() ? 0 : it->second;
    if (n == 0) {
      out.push_back(fmt::format("#{} is in the heap but not in the term", l.id));
    } else if (n != cell.refcount + 1) {
      out.push_back(fmt::format("#{} occurs {} times but its refcount allows {}", l.id, n, cell.refcount + 1));
    }
  }
  for (const auto& [l, n] : occ) {
    if (!cfg.heap.cells.count(l)) out.push_back(fmt::format("#{} occurs in the term but not in the heap", l.id));
  }
  return out;
}

RunResult run(const opm::Opm& o, const TermPtr& m, const RunOptions& opts) {
  RunResult r{RunResult::Status::FuelExhausted, {m, {}}, std::nullopt, {}, {}};
  auto audit = [&](std::size_t at) {
    for (auto& v : runtime_oracle(r.final)) r.violations.push_back(fmt::format("step {}: {}", at, v));
  };
  for (std::size_t i = 0;; ++i) {
    auto outcome = step(o, r.final);
    if (std::holds_alternative<Done>(outcome)) {
      r.status = RunResult::Status::Value;
      break;
    }
    if (auto* s = std::get_if<Stuck>(&outcome)) {
      r.status = RunResult::Status::Stuck;
      r.stuck = *s;
      break;
    }
    if (i == opts.fuel) break;
    auto& st = std::get<Stepped>(outcome);
    r.final = std::move(st.next);
    r.events.push_back(std::move(st.event));
    if (opts.paranoid) audit(i + 1);
  }
  if (!opts.paranoid) audit(r.events.size());
  return r;
}

std::string format_event(const opm::Opm& o, std::size_t index, const Event& e) {
  // the core printer lays lets out over several lines; a trace line is one
  std::string redex;
  bool space = false;
  for (char c : core::print_term(o, *e.redex)) {
    if (c == '\n') {
      space = true;
      continue;
    }
    if (space && c == ' ') continue;
    if (space) redex += ' ';
    space = false;
    redex += c;
  }
  if (redex.size() > 100) redex = redex.substr(0, 97) + "...";
  auto line = fmt::format("{:>5}  {:<8}  {}", index, e.rule, redex);
  if (!e.delta.empty()) line += "  [" + e.delta + "]";
  return line;
}

std::string format_heap(const opm::Opm& o, const Heap& h) {
  if (h.cells.empty()) return "{}";
  std::string out = "{";
  for (const auto& [l, c] : h.cells) {
    if (out.size() > 1) out += ", ";
    out += fmt::format("#{} -> {}", l.id, cell_text(o, c));
  }
  return out + "}";
}

}  // namespace ordo::interp

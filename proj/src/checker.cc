#include "ordo/checker.h"

#include <fmt/format.h>

namespace ordo::checker {

using context::Context;
using core::Effect;
using core::Mode;
using core::TypePtr;
using surface::Expr;

const char* kind_name(TypeError::Kind k) {
  switch (k) {
    case TypeError::Kind::UnboundVariable: return "unbound-variable";
    case TypeError::Kind::ContextMisuse: return "context-misuse";
    case TypeError::Kind::ModeMismatch: return "mode-mismatch";
    case TypeError::Kind::TypeMismatch: return "type-mismatch";
    case TypeError::Kind::EffectViolation: return "effect-violation";
    case TypeError::Kind::OpmViolation: return "opm-violation";
    case TypeError::Kind::DecompositionFailure: return "decomposition-failure";
  }
  return "?";
}

namespace {

void free_vars(const Expr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  auto under = [&](std::initializer_list<std::string> names, const Expr& body) {
    auto saved = bound;
    bound.insert(names);
    free_vars(body, bound, out);
    bound = std::move(saved);
  };
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, surface::VarE>) {
          if (!bound.count(n.name)) out.insert(n.name);
        } else if constexpr (std::is_same_v<N, surface::LetE>) {
          free_vars(*n.bound, bound, out);
          under({n.binder.name}, *n.body);
        } else if constexpr (std::is_same_v<N, surface::LetPairE>) {
          free_vars(*n.head, bound, out);
          under({n.first.name, n.second.name}, *n.body);
        } else if constexpr (std::is_same_v<N, surface::LamE>) {
          if (n.pattern) {
            under({n.pattern->first.name, n.pattern->second.name}, *n.body);
          } else {
            under({n.param.name}, *n.body);
          }
        } else {
          surface::for_each_child(e, [&](const Expr& c) { free_vars(c, bound, out); });
        }
      },
      e.node);
}

const TypePtr* find_type(const Context& c, const std::string& x) {
  switch (c.kind()) {
    case Context::Kind::Empty:
      return nullptr;
    case Context::Kind::Single:
      if (const auto* v = std::get_if<context::VarBinding>(&c.binding()); v && v->name == x) return &v->type;
      return nullptr;
    default:
      if (const auto* t = find_type(c.left(), x)) return t;
      return find_type(c.right(), x);
  }
}

const core::ArrowType* as_arrow(const TypePtr& t) { return std::get_if<core::ArrowType>(&t->node); }
const core::TraceType* as_trace(const TypePtr& t) { return std::get_if<core::TraceType>(&t->node); }
const core::ProductType* as_product(const TypePtr& t) { return std::get_if<core::ProductType>(&t->node); }

// The key under which a pair pattern's hidden parameter sits in the
// environment; it cannot be written in source.
const std::string kPatternKey = "%param";

const char* app_rule(Mode m) {
  static const char* names[] = {"AT-App", "AT-UApp", "AT-RApp", "AT-LApp"};
  return names[static_cast<int>(m)];
}
const char* abs_rule(Mode m) {
  static const char* names[] = {"AT-Abs", "AT-UAbs", "AT-RAbs", "AT-LAbs"};
  return names[static_cast<int>(m)];
}

}  // namespace

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> bound, out;
  free_vars(e, bound, out);
  return out;
}

Checker::Checker(const opm::Opm& o, std::set<std::string> reserved) : o_(o), reserved_(std::move(reserved)) {}

std::string Checker::fresh(const std::string& base) {
  if (!allocated_.count(base) && base != kPatternKey) {
    allocated_.insert(base);
    return base;
  }
  for (int i = 1;; ++i) {
    auto candidate = fmt::format("{}'{}", base, i);
    if (!allocated_.count(candidate) && !reserved_.count(candidate)) {
      allocated_.insert(candidate);
      return candidate;
    }
  }
}

void Checker::fail(TypeError::Kind kind, const Expr& e, std::string message, std::string expected,
                   std::string actual) {
  throw Failure(TypeError{kind, e.span, std::move(message), std::move(expected), std::move(actual)});
}

std::set<std::string> Checker::core_fv(const Env& env, const Expr& e) const {
  std::set<std::string> out;
  for (const auto& x : free_vars(e)) {
    if (auto it = env.find(x); it != env.end()) out.insert(it->second);
  }
  return out;
}

Context Checker::restrict_to(const Context& g, const Env& env, const Expr& e) const {
  return context::restrict(g, core_fv(env, e));
}

void Checker::require_sub(const Context& g, const Context& target, const Expr& e, const std::string& what) {
  if (!context::subcontext(o_, g, target)) {
    fail(TypeError::Kind::ContextMisuse, e,
         fmt::format("{}: the context {} cannot be arranged as {}", what, show(g), show(target)), show(target),
         show(g));
  }
}

void Checker::require_unr_discard(const TypePtr& t, const surface::Binder& b) {
  if (!core::unr(*t)) {
    throw Failure(TypeError{TypeError::Kind::ContextMisuse, b.span,
                            fmt::format("a value of ordered type {} is discarded by '_'", show(*t)),
                            "an unrestricted type", show(*t)});
  }
}

InferResult Checker::infer(const Context& g, const Env& env, const Expr& e) {
  return infer_or_check(g, env, e, nullptr);
}

CheckResult Checker::check(const Context& g, const Env& env, const Expr& e, const TypePtr& t) {
  auto r = infer_or_check(g, env, e, &t);
  if (!core::type_equal(o_, *r.type, *t)) {
    fail(TypeError::Kind::TypeMismatch, e, fmt::format("expected type {} but found {}", show(*t), show(*r.type)),
         show(*t), show(*r.type));
  }
  if (!std::holds_alternative<surface::LamE>(e.node)) ++rule_uses_["AT-ChkInf"];
  return {r.effect, r.core};
}

InferResult Checker::infer_or_check(const Context& g, const Env& env, const Expr& e, const TypePtr* expected) {
  using namespace surface;
  if (std::holds_alternative<UnitE>(e.node)) {
    require_sub(g, Context(), e, "unit");
    ++rule_uses_["AT-Unit"];
    return {core::unit_type(), Effect::Pure, core::unit()};
  }
  if (const auto* n = std::get_if<NewE>(&e.node)) {
    if (auto why = o_.reject_envelope(n->index)) {
      fail(TypeError::Kind::OpmViolation, e, fmt::format("cannot create a resource {{{}}}: {}", o_.print(n->index), *why));
    }
    require_sub(g, Context(), e, "new");
    ++rule_uses_["AT-New"];
    return {core::trace_type(n->index), Effect::Pure,
            core::app(Mode::Plain, core::new_(n->index), core::unit())};
  }
  if (std::holds_alternative<OpE>(e.node) || std::holds_alternative<SplitE>(e.node) ||
      std::holds_alternative<DropE>(e.node)) {
    return resource(g, env, e);
  }
  if (const auto* v = std::get_if<VarE>(&e.node)) {
    auto it = env.find(v->name);
    const TypePtr* t = it == env.end() ? nullptr : find_type(g, it->second);
    if (!t) fail(TypeError::Kind::UnboundVariable, e, fmt::format("unbound variable {}", v->name));
    require_sub(g, Context::var(it->second, *t), e, fmt::format("variable {}", v->name));
    ++rule_uses_["AT-Var"];
    return {*t, Effect::Pure, core::var(it->second)};
  }
  if (const auto* a = std::get_if<AppE>(&e.node)) return application(g, env, e, *a);
  if (const auto* p = std::get_if<PairE>(&e.node)) return pair(g, env, e, *p);
  if (const auto* lp = std::get_if<LetPairE>(&e.node)) return let_pair(g, env, e, *lp, expected);
  if (const auto* l = std::get_if<LetE>(&e.node)) return let(g, env, e, *l, expected);
  if (const auto* ann = std::get_if<AnnE>(&e.node)) {
    auto r = check(g, env, *ann->expr, ann->type);
    ++rule_uses_["AT-Ann"];
    return {ann->type, r.effect, r.core};
  }
  const auto& lam_ = std::get<LamE>(e.node);
  if (!expected) {
    fail(TypeError::Kind::TypeMismatch, e, "cannot infer the type of a lambda; add an annotation (e : T)");
  }
  auto r = lambda(g, env, e, lam_, *expected);
  return {*expected, r.effect, r.core};
}

InferResult Checker::resource(const Context& g, const Env& env, const Expr& e) {
  using namespace surface;
  const Expr* arg;
  if (const auto* op = std::get_if<OpE>(&e.node)) {
    arg = op->arg.get();
  } else if (const auto* s = std::get_if<SplitE>(&e.node)) {
    arg = s->arg.get();
  } else {
    arg = std::get<DropE>(e.node).arg.get();
  }
  auto r = infer(g, env, *arg);
  const auto* tr = as_trace(r.type);
  if (!tr) {
    fail(TypeError::Kind::TypeMismatch, *arg, fmt::format("expected a resource but found {}", show(*r.type)),
         "a resource type {m}", show(*r.type));
  }
  const auto& m = tr->index;
  if (const auto* op = std::get_if<OpE>(&e.node)) {
    auto rest = o_.continuation(op->index, m);
    if (!rest) {
      fail(TypeError::Kind::OpmViolation, e,
           fmt::format("operation {} is not allowed on a resource {{{}}}", o_.print(op->index), o_.print(m)));
    }
    ++rule_uses_["AT-Op"];
    return {core::trace_type(*rest), Effect::Impure, core::app(Mode::Plain, core::op(op->index), r.core)};
  }
  if (const auto* s = std::get_if<SplitE>(&e.node)) {
    auto rest = o_.continuation(s->index, m);
    std::optional<opm::Element> product;
    if (rest) product = o_.mul(s->index, *rest);
    if (!rest || !product || !o_.leq(*product, m)) {
      fail(TypeError::Kind::OpmViolation, e,
           fmt::format("cannot borrow {} from a resource {{{}}}", o_.print(s->index), o_.print(m)));
    }
    auto t = core::product_type(core::PairKind::Ordered, core::trace_type(s->index), core::trace_type(*rest));
    ++rule_uses_["AT-Split"];
    return {t, r.effect, core::app(Mode::Plain, core::split(s->index, *rest), r.core)};
  }
  if (!o_.droppable(m)) {
    fail(TypeError::Kind::OpmViolation, e,
         fmt::format("cannot drop a resource {{{}}}: its protocol is not finished", o_.print(m)));
  }
  ++rule_uses_["AT-Drop"];
  return {core::unit_type(), r.effect, core::app(Mode::Plain, core::drop(), r.core)};
}

InferResult Checker::application(const Context& g, const Env& env, const Expr& e, const surface::AppE& a) {
  Context g1 = restrict_to(g, env, *a.fn), g2 = restrict_to(g, env, *a.arg);
  auto f = infer(g1, env, *a.fn);
  const auto* arrow = as_arrow(f.type);
  if (!arrow) {
    fail(TypeError::Kind::TypeMismatch, *a.fn, fmt::format("{} is not a function", show(*f.type)), "a function type",
         show(*f.type));
  }
  auto x = check(g2, env, *a.arg, arrow->param);
  Effect eff = core::join(arrow->effect, core::join(f.effect, x.effect));
  switch (arrow->mode) {
    case Mode::Plain:
      require_sub(g, Context::seq(g1, g2), e, "application");
      break;
    case Mode::Unordered:
      require_sub(g, Context::par(g1, g2), e, "application of an unordered function");
      break;
    case Mode::Right:
      require_sub(g, Context::seq(g1, g2), e, "application of a right-ordered function");
      if (x.effect == Effect::Impure) {
        fail(TypeError::Kind::EffectViolation, *a.arg, "the argument of a right-ordered function must be pure",
             "effect 0", "effect 1");
      }
      eff = core::join(arrow->effect, f.effect);
      break;
    case Mode::Left:
      require_sub(g, Context::seq(g2, g1), e, "application of a left-ordered function");
      if (f.effect == Effect::Impure) {
        fail(TypeError::Kind::EffectViolation, *a.fn, "a left-ordered function must be computed purely",
             "effect 0", "effect 1");
      }
      eff = core::join(arrow->effect, x.effect);
      break;
  }
  ++rule_uses_[app_rule(arrow->mode)];
  return {arrow->result, eff, core::app(arrow->mode, f.core, x.core)};
}

InferResult Checker::pair(const Context& g, const Env& env, const Expr& e, const surface::PairE& p) {
  Context g1 = restrict_to(g, env, *p.first), g2 = restrict_to(g, env, *p.second);
  auto a = infer(g1, env, *p.first);
  auto b = infer(g2, env, *p.second);
  Effect eff = core::join(a.effect, b.effect);
  if (context::subcontext(o_, g, Context::par(g1, g2))) {
    ++rule_uses_["AT-UPair"];
    return {core::product_type(core::PairKind::Unordered, a.type, b.type), eff,
            core::pair(core::PairKind::Unordered, a.core, b.core)};
  }
  require_sub(g, Context::seq(g1, g2), e, "pair");
  if (core::ord(*a.type) && b.effect == Effect::Impure) {
    fail(TypeError::Kind::EffectViolation, *p.second,
         "the second component of an ordered pair must be pure when the first is ordered", "effect 0", "effect 1");
  }
  ++rule_uses_["AT-OPair"];
  return {core::product_type(core::PairKind::Ordered, a.type, b.type), eff,
          core::pair(core::PairKind::Ordered, a.core, b.core)};
}

InferResult Checker::let(const Context& g, const Env& env, const Expr& e, const surface::LetE& l,
                         const TypePtr* expected) {
  Context g2 = restrict_to(g, env, *l.bound);
  auto body_fv = free_vars(*l.body);
  body_fv.erase(l.binder.name);
  std::set<std::string> body_core;
  for (const auto& x : body_fv) {
    if (auto it = env.find(x); it != env.end()) body_core.insert(it->second);
  }
  Context g1 = context::restrict(g, body_core);

  InferResult b;
  if (l.annotation) {
    auto r = check(g2, env, *l.bound, l.annotation);
    b = {l.annotation, r.effect, r.core};
  } else {
    b = infer(g2, env, *l.bound);
  }
  bool discard = l.binder.name == "_";
  if (discard) require_unr_discard(b.type, l.binder);

  auto x = fresh(l.binder.name);
  Context binding = Context::var(x, b.type);
  Mode mode;
  Context scope;
  if (core::unr(*b.type) && context::is_unrestricted(g1) && context::subcontext(o_, g, Context::seq(g1, g2))) {
    mode = Mode::Plain;
    scope = Context::seq(g1, binding);
  } else if (context::subcontext(o_, g, Context::par(g1, g2))) {
    mode = Mode::Unordered;
    scope = Context::par(g1, binding);
  } else if (context::subcontext(o_, g, Context::seq(g2, g1))) {
    mode = Mode::Left;
    scope = Context::seq(binding, g1);
  } else {
    auto what = l.from_sequence ? "the two sides of ';'" : fmt::format("the let of {}", l.binder.name);
    fail(TypeError::Kind::ContextMisuse, e,
         fmt::format("{} would use resources in an order the context {} does not allow", what, show(g)),
         show(Context::seq(g2, g1)), show(g));
  }
  binders_.push_back({l.binder.name, x, b.type, std::string("let") + core::mode_mark(mode), l.binder.span, scope});
  // a let is an abstraction applied on the spot
  ++rule_uses_[app_rule(mode)];
  ++rule_uses_[abs_rule(mode)];

  Env inner = env;
  if (!discard) inner[l.binder.name] = x;
  InferResult body;
  if (expected) {
    auto r = check(scope, inner, *l.body, *expected);
    body = {*expected, r.effect, r.core};
  } else {
    body = infer(scope, inner, *l.body);
  }
  return {body.type, core::join(b.effect, body.effect),
          core::app(mode, core::lam(mode, x, body.core, b.type), b.core)};
}

InferResult Checker::let_pair(const Context& g, const Env& env, const Expr& e, const surface::LetPairE& l,
                              const TypePtr* expected) {
  auto d = context::decompose(o_, g, core_fv(env, *l.head));
  if (!d) {
    fail(TypeError::Kind::DecompositionFailure, e,
         fmt::format("the bindings used by the pair cannot be separated from the rest of {}", show(g)));
  }
  auto h = infer(d->focus, env, *l.head);
  if (h.effect == Effect::Impure) {
    fail(TypeError::Kind::EffectViolation, *l.head, "the pair taken apart by a let must be computed purely",
         "effect 0", "effect 1");
  }
  const auto* prod = as_product(h.type);
  if (!prod) {
    fail(TypeError::Kind::TypeMismatch, *l.head, fmt::format("expected a pair but found {}", show(*h.type)),
         "a pair type", show(*h.type));
  }
  if (l.first.name == "_") require_unr_discard(prod->first, l.first);
  if (l.second.name == "_") require_unr_discard(prod->second, l.second);
  auto x = fresh(l.first.name), y = fresh(l.second.name);
  Context bx = Context::var(x, prod->first), by = Context::var(y, prod->second);
  Context inner =
      prod->kind == core::PairKind::Unordered ? Context::par(bx, by) : Context::seq(bx, by);
  Context scope = d->pattern.fill(inner);
  binders_.push_back({l.first.name, x, prod->first, "let-pair", l.first.span, scope});
  binders_.push_back({l.second.name, y, prod->second, "let-pair", l.second.span, scope});

  Env env2 = env;
  if (l.first.name != "_") env2[l.first.name] = x;
  if (l.second.name != "_") env2[l.second.name] = y;
  InferResult body;
  if (expected) {
    auto r = check(scope, env2, *l.body, *expected);
    body = {*expected, r.effect, r.core};
  } else {
    body = infer(scope, env2, *l.body);
  }
  ++rule_uses_[prod->kind == core::PairKind::Unordered ? "AT-ULet" : "AT-OLet"];
  return {body.type, body.effect, core::let_pair(prod->kind, x, y, h.core, body.core)};
}

CheckResult Checker::lambda(const Context& g, const Env& env, const Expr& e, const surface::LamE& l,
                            const TypePtr& t) {
  const auto* arrow = as_arrow(t);
  if (!arrow) {
    fail(TypeError::Kind::TypeMismatch, e, fmt::format("a function cannot have type {}", show(*t)), show(*t),
         "a function type");
  }
  std::string surface_name = l.pattern ? kPatternKey : l.param.name;
  auto x = fresh(l.pattern ? "p" : l.param.name);
  Context binding = Context::var(x, arrow->param);
  Context scope;
  switch (arrow->mode) {
    case Mode::Plain:
      if (!context::is_unrestricted(g)) {
        fail(TypeError::Kind::ModeMismatch, e,
             fmt::format("a u-function cannot capture the ordered bindings of {}", show(g)), "an unrestricted context",
             show(g));
      }
      scope = Context::seq(g, binding);
      break;
    case Mode::Unordered:
      scope = Context::par(g, binding);
      break;
    case Mode::Right:
      scope = Context::seq(g, binding);
      break;
    case Mode::Left:
      scope = Context::seq(binding, g);
      break;
  }
  if (!l.pattern) {
    if (l.param.name == "_") require_unr_discard(arrow->param, l.param);
    binders_.push_back({l.param.name, x, arrow->param, "lambda", l.param.span, scope});
  }
  Env inner = env;
  if (surface_name != "_") inner[surface_name] = x;

  CheckResult body;
  if (l.pattern) {
    // \(a, b). e  is  \p. let a, b = p in e
    auto param = std::make_shared<Expr>(Expr{surface::VarE{kPatternKey}, l.param.span});
    Expr elim{surface::LetPairE{l.pattern->first, l.pattern->second, param, l.body}, e.span};
    body = check(scope, inner, elim, arrow->result);
  } else {
    body = check(scope, inner, *l.body, arrow->result);
  }
  if (!core::subeffect(body.effect, arrow->effect)) {
    fail(TypeError::Kind::EffectViolation, e, "the function body performs resource operations but its type says 0",
         "effect 0", "effect 1");
  }
  ++rule_uses_[abs_rule(arrow->mode)];
  return {Effect::Pure, core::lam(arrow->mode, x, body.core, arrow->param)};
}

ProgramResult check_program(const opm::Opm& o, const Expr& e) {
  std::vector<std::string> ids;
  surface::collect_identifiers(e, ids);
  Checker c(o, std::set<std::string>(ids.begin(), ids.end()));
  try {
    auto r = c.infer(Context(), {}, e);
    if (!core::unr(*r.type)) {
      return {std::nullopt,
              {TypeError{TypeError::Kind::ContextMisuse, e.span,
                         fmt::format("the program's result of type {} holds resources that are never released",
                                     core::print_type(o, *r.type, true)),
                         "an unrestricted type", core::print_type(o, *r.type, true)}}};
    }
    return {Program{r.core, r.type, r.effect, c.binders(), c.rule_uses()}, {}};
  } catch (const Failure& f) {
    return {std::nullopt, {f.error}};
  }
}

}  // namespace ordo::checker

#include "ordo/core.h"

#include <fmt/format.h>

namespace ordo::core {

const char* mode_mark(Mode m) {
  switch (m) {
    case Mode::Plain:
      return "";
    case Mode::Unordered:
      return "°";
    case Mode::Right:
      return ">";
    case Mode::Left:
      return "<";
  }
  return "";
}

const char* mode_letter(Mode m) {
  switch (m) {
    case Mode::Plain:
      return "u";
    case Mode::Unordered:
      return "o";
    case Mode::Right:
      return "r";
    case Mode::Left:
      return "l";
  }
  return "u";
}

const char* pair_infix(PairKind k) { return k == PairKind::Unordered ? "ox" : ".o"; }

// ---------------------------------------------------------------- types

TypePtr unit_type() {
  static const TypePtr t = std::make_shared<Type>(Type{UnitType{}});
  return t;
}
TypePtr trace_type(opm::Element m) { return std::make_shared<Type>(Type{TraceType{std::move(m)}}); }
TypePtr arrow_type(Mode mode, Effect e, TypePtr param, TypePtr result) {
  return std::make_shared<Type>(Type{ArrowType{mode, e, std::move(param), std::move(result)}});
}
TypePtr product_type(PairKind kind, TypePtr first, TypePtr second) {
  return std::make_shared<Type>(Type{ProductType{kind, std::move(first), std::move(second)}});
}

bool unr(const Type& t) {
  if (std::holds_alternative<UnitType>(t.node)) return true;
  if (const auto* a = std::get_if<ArrowType>(&t.node)) return a->mode == Mode::Plain;
  if (const auto* p = std::get_if<ProductType>(&t.node)) return unr(*p->first) && unr(*p->second);
  return false;
}

bool ord(const Type& t) {
  if (std::holds_alternative<TraceType>(t.node)) return true;
  if (const auto* a = std::get_if<ArrowType>(&t.node)) return a->mode != Mode::Plain;
  if (const auto* p = std::get_if<ProductType>(&t.node)) return ord(*p->first) || ord(*p->second);
  return false;
}

bool type_equal(const opm::Opm& o, const Type& a, const Type& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, UnitType>) {
          return true;
        } else if constexpr (std::is_same_v<T, TraceType>) {
          return o.eq(x.index, y.index);
        } else if constexpr (std::is_same_v<T, ArrowType>) {
          return x.mode == y.mode && x.effect == y.effect && type_equal(o, *x.param, *y.param) &&
                 type_equal(o, *x.result, *y.result);
        } else {
          return x.kind == y.kind && type_equal(o, *x.first, *y.first) &&
                 type_equal(o, *x.second, *y.second);
        }
      },
      a.node);
}

namespace {

// 0: arrow, 1: product, 2: atom
int type_level(const Type& t) {
  if (std::holds_alternative<ArrowType>(t.node)) return 0;
  if (std::holds_alternative<ProductType>(t.node)) return 1;
  return 2;
}

void print_type(const opm::Opm& o, const Type& t, bool surface, int ctx, std::string& out) {
  bool parens = type_level(t) < ctx;
  if (parens) out += '(';
  if (std::holds_alternative<UnitType>(t.node)) {
    out += "Unit";
  } else if (const auto* tr = std::get_if<TraceType>(&t.node)) {
    out += surface ? '{' : '[';
    out += o.print(tr->index);
    out += surface ? '}' : ']';
  } else if (const auto* a = std::get_if<ArrowType>(&t.node)) {
    print_type(o, *a->param, surface, 1, out);
    out += fmt::format(" -[{} {}]-> ", mode_letter(a->mode), static_cast<int>(a->effect));
    print_type(o, *a->result, surface, 0, out);
  } else if (const auto* p = std::get_if<ProductType>(&t.node)) {
    print_type(o, *p->first, surface, 2, out);
    out += fmt::format(" {} ", pair_infix(p->kind));
    print_type(o, *p->second, surface, 2, out);
  }
  if (parens) out += ')';
}

}  // namespace

std::string print_type(const opm::Opm& o, const Type& t, bool surface) {
  std::string out;
  print_type(o, t, surface, 0, out);
  return out;
}

// ---------------------------------------------------------------- terms

namespace {
TermPtr make(auto node) { return std::make_shared<Term>(Term{std::move(node)}); }
}  // namespace

TermPtr unit() {
  static const TermPtr t = make(Constant{Constant::Kind::Unit, {}, {}});
  return t;
}
TermPtr constant(Constant c) { return make(std::move(c)); }
TermPtr new_(opm::Element m) { return make(Constant{Constant::Kind::New, std::move(m), {}}); }
TermPtr op(opm::Element m) { return make(Constant{Constant::Kind::Op, std::move(m), {}}); }
TermPtr split(opm::Element m1, opm::Element m2) {
  return make(Constant{Constant::Kind::Split, std::move(m1), std::move(m2)});
}
TermPtr drop() { return make(Constant{Constant::Kind::Drop, {}, {}}); }
TermPtr loc(Location l) { return make(l); }
TermPtr var(std::string x) { return make(Var{std::move(x)}); }
TermPtr lam(Mode mode, std::string x, TermPtr body, TypePtr param_type) {
  return make(Lambda{mode, std::move(x), std::move(body), std::move(param_type)});
}
TermPtr app(Mode mode, TermPtr fn, TermPtr arg) { return make(Apply{mode, std::move(fn), std::move(arg)}); }
TermPtr pair(PairKind kind, TermPtr a, TermPtr b) { return make(Pair{kind, std::move(a), std::move(b)}); }
TermPtr let_pair(PairKind kind, std::string x, std::string y, TermPtr head, TermPtr body) {
  return make(LetPair{kind, std::move(x), std::move(y), std::move(head), std::move(body)});
}

namespace {

void collect_fv(const Term& t, std::set<std::string>& bound, std::set<std::string>& out) {
  if (const auto* v = std::get_if<Var>(&t.node)) {
    if (!bound.count(v->name)) out.insert(v->name);
  } else if (const auto* l = std::get_if<Lambda>(&t.node)) {
    bool fresh = bound.insert(l->param).second;
    collect_fv(*l->body, bound, out);
    if (fresh) bound.erase(l->param);
  } else if (const auto* a = std::get_if<Apply>(&t.node)) {
    collect_fv(*a->fn, bound, out);
    collect_fv(*a->arg, bound, out);
  } else if (const auto* p = std::get_if<Pair>(&t.node)) {
    collect_fv(*p->first, bound, out);
    collect_fv(*p->second, bound, out);
  } else if (const auto* lp = std::get_if<LetPair>(&t.node)) {
    collect_fv(*lp->head, bound, out);
    auto saved = bound;
    bound.insert(lp->first);
    bound.insert(lp->second);
    collect_fv(*lp->body, bound, out);
    bound = std::move(saved);
  }
}

std::string freshen(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 1;; ++i) {
    auto candidate = fmt::format("{}'{}", base, i);
    if (!avoid.count(candidate)) return candidate;
  }
}

}  // namespace

std::set<std::string> fv(const Term& t) {
  std::set<std::string> bound, out;
  collect_fv(t, bound, out);
  return out;
}

bool is_value(const Term& t) {
  if (std::holds_alternative<Constant>(t.node) || std::holds_alternative<Location>(t.node) ||
      std::holds_alternative<Lambda>(t.node)) {
    return true;
  }
  if (const auto* p = std::get_if<Pair>(&t.node)) return is_value(*p->first) && is_value(*p->second);
  return false;
}

namespace {

TermPtr subst_in(const TermPtr& m, const TermPtr& v, const std::string& x,
                 const std::set<std::string>& fv_v) {
  const Term& t = *m;
  if (const auto* var_ = std::get_if<Var>(&t.node)) return var_->name == x ? v : m;
  if (const auto* l = std::get_if<Lambda>(&t.node)) {
    if (l->param == x) return m;
    std::string param = l->param;
    TermPtr body = l->body;
    if (fv_v.count(param) && fv(*body).count(x)) {
      auto avoid = fv(*body);
      avoid.insert(fv_v.begin(), fv_v.end());
      param = freshen(l->param, avoid);
      body = subst(body, var(param), l->param);
    }
    return lam(l->mode, param, subst_in(body, v, x, fv_v), l->param_type);
  }
  if (const auto* a = std::get_if<Apply>(&t.node)) {
    return app(a->mode, subst_in(a->fn, v, x, fv_v), subst_in(a->arg, v, x, fv_v));
  }
  if (const auto* p = std::get_if<Pair>(&t.node)) {
    return pair(p->kind, subst_in(p->first, v, x, fv_v), subst_in(p->second, v, x, fv_v));
  }
  if (const auto* lp = std::get_if<LetPair>(&t.node)) {
    TermPtr head = subst_in(lp->head, v, x, fv_v);
    if (lp->first == x || lp->second == x) {
      return let_pair(lp->kind, lp->first, lp->second, head, lp->body);
    }
    std::string a = lp->first, b = lp->second;
    TermPtr body = lp->body;
    if ((fv_v.count(a) || fv_v.count(b)) && fv(*body).count(x)) {
      auto avoid = fv(*body);
      avoid.insert(fv_v.begin(), fv_v.end());
      avoid.insert({a, b});
      if (fv_v.count(a)) {
        a = freshen(lp->first, avoid);
        avoid.insert(a);
        body = subst(body, var(a), lp->first);
      }
      if (fv_v.count(b)) {
        b = freshen(lp->second, avoid);
        body = subst(body, var(b), lp->second);
      }
    }
    return let_pair(lp->kind, a, b, head, subst_in(body, v, x, fv_v));
  }
  return m;
}

}  // namespace

TermPtr subst(const TermPtr& m, const TermPtr& v, const std::string& x) {
  if (!fv(*m).count(x)) return m;
  return subst_in(m, v, x, fv(*v));
}

std::map<Location, std::size_t> location_occurrences(const Term& t) {
  std::map<Location, std::size_t> out;
  std::vector<const Term*> todo{&t};
  while (!todo.empty()) {
    const Term* cur = todo.back();
    todo.pop_back();
    if (const auto* l = std::get_if<Location>(&cur->node)) {
      ++out[*l];
    } else if (const auto* lam_ = std::get_if<Lambda>(&cur->node)) {
      todo.push_back(lam_->body.get());
    } else if (const auto* a = std::get_if<Apply>(&cur->node)) {
      todo.push_back(a->fn.get());
      todo.push_back(a->arg.get());
    } else if (const auto* p = std::get_if<Pair>(&cur->node)) {
      todo.push_back(p->first.get());
      todo.push_back(p->second.get());
    } else if (const auto* lp = std::get_if<LetPair>(&cur->node)) {
      todo.push_back(lp->head.get());
      todo.push_back(lp->body.get());
    }
  }
  return out;
}

// ---------------------------------------------------------------- printing

namespace {

class Printer {
 public:
  explicit Printer(const opm::Opm& o) : o_(o) {}

  // levels: 0 binders extend right, 1 application, 2 atom
  void print(const Term& t, int ctx, const std::string& indent) {
    if (const auto* c = std::get_if<Constant>(&t.node)) {
      constant(*c);
    } else if (const auto* l = std::get_if<Location>(&t.node)) {
      out += fmt::format("#{}", l->id);
    } else if (const auto* v = std::get_if<Var>(&t.node)) {
      out += v->name;
    } else if (const auto* lam_ = std::get_if<Lambda>(&t.node)) {
      open(ctx > 0);
      out += fmt::format("\\{}{}", mode_mark(lam_->mode), lam_->param);
      binder_type(lam_->param_type);
      out += '.';
      if (multiline(*lam_->body)) {
        std::string inner = indent + "  ";
        out += "\n" + inner;
        print(*lam_->body, 0, inner);
      } else {
        out += ' ';
        print(*lam_->body, 0, indent);
      }
      close(ctx > 0);
    } else if (const auto* a = std::get_if<Apply>(&t.node)) {
      const auto* f = std::get_if<Lambda>(&a->fn->node);
      if (f && f->mode == a->mode) {
        open(ctx > 0);
        out += fmt::format("let{} {}", mode_mark(a->mode), f->param);
        binder_type(f->param_type);
        out += " = ";
        print(*a->arg, 0, indent);
        out += " in\n" + indent;
        print(*f->body, 0, indent);
        close(ctx > 0);
        return;
      }
      open(ctx > 1);
      print(*a->fn, 1, indent);
      out += ' ';
      if (a->mode != Mode::Plain) out += fmt::format("{} ", mode_mark(a->mode));
      print(*a->arg, 2, indent);
      close(ctx > 1);
    } else if (const auto* p = std::get_if<Pair>(&t.node)) {
      out += '(';
      // a binder on the left would swallow the infix
      print(*p->first, 1, indent);
      out += fmt::format(" {} ", pair_infix(p->kind));
      print(*p->second, 0, indent);
      out += ')';
    } else if (const auto* lp = std::get_if<LetPair>(&t.node)) {
      open(ctx > 0);
      out += fmt::format("let {} {} {} = ", lp->first, pair_infix(lp->kind), lp->second);
      print(*lp->head, 0, indent);
      out += " in\n" + indent;
      print(*lp->body, 0, indent);
      close(ctx > 0);
    }
  }

  std::string out;

 private:
  static bool multiline(const Term& t) {
    if (std::holds_alternative<LetPair>(t.node)) return true;
    if (const auto* a = std::get_if<Apply>(&t.node)) {
      const auto* f = std::get_if<Lambda>(&a->fn->node);
      return f && f->mode == a->mode;
    }
    return false;
  }

  void open(bool p) {
    if (p) out += '(';
  }
  void close(bool p) {
    if (p) out += ')';
  }

  void binder_type(const TypePtr& t) {
    if (t) out += " : " + print_type(o_, *t);
  }

  void constant(const Constant& c) {
    switch (c.kind) {
      case Constant::Kind::Unit:
        out += "unit";
        break;
      case Constant::Kind::New:
        out += fmt::format("new_{{{}}}", o_.print(c.m1));
        break;
      case Constant::Kind::Op:
        out += fmt::format("op_{{{}}}", o_.print(c.m1));
        break;
      case Constant::Kind::Split:
        out += fmt::format("split_{{{},{}}}", o_.print(c.m1), o_.print(c.m2));
        break;
      case Constant::Kind::Drop:
        out += "drop";
        break;
    }
  }

  const opm::Opm& o_;
};

}  // namespace

std::string print_term(const opm::Opm& o, const Term& t) {
  Printer p(o);
  p.print(t, 0, "");
  return p.out;
}

}  // namespace ordo::core

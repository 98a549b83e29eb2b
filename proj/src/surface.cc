#include "ordo/surface.h"

#include <fmt/format.h>

#include <cctype>
#include <map>
#include <stdexcept>

namespace ordo::surface {

LineCol line_col(std::string_view source, std::size_t offset) {
  LineCol lc{1, 1};
  for (std::size_t i = 0; i < offset && i < source.size(); ++i) {
    auto c = static_cast<unsigned char>(source[i]);
    if (c == '\n') {
      ++lc.line;
      lc.col = 1;
    } else if ((c & 0xC0) != 0x80) {
      ++lc.col;
    }
  }
  return lc;
}

namespace {

enum class Tok {
  Ident,
  Number,
  Index,  // {...}, text is the contents
  Let,
  In,
  New,
  Split,
  Drop,
  Unit,
  UnitType,
  LParen,
  RParen,
  Comma,
  Semi,
  Colon,
  Equals,
  Dot,
  Lambda,
  Bang,
  ArrowOpen,   // -[
  ArrowClose,  // ]->
  End,
};

std::string describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "effect";
    case Tok::Index: return "{index}";
    case Tok::Let: return "'let'";
    case Tok::In: return "'in'";
    case Tok::New: return "'new'";
    case Tok::Split: return "'split'";
    case Tok::Drop: return "'drop'";
    case Tok::Unit: return "'unit'";
    case Tok::UnitType: return "'Unit'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Equals: return "'='";
    case Tok::Dot: return "'.'";
    case Tok::Lambda: return "'\\'";
    case Tok::Bang: return "'!'";
    case Tok::ArrowOpen: return "'-['";
    case Tok::ArrowClose: return "']->'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  Span span;
};

struct Failure {
  ParseError error;
};

[[noreturn]] void fail(ParseError::Kind kind, Span span, std::string message,
                       std::vector<std::string> expected = {}) {
  throw Failure{ParseError{kind, span, std::move(message), std::move(expected)}};
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex(std::string_view src) {
  static const std::map<std::string, Tok, std::less<>> keywords{
      {"let", Tok::Let},     {"in", Tok::In},     {"new", Tok::New},   {"split", Tok::Split},
      {"drop", Tok::Drop},   {"unit", Tok::Unit}, {"Unit", Tok::UnitType}};
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t begin, std::size_t end, std::string text = {}) {
    out.push_back({k, std::move(text), {begin, end}});
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (src.substr(i, 2) == "--") {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    std::size_t begin = i;
    if (ident_start(c)) {
      while (i < src.size() && ident_char(src[i])) ++i;
      std::string word(src.substr(begin, i - begin));
      auto kw = keywords.find(word);
      push(kw == keywords.end() ? Tok::Ident : kw->second, begin, i, word);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      push(Tok::Number, begin, i, std::string(src.substr(begin, i - begin)));
      continue;
    }
    if (c == '{') {
      auto close = src.find('}', i);
      if (close == std::string_view::npos) {
        fail(ParseError::Kind::UnbalancedParenthesis, {i, src.size()}, "unclosed '{'", {"'}'"});
      }
      push(Tok::Index, begin, close + 1, std::string(src.substr(i + 1, close - i - 1)));
      i = close + 1;
      continue;
    }
    if (src.substr(i, 2) == "-[") {
      push(Tok::ArrowOpen, begin, i += 2);
      continue;
    }
    if (src.substr(i, 3) == "]->") {
      push(Tok::ArrowClose, begin, i += 3);
      continue;
    }
    if (src.substr(i, 2) == "\xCE\xBB") {  // λ
      push(Tok::Lambda, begin, i += 2);
      continue;
    }
    Tok k;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ',': k = Tok::Comma; break;
      case ';': k = Tok::Semi; break;
      case ':': k = Tok::Colon; break;
      case '=': k = Tok::Equals; break;
      case '.': k = Tok::Dot; break;
      case '\\': k = Tok::Lambda; break;
      case '!': k = Tok::Bang; break;
      default:
        fail(ParseError::Kind::BadCharacter, {i, i + 1}, fmt::format("unexpected character '{}'", c));
    }
    push(k, begin, ++i);
  }
  push(Tok::End, src.size(), src.size());
  return out;
}

ExprPtr make(auto node, Span span) { return std::make_shared<Expr>(Expr{std::move(node), span}); }

class Parser {
 public:
  Parser(std::vector<Token> toks, const opm::Opm& o) : toks_(std::move(toks)), o_(o) {}

  ExprPtr program() {
    if (peek().kind == Tok::End) return make(UnitE{}, {0, 0});
    auto e = expr();
    expect_end();
    return e;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void unexpected(std::vector<std::string> expected) {
    const auto& t = peek();
    bool literal = t.kind == Tok::Ident || t.kind == Tok::Number;
    std::string found = literal ? fmt::format("'{}'", t.text) : describe(t.kind);
    auto kind = ParseError::Kind::UnexpectedToken;
    if (!open_.empty() && (t.kind == Tok::End || t.kind == Tok::In)) {
      for (const auto& e : expected) {
        if (e == describe(Tok::RParen)) kind = ParseError::Kind::UnbalancedParenthesis;
      }
    }
    std::string message = kind == ParseError::Kind::UnbalancedParenthesis
                              ? fmt::format("unbalanced parenthesis: '(' at offset {} is never closed", open_.back())
                              : fmt::format("unexpected {}", found);
    fail(kind, t.span, message, std::move(expected));
  }

  Token expect(Tok k) {
    if (!at(k)) unexpected({describe(k)});
    return next();
  }

  void expect_end() {
    if (at(Tok::RParen)) fail(ParseError::Kind::UnbalancedParenthesis, peek().span, "unbalanced parenthesis: stray ')'");
    if (!at(Tok::End)) unexpected({describe(Tok::End), describe(Tok::Semi)});
  }

  Binder binder() {
    auto t = expect(Tok::Ident);
    return {t.text, t.span};
  }

  opm::Element index(const Token& t) {
    try {
      return o_.parse(t.text);
    } catch (const std::exception& ex) {
      fail(ParseError::Kind::BadIndex, t.span, fmt::format("bad {} index: {}", o_.name(), ex.what()));
    }
  }

  // expr := let ... | \binder. expr | app (';' expr)?
  ExprPtr expr() {
    if (at(Tok::Let)) return let();
    if (at(Tok::Lambda)) {
      auto start = next().span.begin;
      return lambda_rest(start, Tok::Dot);
    }
    auto first = app();
    if (at(Tok::Semi)) {
      auto semi = next();
      auto rest = expr();
      return make(LetE{{"_", semi.span}, nullptr, first, rest, true}, {first->span.begin, rest->span.end});
    }
    return first;
  }

  // After `\` or a function-definition head: a pattern, then `sep`, then the body.
  ExprPtr lambda_rest(std::size_t start, Tok sep) {
    LamE lam;
    if (at(Tok::LParen)) {
      auto open = next();
      open_.push_back(open.span.begin);
      auto a = binder();
      expect(Tok::Comma);
      auto b = binder();
      expect(Tok::RParen);
      open_.pop_back();
      lam.param = {"", {open.span.begin, previous_end()}};
      lam.pattern = std::pair{a, b};
    } else if (at(Tok::Ident)) {
      lam.param = binder();
    } else {
      unexpected({describe(Tok::Ident), describe(Tok::LParen)});
    }
    if (sep == Tok::Equals) {
      // more parameters may follow: f x (a, b) = e
      if (at(Tok::Ident) || at(Tok::LParen)) {
        lam.body = lambda_rest(peek().span.begin, sep);
        auto end = lam.body->span.end;
        return make(std::move(lam), {start, end});
      }
    }
    expect(sep);
    lam.body = expr();
    auto end = lam.body->span.end;
    return make(std::move(lam), {start, end});
  }

  ExprPtr let() {
    auto start = next().span.begin;
    auto x = binder();
    if (at(Tok::Comma)) {
      next();
      auto y = binder();
      expect(Tok::Equals);
      auto head = expr();
      expect(Tok::In);
      auto body = expr();
      return make(LetPairE{x, y, head, body}, {start, body->span.end});
    }
    core::TypePtr annotation;
    ExprPtr bound;
    if (at(Tok::Colon)) {
      next();
      annotation = type();
      if (at(Tok::Ident) && peek().text == x.name) {
        // let f : T
        //     f pat... = e
        auto head = next();
        bound = lambda_rest(head.span.end, Tok::Equals);
        // the definition's span starts at the repeated name
        bound = make(ExprPtr(bound)->node, {head.span.begin, bound->span.end});
      } else if (!at(Tok::Equals)) {
        unexpected({describe(Tok::Equals), fmt::format("'{}'", x.name)});
      }
    } else if (at(Tok::Ident) || at(Tok::LParen)) {
      auto head_start = peek().span.begin;
      bound = lambda_rest(head_start, Tok::Equals);
    } else if (!at(Tok::Equals)) {
      unexpected({describe(Tok::Equals), describe(Tok::Colon), describe(Tok::Comma)});
    }
    if (!bound) {
      expect(Tok::Equals);
      bound = expr();
    }
    expect(Tok::In);
    auto body = expr();
    return make(LetE{x, annotation, bound, body, false}, {start, body->span.end});
  }

  bool starts_prefix() const {
    switch (peek().kind) {
      case Tok::Bang:
      case Tok::Split:
      case Tok::Drop:
      case Tok::New:
      case Tok::Unit:
      case Tok::Ident:
      case Tok::LParen:
        return true;
      default:
        return false;
    }
  }

  // app := prefix prefix*
  ExprPtr app() {
    auto e = prefix();
    while (starts_prefix()) {
      auto arg = prefix();
      e = make(AppE{e, arg}, {e->span.begin, arg->span.end});
    }
    return e;
  }

  std::vector<std::string> term_starts() const {
    return {describe(Tok::Ident), describe(Tok::Unit), describe(Tok::LParen), describe(Tok::New),
            describe(Tok::Split), describe(Tok::Drop), describe(Tok::Bang), describe(Tok::Let),
            describe(Tok::Lambda)};
  }

  ExprPtr prefix() {
    auto start = peek().span.begin;
    switch (peek().kind) {
      case Tok::Bang: {
        next();
        auto m = index(expect(Tok::Index));
        auto arg = prefix();
        return make(OpE{m, arg}, {start, arg->span.end});
      }
      case Tok::Split: {
        next();
        auto m = index(expect(Tok::Index));
        auto arg = prefix();
        return make(SplitE{m, arg}, {start, arg->span.end});
      }
      case Tok::Drop: {
        next();
        auto arg = prefix();
        return make(DropE{arg}, {start, arg->span.end});
      }
      case Tok::New: {
        next();
        auto t = expect(Tok::Index);
        return make(NewE{index(t)}, {start, t.span.end});
      }
      default:
        return atom();
    }
  }

  ExprPtr atom() {
    const auto& t = peek();
    if (t.kind == Tok::Unit) return make(UnitE{}, next().span);
    if (t.kind == Tok::Ident) {
      if (t.text == "_") fail(ParseError::Kind::UnexpectedToken, t.span, "'_' cannot be used as a value");
      auto tok = next();
      return make(VarE{tok.text}, tok.span);
    }
    if (t.kind != Tok::LParen) unexpected(term_starts());
    auto open = next();
    open_.push_back(open.span.begin);
    auto e = expr();
    if (at(Tok::Comma)) {
      next();
      auto second = expr();
      e = make(PairE{e, second}, {e->span.begin, second->span.end});
    }
    if (at(Tok::Colon)) {
      next();
      auto ty = type();
      e = make(AnnE{e, ty}, {e->span.begin, previous_end()});
    }
    if (!at(Tok::RParen)) {
      std::vector<std::string> want{describe(Tok::RParen), describe(Tok::Colon)};
      if (!std::holds_alternative<PairE>(e->node) && !std::holds_alternative<AnnE>(e->node)) {
        want.push_back(describe(Tok::Comma));
      }
      unexpected(want);
    }
    auto close = next();
    open_.pop_back();
    // the parentheses belong to the node
    return make(ExprPtr(e)->node, {open.span.begin, close.span.end});
  }

  std::size_t previous_end() const { return toks_[pos_ - 1].span.end; }

  // type := product ('-[' q e ']->' type)?
  core::TypePtr type() {
    auto param = product_type();
    if (!at(Tok::ArrowOpen)) return param;
    next();
    auto q = expect(Tok::Ident);
    core::Mode mode;
    if (q.text == "u") {
      mode = core::Mode::Plain;
    } else if (q.text == "o") {
      mode = core::Mode::Unordered;
    } else if (q.text == "r") {
      mode = core::Mode::Right;
    } else if (q.text == "l") {
      mode = core::Mode::Left;
    } else {
      fail(ParseError::Kind::UnexpectedToken, q.span, fmt::format("unknown arrow mode '{}'", q.text),
           {"'u'", "'o'", "'r'", "'l'"});
    }
    auto e = expect(Tok::Number);
    if (e.text != "0" && e.text != "1") {
      fail(ParseError::Kind::UnexpectedToken, e.span, fmt::format("effect must be 0 or 1, not {}", e.text),
           {"'0'", "'1'"});
    }
    expect(Tok::ArrowClose);
    auto result = type();
    return core::arrow_type(mode, e.text == "1" ? core::Effect::Impure : core::Effect::Pure, param, result);
  }

  // product := atom (('ox' | '.o') atom)?
  core::TypePtr product_type() {
    auto first = atom_type();
    if (at(Tok::Ident) && peek().text == "ox") {
      next();
      return core::product_type(core::PairKind::Unordered, first, atom_type());
    }
    if (at(Tok::Dot) && peek(1).kind == Tok::Ident && peek(1).text == "o") {
      next();
      next();
      return core::product_type(core::PairKind::Ordered, first, atom_type());
    }
    return first;
  }

  core::TypePtr atom_type() {
    if (at(Tok::UnitType)) {
      next();
      return core::unit_type();
    }
    if (at(Tok::Index)) return core::trace_type(index(next()));
    if (at(Tok::LParen)) {
      open_.push_back(next().span.begin);
      auto t = type();
      expect(Tok::RParen);
      open_.pop_back();
      return t;
    }
    unexpected({describe(Tok::UnitType), describe(Tok::Index), describe(Tok::LParen)});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::size_t> open_;  // offsets of unclosed '('
  const opm::Opm& o_;
};

}  // namespace

const char* kind_name(ParseError::Kind k) {
  switch (k) {
    case ParseError::Kind::UnexpectedToken: return "unexpected-token";
    case ParseError::Kind::UnbalancedParenthesis: return "unbalanced-parenthesis";
    case ParseError::Kind::BadCharacter: return "bad-character";
    case ParseError::Kind::BadIndex: return "bad-index";
  }
  return "?";
}

ParseResult parse(std::string_view source, const opm::Opm& o) {
  try {
    Parser p(lex(source), o);
    return {p.program(), {}};
  } catch (const Failure& f) {
    return {nullptr, {f.error}};
  }
}

// ---------------------------------------------------------------- printing

namespace {

class Pretty {
 public:
  explicit Pretty(const opm::Opm& o) : o_(o) {}

  // 0: let, lambda, sequence; 1: application; 2: prefix operand; 3: atom
  void print(const Expr& e, int ctx, const std::string& indent) {
    std::visit([&](const auto& n) { node(n, ctx, indent); }, e.node);
  }

  std::string out;

 private:
  static int level(const Expr& e) {
    return std::visit(
        [](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, LetE> || std::is_same_v<N, LetPairE> || std::is_same_v<N, LamE>) {
            return 0;
          } else if constexpr (std::is_same_v<N, AppE>) {
            return 1;
          } else if constexpr (std::is_same_v<N, OpE> || std::is_same_v<N, SplitE> || std::is_same_v<N, DropE> ||
                               std::is_same_v<N, NewE>) {
            return 2;
          } else {
            return 3;
          }
        },
        e.node);
  }

  void sub(const Expr& e, int ctx, const std::string& indent) {
    bool parens = level(e) < ctx;
    if (parens) out += '(';
    print(e, ctx, indent);
    if (parens) out += ')';
  }

  std::string idx(const opm::Element& m) { return "{" + o_.print(m) + "}"; }
  std::string ty(const core::TypePtr& t) { return core::print_type(o_, *t, true); }

  void node(const UnitE&, int, const std::string&) { out += "unit"; }
  void node(const NewE& n, int, const std::string&) { out += "new " + idx(n.index); }
  void node(const OpE& n, int, const std::string& indent) {
    out += "!" + idx(n.index) + " ";
    sub(*n.arg, 2, indent);
  }
  void node(const SplitE& n, int, const std::string& indent) {
    out += "split " + idx(n.index) + " ";
    sub(*n.arg, 2, indent);
  }
  void node(const DropE& n, int, const std::string& indent) {
    out += "drop ";
    sub(*n.arg, 2, indent);
  }
  void node(const VarE& n, int, const std::string&) { out += n.name; }
  void node(const AppE& n, int, const std::string& indent) {
    sub(*n.fn, 1, indent);
    out += ' ';
    sub(*n.arg, 2, indent);
  }
  void node(const PairE& n, int, const std::string& indent) {
    out += '(';
    sub(*n.first, 0, indent);
    out += ", ";
    sub(*n.second, 0, indent);
    out += ')';
  }
  void node(const AnnE& n, int, const std::string& indent) {
    out += '(';
    // a bare pair inside keeps its own parentheses
    sub(*n.expr, 0, indent);
    out += " : " + ty(n.type) + ")";
  }
  void node(const LetPairE& n, int, const std::string& indent) {
    out += fmt::format("let {}, {} = ", n.first.name, n.second.name);
    sub(*n.head, 0, indent);
    out += " in\n" + indent;
    sub(*n.body, 0, indent);
  }
  void node(const LetE& n, int, const std::string& indent) {
    if (n.from_sequence) {
      sub(*n.bound, 1, indent);
      out += "; ";
      sub(*n.body, 0, indent);
      return;
    }
    out += "let " + n.binder.name;
    if (n.annotation) out += " : " + ty(n.annotation);
    out += " = ";
    sub(*n.bound, 0, indent + "  ");
    out += " in\n" + indent;
    sub(*n.body, 0, indent);
  }
  void node(const LamE& n, int, const std::string& indent) {
    out += '\\';
    if (n.pattern) {
      out += fmt::format("({}, {})", n.pattern->first.name, n.pattern->second.name);
    } else {
      out += n.param.name;
    }
    out += ". ";
    sub(*n.body, 0, indent);
  }

  const opm::Opm& o_;
};

}  // namespace

std::string pretty(const opm::Opm& o, const Expr& e) {
  Pretty p(o);
  p.print(e, 0, "");
  return p.out;
}

// ---------------------------------------------------------------- alpha equality

namespace {

class Alpha {
 public:
  explicit Alpha(const opm::Opm& o) : o_(o) {}

  bool eq(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    return std::visit(
        [&](const auto& x) {
          using N = std::decay_t<decltype(x)>;
          return same(x, std::get<N>(b.node));
        },
        a.node);
  }

 private:
  // Bound names map to their binding depth on each side; `_` never matches
  // anything so it needs no entry.
  struct Scope {
    std::vector<std::string> names;
  };

  int lookup(const Scope& s, const std::string& x) {
    for (std::size_t i = s.names.size(); i-- > 0;) {
      if (s.names[i] == x) return static_cast<int>(i);
    }
    return -1;
  }

  template <class F>
  bool under(std::initializer_list<std::pair<std::string, std::string>> binders, F&& f) {
    for (const auto& [x, y] : binders) {
      left_.names.push_back(x);
      right_.names.push_back(y);
    }
    bool r = f();
    for (std::size_t i = 0; i < binders.size(); ++i) {
      left_.names.pop_back();
      right_.names.pop_back();
    }
    return r;
  }

  bool same(const UnitE&, const UnitE&) { return true; }
  bool same(const NewE& a, const NewE& b) { return o_.eq(a.index, b.index); }
  bool same(const OpE& a, const OpE& b) { return o_.eq(a.index, b.index) && eq(*a.arg, *b.arg); }
  bool same(const SplitE& a, const SplitE& b) { return o_.eq(a.index, b.index) && eq(*a.arg, *b.arg); }
  bool same(const DropE& a, const DropE& b) { return eq(*a.arg, *b.arg); }
  bool same(const VarE& a, const VarE& b) {
    int i = lookup(left_, a.name), j = lookup(right_, b.name);
    return i == j && (i >= 0 || a.name == b.name);
  }
  bool same(const AppE& a, const AppE& b) { return eq(*a.fn, *b.fn) && eq(*a.arg, *b.arg); }
  bool same(const PairE& a, const PairE& b) { return eq(*a.first, *b.first) && eq(*a.second, *b.second); }
  bool same(const AnnE& a, const AnnE& b) { return core::type_equal(o_, *a.type, *b.type) && eq(*a.expr, *b.expr); }
  bool same(const LetPairE& a, const LetPairE& b) {
    if (!eq(*a.head, *b.head)) return false;
    return under({{a.first.name, b.first.name}, {a.second.name, b.second.name}}, [&] { return eq(*a.body, *b.body); });
  }
  bool same(const LetE& a, const LetE& b) {
    if (a.from_sequence != b.from_sequence || !a.annotation != !b.annotation) return false;
    if (a.annotation && !core::type_equal(o_, *a.annotation, *b.annotation)) return false;
    if (!eq(*a.bound, *b.bound)) return false;
    return under({{a.binder.name, b.binder.name}}, [&] { return eq(*a.body, *b.body); });
  }
  bool same(const LamE& a, const LamE& b) {
    if (a.pattern.has_value() != b.pattern.has_value()) return false;
    if (a.pattern) {
      return under({{a.pattern->first.name, b.pattern->first.name}, {a.pattern->second.name, b.pattern->second.name}},
                   [&] { return eq(*a.body, *b.body); });
    }
    return under({{a.param.name, b.param.name}}, [&] { return eq(*a.body, *b.body); });
  }

  const opm::Opm& o_;
  Scope left_, right_;
};

}  // namespace

bool alpha_equal(const opm::Opm& o, const Expr& a, const Expr& b) {
  Alpha al(o);
  return al.eq(a, b);
}

void collect_identifiers(const Expr& e, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using N = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<N, VarE>) {
          out.push_back(n.name);
        } else if constexpr (std::is_same_v<N, LetE>) {
          out.push_back(n.binder.name);
        } else if constexpr (std::is_same_v<N, LetPairE>) {
          out.push_back(n.first.name);
          out.push_back(n.second.name);
        } else if constexpr (std::is_same_v<N, LamE>) {
          if (n.pattern) {
            out.push_back(n.pattern->first.name);
            out.push_back(n.pattern->second.name);
          } else {
            out.push_back(n.param.name);
          }
        }
      },
      e.node);
  for_each_child(e, [&](const Expr& c) { collect_identifiers(c, out); });
}

}  // namespace ordo::surface

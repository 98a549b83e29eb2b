#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ordo/context.h"
#include "ordo/core.h"
#include "ordo/opm.h"
#include "ordo/surface.h"

namespace ordo::checker {

struct TypeError {
  enum class Kind {
    UnboundVariable,
    ContextMisuse,
    ModeMismatch,
    TypeMismatch,
    EffectViolation,
    OpmViolation,
    DecompositionFailure,
  };
  Kind kind;
  surface::Span span;
  std::string message;
  std::string expected, actual;  // may be empty
};

const char* kind_name(TypeError::Kind k);  // "context-misuse", ...

struct InferResult {
  core::TypePtr type;
  core::Effect effect;
  core::TermPtr core;
};

struct CheckResult {
  core::Effect effect;
  core::TermPtr core;
};

// One per let, let-pair component and lambda parameter, in source order.
struct BinderRecord {
  std::string surface_name, core_name;
  core::TypePtr type;
  std::string form;  // "let", "let°", "let<", "let-pair", "lambda"
  surface::Span span;
  context::Context scope;  // the context the binder's scope is checked in
};

struct Program {
  core::TermPtr core;
  core::TypePtr type;
  core::Effect effect;
  std::vector<BinderRecord> binders;
  std::map<std::string, std::size_t> rules;  // algorithmic rule name -> uses
};

struct ProgramResult {
  std::optional<Program> program;
  std::vector<TypeError> errors;
};

class Failure : public std::runtime_error {
 public:
  explicit Failure(TypeError e) : std::runtime_error(e.message), error(std::move(e)) {}
  TypeError error;
};

// Surface names are mapped to core names that are unique in the program, so
// contexts never see shadowing.
class Checker {
 public:
  // `reserved` are names the generated core names must avoid, normally every
  // identifier of the program.
  Checker(const opm::Opm& o, std::set<std::string> reserved = {});

  using Env = std::map<std::string, std::string>;  // surface name -> core name

  // Both throw Failure.
  InferResult infer(const context::Context& g, const Env& env, const surface::Expr& e);
  CheckResult check(const context::Context& g, const Env& env, const surface::Expr& e, const core::TypePtr& t);

  std::string fresh(const std::string& base);
  const std::vector<BinderRecord>& binders() const { return binders_; }
  // How often each algorithmic rule (AT-Var, AT-UPair, ...) succeeded.
  const std::map<std::string, std::size_t>& rule_uses() const { return rule_uses_; }

 private:
  InferResult infer_or_check(const context::Context& g, const Env& env, const surface::Expr& e,
                             const core::TypePtr* expected);
  InferResult let(const context::Context& g, const Env& env, const surface::Expr& e, const surface::LetE& l,
                  const core::TypePtr* expected);
  InferResult let_pair(const context::Context& g, const Env& env, const surface::Expr& e,
                       const surface::LetPairE& l, const core::TypePtr* expected);
  InferResult application(const context::Context& g, const Env& env, const surface::Expr& e,
                          const surface::AppE& a);
  InferResult pair(const context::Context& g, const Env& env, const surface::Expr& e, const surface::PairE& p);
  CheckResult lambda(const context::Context& g, const Env& env, const surface::Expr& e, const surface::LamE& l,
                     const core::TypePtr& t);
  InferResult resource(const context::Context& g, const Env& env, const surface::Expr& e);

  context::Context restrict_to(const context::Context& g, const Env& env, const surface::Expr& e) const;
  std::set<std::string> core_fv(const Env& env, const surface::Expr& e) const;
  void require_sub(const context::Context& g, const context::Context& target, const surface::Expr& e,
                   const std::string& what);
  void require_unr_discard(const core::TypePtr& t, const surface::Binder& b);
  [[noreturn]] void fail(TypeError::Kind kind, const surface::Expr& e, std::string message,
                         std::string expected = {}, std::string actual = {});
  std::string show(const context::Context& c) const { return context::print(o_, context::simplify(c)); }
  std::string show(const core::Type& t) const { return core::print_type(o_, t, true); }

  const opm::Opm& o_;
  std::set<std::string> reserved_, allocated_;
  std::vector<BinderRecord> binders_;
  std::map<std::string, std::size_t> rule_uses_;
};

// Free surface variables.
std::set<std::string> free_vars(const surface::Expr& e);

// Checks a whole program under the empty context. The result type must be
// unrestricted.
ProgramResult check_program(const opm::Opm& o, const surface::Expr& e);

}  // namespace ordo::checker

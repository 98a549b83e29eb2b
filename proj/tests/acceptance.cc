// One PASS/FAIL line per acceptance criterion; exits non-zero if any fail.

#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "ordo/checker.h"
#include "ordo/interp.h"
#include "support/context_enum.h"
#include "support/regex_oracle.h"

namespace core = ordo::core;
namespace checker = ordo::checker;
namespace interp = ordo::interp;
namespace ctx = ordo::context;
namespace rx = ordo::regex;

namespace {

const std::filesystem::path data = ORDO_TEST_DATA;
const ordo::opm::Opm& re = ordo::opm::regular();

struct Verdict {
  bool pass;
  std::string detail;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

checker::ProgramResult check_file(const std::filesystem::path& p) {
  auto parsed = ordo::surface::parse(slurp(p), re);
  if (!parsed.program) return {std::nullopt, {}};
  return checker::check_program(re, *parsed.program);
}

std::string first_error(const checker::ProgramResult& r) {
  return r.errors.empty() ? "parse error" : checker::kind_name(r.errors[0].kind);
}

// ---------------------------------------------------------------------------

Verdict copy_end_to_end() {
  auto r = check_file(data / "copy.ord");
  if (!r.program) return {false, "rejected: " + first_error(r)};
  auto run = interp::run(re, r.program->core, {1000, true});
  bool ok = run.status == interp::RunResult::Status::Value && run.events.size() <= 1000 &&
            core::print_term(re, *run.final.term) == "unit" && run.final.heap.cells.empty() &&
            run.violations.empty();
  return {ok, fmt::format("{} steps, value {}, {} heap cells, {} oracle violations", run.events.size(),
                          core::print_term(re, *run.final.term), run.final.heap.cells.size(), run.violations.size())};
}

Verdict mode_inference_golden() {
  auto r = check_file(data / "copy.ord");
  if (!r.program) return {false, "rejected"};
  auto dumped = core::print_term(re, *r.program->core) + "\n";
  if (dumped != slurp(data / "copy.core")) return {false, "dump differs from copy.core"};

  std::map<std::string, const checker::BinderRecord*> by_core;
  for (const auto& b : r.program->binders) by_core[b.core_name] = &b;
  auto has = [&](const char* n) { return by_core.count(n) > 0; };
  if (!has("copy") || !has("if0") || !has("of0") || !has("b2") || !has("of1") || !has("_'1") || !has("_'2")) {
    return {false, "missing binder records"};
  }
  std::vector<std::string> bad;
  // line 1: an unrestricted binding made by a plain let
  if (by_core["copy"]->form != "let" || !core::unr(*by_core["copy"]->type)) bad.push_back("line 1");
  // line 4.1: an ordered binding enters the context
  if (!core::ord(*by_core["if0"]->type)) bad.push_back("line 4.1");
  // line 4.2: unordered linear, so if0 and of0 stay independent
  auto of0_scope = ctx::interpret(re, by_core["of0"]->scope);
  if (by_core["of0"]->form != "let°" || !of0_scope.graph.edges.empty()) bad.push_back("line 4.2");
  // line 5: b2, of1 replace of0 without touching b1, if1
  auto g = ctx::interpret(re, by_core["of1"]->scope);
  std::map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < g.graph.size(); ++i) {
    if (const auto* v = std::get_if<ctx::VarBinding>(&g.graph.labels[i])) at[v->name] = i;
  }
  bool line5 = g.graph.size() == 4 && g.graph.edges.size() == 2 && at.count("b1") && at.count("if1") &&
               at.count("b2") && at.count("of1") && g.graph.has_edge(at["b1"], at["if1"]) &&
               g.graph.has_edge(at["b2"], at["of1"]);
  if (!line5) bad.push_back("line 5");
  // line 6: an unrestricted binding, and the borrows are gone afterwards
  auto after = ctx::dom(by_core["_'2"]->scope);
  if (!core::unr(*by_core["_'1"]->type) || after.count("b1") || after.count("b2")) bad.push_back("line 6");
  if (!bad.empty()) return {false, "binding modes wrong at " + fmt::format("{}", fmt::join(bad, ", "))};
  return {true, "golden text matches; binding modes as listed for lines 1, 4.1, 4.2, 5, 6"};
}

Verdict misuse_rejection() {
  auto bad = check_file(data / "thunk_misuse.ord");
  auto good = check_file(data / "thunk_ok.ord");
  bool ok = !bad.program && !bad.errors.empty() && bad.errors[0].kind == checker::TypeError::Kind::ContextMisuse &&
            good.program.has_value();
  return {ok, fmt::format("close-before-thunk: {}; thunk-first: {}", bad.program ? "accepted" : first_error(bad),
                          good.program ? "accepted" : first_error(good))};
}

Verdict aliasing_discipline() {
  auto good = check_file(data / "alias_ok.ord");
  auto bad = check_file(data / "alias_bad.ord");
  bool ok = good.program.has_value() && !bad.program;
  return {ok, fmt::format("h1 then h2: {}; h2 then h1: {}", good.program ? "accepted" : first_error(good),
                          bad.program ? "accepted" : first_error(bad))};
}

Verdict ownership_tables() {
  const auto& own = ordo::opm::ownership();
  auto E = [&](const char* s) { return own.parse(s); };
  const char* names[] = {"eps", "b", "*"};
  // rows are the left operand; "-" is undefined
  const char* mul[3][3] = {{"eps", "b", "*"}, {"b", "b", "*"}, {"*", "-", "-"}};
  const bool leq[3][3] = {{true, true, false}, {false, true, false}, {false, false, true}};
  int matched = 0, undefined = 0, positive = 0, negative = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      auto p = own.mul(E(names[i]), E(names[j]));
      bool want_defined = std::string(mul[i][j]) != "-";
      if (!want_defined) ++undefined;
      if (p.has_value() == want_defined && (!p || own.print(*p) == mul[i][j])) ++matched;
      bool l = own.leq(E(names[i]), E(names[j]));
      (leq[i][j] ? positive : negative)++;
      if (l == leq[i][j]) ++matched;
    }
  }
  return {matched == 18 && undefined == 2,
          fmt::format("{}/18 cells match the reference table (product: {} undefined; order: {} related, {} unrelated)", matched,
                      undefined, positive, negative)};
}

Verdict regex_oracles() {
  std::mt19937 rng(7);
  auto ws6 = oracle::words("rwc", 6);
  int pairs = 0, disagreements = 0, included = 0;
  for (; pairs < 250; ++pairs) {
    auto p = oracle::random_pair(rng, "rwc", 3);
    bool brute = true;
    for (const auto& w : ws6) {
      if (oracle::member(*p.small, w) && !oracle::member(*p.big, w)) {
        brute = false;
        break;
      }
    }
    bool got = rx::includes(oracle::build(*p.big), oracle::build(*p.small));
    included += got;
    if (got != brute) ++disagreements;
  }

  auto ws5 = oracle::words("rwc", 5);
  int derivatives = 0, unsound = 0, not_maximal = 0;
  while (derivatives < 100) {
    auto num = oracle::build(*oracle::random_raw(rng, "rwc", 4));
    auto den = oracle::build(*oracle::random_raw(rng, "rwc", 4));
    if (den.is_empty()) continue;
    ++derivatives;
    auto z = rx::product_derivative(num, den);
    if (!rx::includes(num, rx::Regex::cat(den, z))) ++unsound;
    std::vector<std::string> den_words;
    for (const auto& u : ws5) {
      if (oracle::member(den, u)) den_words.push_back(u);
    }
    bool maximal = true;
    for (const auto& w : ws5) {
      if (oracle::member(z, w)) continue;
      bool refuted = false;
      for (const auto& u : den_words) {
        if (!oracle::member(num, u + w)) {
          refuted = true;
          break;
        }
      }
      maximal = maximal && refuted;
    }
    if (!maximal) ++not_maximal;
  }

  auto e = rx::parse("(r|w)*c");
  bool claim = rx::equivalent(rx::product_derivative(e, rx::parse("r*")), e) &&
               rx::equivalent(rx::product_derivative(e, rx::parse("w*")), e);
  bool ok = disagreements == 0 && unsound == 0 && not_maximal == 0 && claim;
  return {ok, fmt::format("includes: {} pairs ({} included), {} disagreements; product derivative: {} cases, {} unsound, "
                          "{} not maximal; (r|w)*c by r* and w*: {}",
                          pairs, included, disagreements, derivatives, unsound, not_maximal,
                          claim ? "unchanged" : "changed")};
}

Verdict context_algebra() {
  auto classes = cenum::classify(4);
  const auto& all = classes.all;
  std::vector<std::size_t> wf;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!ctx::check_well_formed(re, all[i])) wf.push_back(i);
  }
  int disagreements = 0;
  long comparisons = 0;
  auto agree = [&](bool a, bool b) {
    ++comparisons;
    if (a != b) ++disagreements;
  };
  // equiv against the law normal form: every context with its class
  // representative, representatives pairwise, and random pairs
  for (auto i : wf) {
    agree(ctx::equiv(re, all[i], all[i]), true);
    const auto& rep = all[classes.rep.at(classes.nf[i])];
    agree(ctx::equiv(re, all[i], rep), true);
    agree(ctx::equiv(re, rep, all[i]), true);
  }
  std::vector<std::size_t> reps;
  for (const auto& [nf, i] : classes.rep) {
    if (!ctx::check_well_formed(re, all[i])) reps.push_back(i);
  }
  for (auto a : reps) {
    for (auto b : reps) agree(ctx::equiv(re, all[a], all[b]), a == b);
  }
  std::mt19937 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, wf.size() - 1);
  for (int k = 0; k < 20000; ++k) {
    auto a = wf[pick(rng)], b = wf[pick(rng)];
    bool e = ctx::equiv(re, all[a], all[b]);
    agree(e, classes.nf[a] == classes.nf[b]);
    agree(ctx::equiv(re, all[b], all[a]), e);
  }
  // subcontext against brute-force relabelings
  for (auto a : reps) {
    for (auto b : reps) agree(ctx::subcontext(re, all[a], all[b]), cenum::brute_subcontext(all[a], all[b]));
  }
  // parallel composition is always below sequential composition
  auto small = cenum::universe(2);
  for (const auto& a : small) {
    for (const auto& b : small) {
      if (ctx::check_well_formed(re, ctx::Context::seq(a, b))) continue;
      agree(ctx::subcontext(re, ctx::Context::par(a, b), ctx::Context::seq(a, b)), true);
    }
  }
  return {disagreements == 0, fmt::format("{} contexts ({} classes), {} comparisons, {} disagreements", wf.size(),
                                          reps.size(), comparisons, disagreements)};
}

Verdict smoke_corpus() {
  static const std::set<std::string> at_rules = {
      "AT-Unit", "AT-New",  "AT-Op",    "AT-Split", "AT-Drop", "AT-Var",  "AT-App",  "AT-UApp", "AT-RApp", "AT-LApp",
      "AT-UPair", "AT-OPair", "AT-ULet", "AT-OLet", "AT-Ann",  "AT-Abs",  "AT-UAbs", "AT-RAbs", "AT-LAbs", "AT-ChkInf"};
  static const std::set<std::string> gamma_rules = {"RC-Ne", "RC-Op", "RC-Cl1", "RC-Cl2", "RC-Sp"};
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(data / "smoke")) {
    if (entry.path().extension() == ".ord") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::set<std::string> seen;
  std::vector<std::string> failures;
  std::size_t steps = 0, violations = 0;
  for (const auto& f : files) {
    auto name = f.filename().string();
    auto r = check_file(f);
    if (!r.program) {
      failures.push_back(name + " rejected");
      continue;
    }
    if (!std::holds_alternative<core::UnitType>(r.program->type->node)) failures.push_back(name + " not Unit");
    for (const auto& [rule, n] : r.program->rules) seen.insert(rule);
    interp::Config cfg{r.program->core, {}};
    bool done = false, stuck = false;
    for (std::size_t i = 0; i < 100000 && !done && !stuck; ++i) {
      auto out = interp::step(re, cfg);
      if (std::holds_alternative<interp::Done>(out)) {
        done = true;
      } else if (auto* s = std::get_if<interp::Stepped>(&out)) {
        seen.insert(s->event.rule);
        cfg = std::move(s->next);
        violations += interp::runtime_oracle(cfg).size();
        ++steps;
      } else {
        failures.push_back(name + " stuck");
        stuck = true;
      }
    }
    if (done && (core::print_term(re, *cfg.term) != "unit" || !cfg.heap.cells.empty())) {
      failures.push_back(name + " ended badly");
    }
    if (!done && !stuck) failures.push_back(name + " did not finish");
  }
  std::vector<std::string> missing;
  for (const auto& r : at_rules) {
    if (!seen.count(r)) missing.push_back(r);
  }
  for (const auto& r : gamma_rules) {
    if (!seen.count(r)) missing.push_back(r);
  }
  bool ok = files.size() >= 20 && failures.empty() && missing.empty() && violations == 0;
  auto detail = fmt::format("{} programs, {} steps, {} oracle violations", files.size(), steps, violations);
  if (!failures.empty()) detail += "; failed: " + fmt::format("{}", fmt::join(failures, ", "));
  if (!missing.empty()) detail += "; rules never used: " + fmt::format("{}", fmt::join(missing, ", "));
  if (missing.empty()) detail += "; all 20 algorithmic rules and 5 resource rules used";
  return {ok, detail};
}

Verdict runtime_guard() {
  using core::Mode;
  auto r = re.parse("r");
  auto fresh = core::app(Mode::Plain, core::new_(r), core::unit());
  auto once = core::app(Mode::Plain, core::op(r), fresh);
  auto twice = core::app(Mode::Plain, core::op(r), once);
  auto prog = core::app(Mode::Plain, core::drop(), twice);
  auto run = interp::run(re, prog, {100, true});
  int ops = 0;
  for (const auto& e : run.events) ops += e.rule == "RC-Op";
  bool ok = run.status == interp::RunResult::Status::Stuck && run.stuck &&
            run.stuck->reason == interp::Stuck::Reason::OpInadmissible && ops == 1 &&
            core::print_term(re, *run.stuck->redex) == "op_{r} #1";
  return {ok, fmt::format("{} after {} operation(s), at {}",
                          run.stuck ? interp::reason_name(run.stuck->reason) : "no stuck state", ops,
                          run.stuck ? core::print_term(re, *run.stuck->redex) : "-")};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"file-copy program end to end", copy_end_to_end},
      {"mode inference golden", mode_inference_golden},
      {"thunk misuse rejected", misuse_rejection},
      {"aliasing discipline", aliasing_discipline},
      {"ownership tables", ownership_tables},
      {"regex oracles", regex_oracles},
      {"context algebra at desk scale", context_algebra},
      {"soundness smoke corpus", smoke_corpus},
      {"runtime guard", runtime_guard},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > 5) {
      v.pass = false;
      v.detail += fmt::format("; took {:.1f}s", secs);
    }
    failed += !v.pass;
    fmt::print("{} {}. {}: {} [{:.2f}s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail, secs);
  }
  return failed == 0 ? 0 : 1;
}

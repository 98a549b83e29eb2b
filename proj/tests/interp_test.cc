#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ordo/checker.h"
#include "ordo/interp.h"

using namespace ordo::interp;
namespace core = ordo::core;
using core::Mode;
using core::PairKind;

namespace {

const ordo::opm::Opm& re = ordo::opm::regular();

ordo::opm::Element m(const char* s) { return re.parse(s); }

std::string show(const core::TermPtr& t) { return core::print_term(re, *t); }

Heap heap_with(std::uint64_t refcount, const char* envelope, const char* trace) {
  Heap h;
  h.cells.emplace(core::Location{1}, Cell{refcount, m(envelope), m(trace)});
  h.next = 2;
  return h;
}

core::TermPtr l1() { return core::loc({1}); }

core::TermPtr id(Mode mode) { return core::lam(mode, "x", core::var("x")); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Elaborated programs of the corpus that typecheck.
std::vector<std::pair<std::string, core::TermPtr>> typed_corpus() {
  std::vector<std::pair<std::string, core::TermPtr>> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(ORDO_TEST_DATA)) {
    if (entry.path().extension() != ".ord") continue;
    auto parsed = ordo::surface::parse(slurp(entry.path()), re);
    if (!parsed.program) continue;
    auto checked = ordo::checker::check_program(re, *parsed.program);
    if (checked.program) out.emplace_back(entry.path().filename().string(), checked.program->core);
  }
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace

TEST_CASE("beta") {
  auto out = step(re, {core::app(Mode::Plain, id(Mode::Plain), core::unit()), {}});
  auto* s = std::get_if<Stepped>(&out);
  REQUIRE(s);
  CHECK(s->event.rule == "RE-Beta");
  CHECK(show(s->next.term) == "unit");
  CHECK(s->next.heap.cells.empty());

  CHECK(std::holds_alternative<Done>(step(re, {core::unit(), {}})));

  // modes have to agree
  auto mismatch = step(re, {core::app(Mode::Left, id(Mode::Right), core::unit()), {}});
  REQUIRE(std::holds_alternative<Stuck>(mismatch));
  CHECK(std::get<Stuck>(mismatch).reason == Stuck::Reason::NoRule);

  for (Mode md : {Mode::Unordered, Mode::Right, Mode::Left}) {
    auto r = step(re, {core::app(md, id(md), core::unit()), {}});
    REQUIRE(std::holds_alternative<Stepped>(r));
  }
}

TEST_CASE("let-pairs match their pair kind") {
  auto body = core::pair(PairKind::Unordered, core::var("b"), core::var("a"));
  auto head = core::pair(PairKind::Ordered, core::unit(), id(Mode::Plain));
  auto ok = step(re, {core::let_pair(PairKind::Ordered, "a", "b", head, body), {}});
  REQUIRE(std::holds_alternative<Stepped>(ok));
  CHECK(std::get<Stepped>(ok).event.rule == "RE-OLet");
  CHECK(show(std::get<Stepped>(ok).next.term) == "((\\x. x) ox unit)");

  auto wrong = step(re, {core::let_pair(PairKind::Unordered, "a", "b", head, body), {}});
  REQUIRE(std::holds_alternative<Stuck>(wrong));
  CHECK(std::get<Stuck>(wrong).reason == Stuck::Reason::NoRule);
}

TEST_CASE("split shares the location and leaves the trace alone") {
  auto h = heap_with(0, "r*", "r");
  auto out = step(re, {core::app(Mode::Plain, core::split(m("r"), m("r*")), l1()), h});
  auto* s = std::get_if<Stepped>(&out);
  REQUIRE(s);
  CHECK(s->event.rule == "RC-Sp");
  CHECK(show(s->next.term) == "(#1 .o #1)");
  const auto& cell = s->next.heap.cells.at({1});
  CHECK(cell.refcount == 1);
  CHECK(re.eq(cell.trace, m("r")));
  CHECK(runtime_oracle(s->next).empty());
}

TEST_CASE("operations must keep a completion within the envelope") {
  auto op_r = core::app(Mode::Plain, core::op(m("r")), l1());
  auto out = step(re, {op_r, heap_with(0, "c", "eps")});
  REQUIRE(std::holds_alternative<Stuck>(out));
  CHECK(std::get<Stuck>(out).reason == Stuck::Reason::OpInadmissible);
  CHECK(std::string(reason_name(Stuck::Reason::OpInadmissible)) == "op-inadmissible");

  // r is a prefix of rc, so it is allowed even though r itself is not a full use
  auto fine = step(re, {op_r, heap_with(0, "rc", "eps")});
  REQUIRE(std::holds_alternative<Stepped>(fine));
  const auto& next = std::get<Stepped>(fine).next;
  CHECK(show(next.term) == "#1");
  CHECK(re.eq(next.heap.cells.at({1}).trace, m("r")));

  auto again = step(re, {op_r, next.heap});
  REQUIRE(std::holds_alternative<Stuck>(again));
}

TEST_CASE("closing") {
  auto drop = core::app(Mode::Plain, core::drop(), l1());

  auto shared = step(re, {drop, heap_with(2, "rc", "eps")});
  REQUIRE(std::holds_alternative<Stepped>(shared));
  CHECK(std::get<Stepped>(shared).event.rule == "RC-Cl1");
  CHECK(std::get<Stepped>(shared).next.heap.cells.at({1}).refcount == 1);

  auto last = step(re, {drop, heap_with(0, "rc", "rc")});
  REQUIRE(std::holds_alternative<Stepped>(last));
  CHECK(std::get<Stepped>(last).event.rule == "RC-Cl2");
  CHECK(std::get<Stepped>(last).next.heap.cells.empty());
  // the location is not handed out again
  CHECK(std::get<Stepped>(last).next.heap.next == 2);

  auto incomplete = step(re, {drop, heap_with(0, "rc", "r")});
  REQUIRE(std::holds_alternative<Stuck>(incomplete));
  CHECK(std::get<Stuck>(incomplete).reason == Stuck::Reason::CloseIncomplete);
}

TEST_CASE("allocate then close") {
  auto prog = core::app(Mode::Plain, core::drop(), core::app(Mode::Plain, core::new_(m("eps")), core::unit()));
  auto r = run(re, prog);
  CHECK(r.status == RunResult::Status::Value);
  CHECK(show(r.final.term) == "unit");
  CHECK(r.final.heap.cells.empty());
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0].rule == "RC-Ne");
  CHECK(r.events[1].rule == "RC-Cl2");
  CHECK(r.violations.empty());
}

TEST_CASE("fresh locations are never reused") {
  // drop (new unit); drop (new unit), sequenced with a plain let
  auto alloc_drop = core::app(Mode::Plain, core::drop(), core::app(Mode::Plain, core::new_(m("eps")), core::unit()));
  auto prog = core::app(Mode::Plain, core::lam(Mode::Plain, "_", alloc_drop), alloc_drop);
  auto r = run(re, prog);
  REQUIRE(r.status == RunResult::Status::Value);
  std::vector<std::uint64_t> allocated;
  for (const auto& e : r.events) {
    if (e.rule == "RC-Ne") allocated.push_back(e.location->id);
  }
  CHECK(allocated == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("evaluation order") {
  // the argument of a left application goes first
  auto arg = core::app(Mode::Plain, id(Mode::Plain), core::unit());
  auto fn = core::app(Mode::Plain, id(Mode::Plain), id(Mode::Left));
  auto left = run(re, core::app(Mode::Left, fn, arg));
  REQUIRE(left.status == RunResult::Status::Value);
  REQUIRE(left.events.size() == 3);
  CHECK(show(left.events[0].redex) == show(arg));
  CHECK(show(left.events[1].redex) == show(fn));
  CHECK(left.events[2].rule == "RE-LBeta");

  auto fn_r = core::app(Mode::Plain, id(Mode::Plain), id(Mode::Right));
  auto right = run(re, core::app(Mode::Right, fn_r, arg));
  REQUIRE(right.events.size() == 3);
  CHECK(show(right.events[0].redex) == show(fn_r));
  CHECK(show(right.events[1].redex) == show(arg));

  auto pair = core::pair(PairKind::Ordered, fn, arg);
  CHECK(show(find_redex(*pair)) == show(fn));
  CHECK(find_redex(*core::unit()) == nullptr);
}

TEST_CASE("self-application runs out of fuel") {
  auto w = core::lam(Mode::Plain, "x", core::app(Mode::Plain, core::var("x"), core::var("x")));
  auto r = run(re, core::app(Mode::Plain, w, w), {100, false});
  CHECK(r.status == RunResult::Status::FuelExhausted);
  CHECK(r.events.size() == 100);
  CHECK_FALSE(r.stuck);
}

TEST_CASE("open terms are stuck") {
  auto r = run(re, core::app(Mode::Plain, core::var("f"), core::unit()));
  CHECK(r.status == RunResult::Status::Stuck);
  CHECK(r.stuck->reason == Stuck::Reason::NoRule);
}

TEST_CASE("runtime oracle") {
  CHECK(runtime_oracle({core::unit(), {}}).empty());

  // the location is dropped twice but its refcount promises one reference
  auto drop = [] { return core::app(Mode::Plain, core::drop(), l1()); };
  auto twice = core::pair(PairKind::Unordered, drop(), drop());
  auto v = runtime_oracle({twice, heap_with(0, "eps", "eps")});
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("occurs 2 times") != std::string::npos);

  CHECK(runtime_oracle({twice, heap_with(1, "eps", "eps")}).empty());
  CHECK(runtime_oracle({core::unit(), heap_with(0, "eps", "eps")}).size() == 1);
  CHECK(runtime_oracle({l1(), {}}).size() == 1);

  Config c{twice, heap_with(0, "eps", "eps")};
  auto first = step(re, c);
  REQUIRE(std::holds_alternative<Stepped>(first));
  auto second = step(re, std::get<Stepped>(first).next);
  // the second drop finds nothing to close
  REQUIRE(std::holds_alternative<Stuck>(second));
}

TEST_CASE("rule selection is deterministic") {
  std::vector<core::TermPtr> fns = {core::unit(), core::new_(m("r")), core::op(m("r")), core::op(m("c")),
                                    core::split(m("r"), m("c")), core::drop()};
  for (Mode md : {Mode::Plain, Mode::Unordered, Mode::Right, Mode::Left}) fns.push_back(id(md));
  std::vector<core::TermPtr> args = {core::unit(), l1(), core::loc({7}), id(Mode::Plain)};
  std::vector<Heap> heaps = {heap_with(0, "rc", "eps"), heap_with(1, "rc", "r"), heap_with(0, "rc", "rc"),
                             heap_with(0, "c", "eps"), Heap{}};
  int redexes = 0;
  for (Mode md : {Mode::Plain, Mode::Unordered, Mode::Right, Mode::Left}) {
    for (const auto& f : fns) {
      for (const auto& a : args) {
        for (const auto& h : heaps) {
          auto t = core::app(md, f, a);
          auto rules = matching_rules(re, *t, h);
          CAPTURE(show(t));
          CHECK(rules.size() <= 1);
          auto out = step(re, {t, h});
          if (auto* s = std::get_if<Stepped>(&out)) {
            ++redexes;
            REQUIRE(rules.size() == 1);
            CHECK(rules[0] == s->event.rule);
          } else {
            CHECK(rules.empty());
          }
        }
      }
    }
  }
  CHECK(redexes > 20);
}

TEST_CASE("trace lines") {
  auto prog = core::app(Mode::Plain, core::drop(), core::app(Mode::Plain, core::new_(m("eps")), core::unit()));
  auto r = run(re, prog);
  REQUIRE(r.events.size() == 2);
  CHECK(format_event(re, 1, r.events[0]) == "    1  RC-Ne     new_{eps} unit  [+#1 (0, eps, eps)]");
  CHECK(format_event(re, 2, r.events[1]) == "    2  RC-Cl2    drop #1  [-#1]");
  CHECK(format_heap(re, heap_with(1, "rc", "r")) == "{#1 -> (1, rc, r)}");
}

TEST_CASE("typed programs run to an empty heap") {
  auto programs = typed_corpus();
  REQUIRE(programs.size() >= 3);
  for (const auto& [name, term] : programs) {
    CAPTURE(name);
    // step by hand so every configuration is inspected
    Config cfg{term, {}};
    std::uint64_t last_alloc = 0;
    std::size_t steps = 0;
    for (; steps < 100000; ++steps) {
      auto out = step(re, cfg);
      if (std::holds_alternative<Done>(out)) break;
      REQUIRE_MESSAGE(std::holds_alternative<Stepped>(out), reason_name(std::get<Stuck>(out).reason));
      auto& s = std::get<Stepped>(out);
      auto rules = matching_rules(re, *find_redex(*cfg.term), cfg.heap);
      REQUIRE(rules.size() == 1);
      CHECK(rules[0] == s.event.rule);
      if (s.event.rule == "RC-Ne") {
        CHECK(s.event.location->id > last_alloc);
        last_alloc = s.event.location->id;
      }
      cfg = std::move(s.next);
      auto v = runtime_oracle(cfg);
      CHECK_MESSAGE(v.empty(), (v.empty() ? std::string() : v[0]));
    }
    CHECK(steps < 100000);
    CHECK(core::is_value(*cfg.term));
    CHECK(cfg.heap.cells.empty());

    auto r = run(re, term, {100000, true});
    CHECK(r.status == RunResult::Status::Value);
    CHECK(r.violations.empty());
    CHECK(r.events.size() == steps);
  }
}

TEST_CASE("the file-copy program") {
  auto parsed = ordo::surface::parse(slurp(std::filesystem::path(ORDO_TEST_DATA) / "copy.ord"), re);
  REQUIRE(parsed.program);
  auto checked = ordo::checker::check_program(re, *parsed.program);
  REQUIRE(checked.program);
  auto r = run(re, checked.program->core);
  REQUIRE(r.status == RunResult::Status::Value);
  CHECK(show(r.final.term) == "unit");
  CHECK(r.final.heap.cells.empty());
  std::map<std::string, int> counts;
  for (const auto& e : r.events) ++counts[e.rule];
  CHECK(counts["RC-Ne"] == 2);
  CHECK(counts["RC-Sp"] == 2);
  CHECK(counts["RC-Op"] == 4);
  CHECK(counts["RC-Cl1"] == 2);
  CHECK(counts["RC-Cl2"] == 2);
}

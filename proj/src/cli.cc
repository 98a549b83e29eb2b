#include "ordo/cli.h"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ordo/checker.h"
#include "ordo/interp.h"

namespace ordo::cli {

namespace {

struct Options {
  std::string file;
  bool json = false;
  std::size_t fuel = 100000;
  std::string opm{opm::kDefaultOpm};
  bool paranoid = false;
  std::string at;
};

class Driver {
 public:
  Driver(const Options& opts, const opm::Opm& o, std::string source, std::ostream& out, std::ostream& err)
      : opts_(opts), o_(o), src_(std::move(source)), out_(out), err_(err) {}

  std::optional<checker::Program> front_end() {
    auto parsed = surface::parse(src_, o_);
    if (!parsed.program) {
      for (const auto& e : parsed.errors) diagnose(surface::kind_name(e.kind), e.span.begin, e.message);
      return std::nullopt;
    }
    auto checked = checker::check_program(o_, *parsed.program);
    for (const auto& e : checked.errors) {
      auto msg = e.message;
      if (!e.expected.empty() && msg.find(e.expected) == std::string::npos) {
        msg += fmt::format(" (expected {}, found {})", e.expected, e.actual);
      }
      diagnose(checker::kind_name(e.kind), e.span.begin, msg);
    }
    return checked.program;
  }

  int check() {
    auto p = front_end();
    if (!p) return kRejected;
    if (!opts_.json) {
      out_ << fmt::format("ok: {} with effect {}\n", core::print_type(o_, *p->type, true),
                          static_cast<int>(p->effect));
    }
    return kOk;
  }

  int dump_core() {
    auto p = front_end();
    if (!p) return kRejected;
    out_ << core::print_term(o_, *p->core) << "\n";
    return kOk;
  }

  int dump_graph() {
    auto p = front_end();
    if (!p) return kRejected;
    for (const auto& b : p->binders) {
      if (b.surface_name != opts_.at && b.core_name != opts_.at) continue;
      out_ << context::to_dot(o_, context::interpret(o_, b.scope), b.core_name);
      return kOk;
    }
    err_ << fmt::format("{}: no binder named '{}'\n", opts_.file, opts_.at);
    return kUsage;
  }

  int run(bool trace) {
    auto p = front_end();
    if (!p) return kRejected;
    auto r = interp::run(o_, p->core, {opts_.fuel, opts_.paranoid});
    if (trace) {
      for (std::size_t i = 0; i < r.events.size(); ++i) out_ << interp::format_event(o_, i + 1, r.events[i]) << "\n";
    }
    int code = kOk;
    switch (r.status) {
      case interp::RunResult::Status::Value:
        if (!opts_.json) out_ << core::print_term(o_, *r.final.term) << "\n";
        if (!r.final.heap.cells.empty()) {
          runtime("heap-not-empty", "resources left open: " + interp::format_heap(o_, r.final.heap));
          code = kRuntime;
        }
        break;
      case interp::RunResult::Status::Stuck:
        runtime(interp::reason_name(r.stuck->reason),
                fmt::format("stuck after {} steps at {}: {}", r.events.size(), flat(*r.stuck->redex), r.stuck->detail));
        code = kRuntime;
        break;
      case interp::RunResult::Status::FuelExhausted:
        runtime("fuel-exhausted", fmt::format("no value after {} steps", opts_.fuel));
        code = kFuel;
        break;
    }
    for (const auto& v : r.violations) {
      runtime("oracle-violation", v);
      code = kRuntime;
    }
    return code;
  }

 private:
  void diagnose(const std::string& kind, std::size_t offset, const std::string& message) {
    auto lc = surface::line_col(src_, offset);
    emit(kind, lc.line, lc.col, message);
  }

  void runtime(const std::string& kind, const std::string& message) { emit(kind, 0, 0, message); }

  void emit(const std::string& kind, std::size_t line, std::size_t col, const std::string& message) {
    if (opts_.json) {
      nlohmann::json j = {{"kind", kind}, {"line", line}, {"col", col}, {"message", message}};
      out_ << j.dump() << "\n";
    } else if (line == 0) {
      err_ << fmt::format("{}: {}: {}\n", opts_.file, kind, message);
    } else {
      err_ << fmt::format("{}:{}:{}: {}: {}\n", opts_.file, line, col, kind, message);
    }
  }

  std::string flat(const core::Term& t) const {
    std::string s = core::print_term(o_, t);
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '\n') {
        out += s[i];
        continue;
      }
      out += ' ';
      while (i + 1 < s.size() && s[i + 1] == ' ') ++i;
    }
    return out;
  }

  const Options& opts_;
  const opm::Opm& o_;
  std::string src_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Typechecker and interpreter for a calculus of ordered resources", "ordo"};
  app.require_subcommand(1);
  Options opts;

  std::vector<std::string> opm_names;
  for (auto n : opm::names()) opm_names.emplace_back(n);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", opts.file, "program to read")->required();
    sub->add_flag("--json", opts.json, "diagnostics as JSON lines");
    sub->add_option("--opm", opts.opm, "index algebra")->check(CLI::IsMember(opm_names));
  };
  auto* check = app.add_subcommand("check", "typecheck a program");
  auto* run = app.add_subcommand("run", "typecheck and evaluate a program");
  auto* trace = app.add_subcommand("trace", "evaluate, printing every step");
  auto* dump_core = app.add_subcommand("dump-core", "print the elaborated core term");
  auto* dump_graph = app.add_subcommand("dump-graph", "print the context of a binder's scope as DOT");
  for (auto* sub : {check, run, trace, dump_core, dump_graph}) add_common(sub);
  for (auto* sub : {run, trace}) {
    sub->add_option("--fuel", opts.fuel, "step budget")->check(CLI::NonNegativeNumber);
    sub->add_flag("--paranoid", opts.paranoid, "run the heap oracle after every step");
  }
  dump_graph->add_option("--at", opts.at, "binder name")->required();

  try {
    // CLI11 consumes the vector from the back
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  const opm::Opm* o = opm::find(opts.opm);
  std::ifstream in(opts.file);
  if (!in) {
    err << fmt::format("cannot read {}\n", opts.file);
    return kUsage;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  Driver d(opts, *o, ss.str(), out, err);

  if (check->parsed()) return d.check();
  if (run->parsed()) return d.run(false);
  if (trace->parsed()) return d.run(true);
  if (dump_core->parsed()) return d.dump_core();
  return d.dump_graph();
}

}  // namespace ordo::cli

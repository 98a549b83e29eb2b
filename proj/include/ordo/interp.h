#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ordo/core.h"
#include "ordo/opm.h"

namespace ordo::interp {

struct Cell {
  std::uint64_t refcount;  // n stands for n + 1 live references
  opm::Element envelope;
  opm::Element trace;
};

struct Heap {
  std::map<core::Location, Cell> cells;
  std::uint64_t next = 1;  // locations are never reused
};

struct Config {
  core::TermPtr term;
  Heap heap;
};

struct Stuck {
  enum class Reason { OpInadmissible, CloseIncomplete, NoRule };
  Reason reason;
  std::string detail;
  core::TermPtr redex;
};
const char* reason_name(Stuck::Reason r);  // "op-inadmissible", ...

struct Event {
  std::string rule;  // RE-Beta, ..., RC-Sp
  core::TermPtr redex;
  std::string delta;  // heap change, empty for β-steps
  std::optional<core::Location> location;
};

struct Stepped {
  Config next;
  Event event;
};
struct Done {
  Config final;
};
using StepOutcome = std::variant<Stepped, Done, Stuck>;

StepOutcome step(const opm::Opm& o, const Config& cfg);

// Every rule whose conclusion matches the redex and whose premises hold,
// checked rule by rule. Step applies the single member of this list.
std::vector<std::string> matching_rules(const opm::Opm& o, const core::Term& redex, const Heap& h);

// The redex step would contract, if the term is not a value.
core::TermPtr find_redex(const core::Term& t);

// Occurrence-count and domain checks; empty when the configuration passes.
std::vector<std::string> runtime_oracle(const Config& cfg);

struct RunOptions {
  std::size_t fuel = 100000;
  bool paranoid = false;  // run the oracle after every step, not only at the end
};

struct RunResult {
  enum class Status { Value, Stuck, FuelExhausted };
  Status status;
  Config final;
  std::optional<Stuck> stuck;
  std::vector<Event> events;
  std::vector<std::string> violations;  // prefixed with the step they were seen at
};

// Starts from the empty heap.
RunResult run(const opm::Opm& o, const core::TermPtr& m, const RunOptions& opts = {});

// One line: step index, rule, redex, heap delta.
std::string format_event(const opm::Opm& o, std::size_t index, const Event& e);
std::string format_heap(const opm::Opm& o, const Heap& h);

}  // namespace ordo::interp

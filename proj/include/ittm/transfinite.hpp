#pragma once

// Transfinite execution below omega squared.
//
// A detected exact cycle stands in for the approach to a limit ordinal: the
// values a cell takes cofinally often are exactly the values it takes inside
// one period. At the limit every cell is set to the maximum of those values
// under the declared tape-alphabet order, the head returns to cell 0 and
// control enters the reserved `limit` state.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ittm/dsl.hpp"
#include "ittm/error.hpp"
#include "ittm/machine.hpp"
#include "ittm/trace.hpp"

namespace ittm {

struct CellLimit {
  std::vector<Symbol> seen;  // distinct values inside the period, ascending
  Symbol limsup;

  friend bool operator==(const CellLimit&, const CellLimit&) = default;
};

struct LimitReport {
  Configuration limit_config;
  std::size_t cycle_start = 0;
  std::size_t period = 0;
  std::map<Position, CellLimit> per_cell;

  friend bool operator==(const LimitReport&, const LimitReport&) = default;
};

/// Limit configuration for a trace that ended in an exact cycle. Every cell
/// that is non-blank or under the head somewhere in the period is reported.
inline LimitReport limit_configuration(const Trace& trace, const Machine& m) {
  if (std::holds_alternative<outcome::TranslationCycle>(trace.outcome)) {
    throw Error(ErrorKind::UnboundedTape, "translation cycle: the tape contents drift away, no finite limit tape");
  }
  const auto* cycle = std::get_if<outcome::Cycle>(&trace.outcome);
  if (!cycle) throw Error(ErrorKind::NoCycleFound, "trace did not end in a cycle");
  if (cycle->period == 0 || cycle->start + cycle->period >= trace.steps.size()) {
    throw Error(ErrorKind::NoCycleFound, "cycle window lies outside the trace");
  }

  std::set<Position> touched;
  for (std::size_t i = cycle->start; i < cycle->start + cycle->period; ++i) {
    const auto& c = trace.steps[i].config;
    touched.insert(c.head);
    for (const auto& [pos, sym] : c.tape.cells()) touched.insert(pos);
  }

  auto rank = [&](const Symbol& s) {
    auto r = m.symbol_rank(s);
    if (!r) throw Error(ErrorKind::DomainError, "symbol " + s + " not in tape alphabet");
    return *r;
  };

  LimitReport report;
  report.cycle_start = cycle->start;
  report.period = cycle->period;
  report.limit_config = Configuration{kLimitState, 0, Tape(m.blank)};
  for (Position pos : touched) {
    std::set<std::size_t> ranks;
    for (std::size_t i = cycle->start; i < cycle->start + cycle->period; ++i) {
      ranks.insert(rank(trace.steps[i].config.tape.read(pos)));
    }
    CellLimit cell;
    for (auto r : ranks) cell.seen.push_back(m.tape_alphabet[r]);
    cell.limsup = cell.seen.back();
    report.limit_config.tape.write(pos, cell.limsup);
    report.per_cell.emplace(pos, std::move(cell));
  }
  return report;
}

/// Step budget per finite stage; the last entry is reused for later stages.
struct StageSchedule {
  std::vector<std::size_t> budgets{1000};

  std::size_t budget(std::size_t stage) const {
    if (budgets.empty()) return 0;
    return budgets[std::min(stage, budgets.size() - 1)];
  }
};

/// Runs finite stage 0, and at each detected cycle appends the limit
/// configuration at the next limit ordinal, continuing from it through the
/// `limit` rules. Stops after `max_limits` limit stages, leaving the last
/// cycle as the outcome. A machine without `limit` rules halts (plain) in
/// the limit configuration.
inline Trace run_transfinite(const Machine& m, const Tape& input, const StageSchedule& schedule,
                             std::size_t max_limits) {
  if (schedule.budgets.empty() ||
      std::any_of(schedule.budgets.begin(), schedule.budgets.end(), [](std::size_t b) { return b == 0; })) {
    throw Error(ErrorKind::DomainError, "stage budgets must be non-empty and at least 1");
  }

  Trace trace;
  trace.machine = m.name;
  trace.step_budget = schedule.budget(0);
  trace.steps.push_back({OrdinalTime{}, initial_configuration(m, input), std::monostate{}});
  const bool continues = m.has_rules_for(kLimitState);

  for (std::size_t stage = 0;; ++stage) {
    detail::run_stage(m, trace, schedule.budget(stage));
    if (std::holds_alternative<outcome::Halted>(trace.outcome)) return trace;
    if (std::holds_alternative<outcome::Running>(trace.outcome)) {
      throw Error(ErrorKind::LimitUndetectedWithinBudget,
                  "stage " + std::to_string(stage) + ": no halt and no cycle within " +
                      std::to_string(schedule.budget(stage)) + " steps");
    }
    if (stage == max_limits) return trace;

    LimitReport report = limit_configuration(trace, m);
    const OrdinalTime at = trace.steps.back().time.next_limit();
    trace.steps.push_back({at, report.limit_config, LimitMarker{}});
    if (!continues) {
      trace.outcome = outcome::Halted{report.limit_config, m.halt_kind(kLimitState)};
      return trace;
    }
  }
}

namespace verdict {

struct Halts {
  std::size_t steps = 0;
  HaltKind kind = HaltKind::Plain;
  friend bool operator==(const Halts&, const Halts&) = default;
};

/// Witness: configuration `start` recurs at `start + period`, shifted by
/// `drift` cells (zero for an exact cycle).
struct Diverges {
  bool translation = false;
  std::size_t start = 0;
  std::size_t period = 0;
  Position drift = 0;
  Configuration at_start;
  Configuration at_repeat;
  friend bool operator==(const Diverges&, const Diverges&) = default;
};

struct Unknown {
  std::size_t budget = 0;
  friend bool operator==(const Unknown&, const Unknown&) = default;
};

}  // namespace verdict

using HaltingVerdict = std::variant<verdict::Halts, verdict::Diverges, verdict::Unknown>;

/// Halts if the run halts within budget; Diverges when an exact or
/// translation cycle is observed; Unknown otherwise. Sound for deterministic
/// machines, complete only for cycle-witnessed divergence.
inline HaltingVerdict decide_halting_at_omega(const Machine& m, const Tape& input, std::size_t budget) {
  Trace t = run(m, input, budget);
  if (const auto* h = std::get_if<outcome::Halted>(&t.outcome)) return verdict::Halts{t.transitions(), h->kind};
  if (const auto* c = std::get_if<outcome::Cycle>(&t.outcome)) {
    return verdict::Diverges{false, c->start, c->period, 0, t.steps[c->start].config,
                             t.steps[c->start + c->period].config};
  }
  if (const auto* c = std::get_if<outcome::TranslationCycle>(&t.outcome)) {
    return verdict::Diverges{true, c->start, c->period, c->drift, t.steps[c->start].config,
                             t.steps[c->start + c->period].config};
  }
  return verdict::Unknown{budget};
}

/// Re-executes the machine from scratch and checks that the witness really
/// repeats: configuration start+period equals configuration start shifted
/// by the drift, and both match the recorded snapshots.
inline bool verify_witness(const Machine& m, const Tape& input, const verdict::Diverges& w) {
  if (w.period == 0) return false;
  if (!w.translation && w.drift != 0) return false;
  Configuration c = initial_configuration(m, input);
  Configuration at_start;
  for (std::size_t i = 0;; ++i) {
    if (i == w.start) at_start = c;
    if (i == w.start + w.period) break;
    if (m.is_halting(c.state)) return false;
    c = step(m, c);
  }
  Configuration expected{at_start.state, at_start.head + w.drift, at_start.tape.shifted(w.drift)};
  return c == expected && at_start == w.at_start && c == w.at_repeat;
}

inline std::string format_verdict(const HaltingVerdict& v) {
  struct V {
    std::string operator()(const verdict::Halts& h) const { return "Halts(" + std::to_string(h.steps) + ")"; }
    std::string operator()(const verdict::Diverges& d) const {
      if (d.translation) {
        return "Diverges(translation-cycle period=" + std::to_string(d.period) + " drift=" + format_drift(d.drift) + ")";
      }
      return "Diverges(cycle start=" + std::to_string(d.start) + " period=" + std::to_string(d.period) + ")";
    }
    std::string operator()(const verdict::Unknown& u) const { return "Unknown(" + std::to_string(u.budget) + ")"; }
  };
  return std::visit(V{}, v);
}

/// Report text: the limit configuration as a trace line at `time`, then one
/// `cell` line per reported position.
inline std::string format_limit_report(const LimitReport& r, OrdinalTime time = OrdinalTime::omega()) {
  std::string out = format_step(TraceStep{time, r.limit_config, LimitMarker{}}) + "\n";
  out += "cycle start=" + std::to_string(r.cycle_start) + " period=" + std::to_string(r.period) + "\n";
  for (const auto& [pos, cell] : r.per_cell) {
    out += "cell " + std::to_string(pos) + " seen=" + detail::join(cell.seen, ",") + " limsup=" + cell.limsup + "\n";
  }
  return out;
}

}  // namespace ittm

#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "ittm/machine.hpp"
#include "ittm/ordinal.hpp"

namespace ittm {

/// Marks a trace entry produced by the limit rule rather than by a transition.
struct LimitMarker {
  friend bool operator==(const LimitMarker&, const LimitMarker&) = default;
};

using Applied = std::variant<std::monostate, Rule, LimitMarker>;

struct TraceStep {
  OrdinalTime time;
  Configuration config;
  Applied applied;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

namespace outcome {

struct Halted {
  Configuration final_config;
  HaltKind kind = HaltKind::Plain;
  friend bool operator==(const Halted&, const Halted&) = default;
};

struct Running {
  friend bool operator==(const Running&, const Running&) = default;
};

/// steps[start + period] repeats steps[start] exactly.
struct Cycle {
  std::size_t start = 0;
  std::size_t period = 0;
  friend bool operator==(const Cycle&, const Cycle&) = default;
};

/// steps[start + period] is steps[start] translated by `drift` cells.
struct TranslationCycle {
  std::size_t start = 0;
  std::size_t period = 0;
  Position drift = 0;
  friend bool operator==(const TranslationCycle&, const TranslationCycle&) = default;
};

}  // namespace outcome

using Outcome = std::variant<outcome::Halted, outcome::Running, outcome::Cycle, outcome::TranslationCycle>;

struct Trace {
  std::string machine;
  std::vector<TraceStep> steps;
  Outcome outcome = outcome::Running{};
  std::size_t step_budget = 0;

  /// Number of recorded transitions.
  std::size_t transitions() const { return steps.empty() ? 0 : steps.size() - 1; }

  friend bool operator==(const Trace&, const Trace&) = default;
};

namespace detail {

/// Runs one finite stage, appending to `trace` starting from its last entry.
/// Cycle detection only considers entries of this stage (index >= first).
inline void run_stage(const Machine& m, Trace& trace, std::size_t budget) {
  const std::size_t first = trace.steps.size() - 1;
  std::unordered_map<std::string, std::size_t> seen;
  std::unordered_map<std::string, std::size_t> seen_relative;

  // Returns true if the entry at `idx` closes a cycle.
  auto record = [&](std::size_t idx) {
    const Configuration& c = trace.steps[idx].config;
    auto [it, fresh] = seen.emplace(canonical_key(c), idx);
    if (!fresh) {
      trace.outcome = outcome::Cycle{it->second, idx - it->second};
      return true;
    }
    auto [rit, rfresh] = seen_relative.emplace(relative_key(c), idx);
    if (!rfresh) {
      const Position drift = c.head - trace.steps[rit->second].config.head;
      trace.outcome = outcome::TranslationCycle{rit->second, idx - rit->second, drift};
      return true;
    }
    return false;
  };

  if (m.is_halting(trace.steps.back().config.state)) {
    const auto& c = trace.steps.back().config;
    trace.outcome = outcome::Halted{c, m.halt_kind(c.state)};
    return;
  }
  record(first);
  for (std::size_t n = 0; n < budget; ++n) {
    const TraceStep& cur = trace.steps.back();
    Rule rule = resolve(m, cur.config);
    TraceStep next{cur.time.successor(), apply(cur.config, rule), std::move(rule)};
    trace.steps.push_back(std::move(next));
    const auto& c = trace.steps.back().config;
    if (m.is_halting(c.state)) {
      trace.outcome = outcome::Halted{c, m.halt_kind(c.state)};
      return;
    }
    if (record(trace.steps.size() - 1)) return;
  }
  trace.outcome = outcome::Running{};
}

}  // namespace detail

/// Executes from (start, head 0, input) for at most `budget` transitions.
/// Stops on halt, on an exact repetition, or on a repetition up to a uniform
/// translation of head and tape.
inline Trace run(const Machine& m, const Tape& input, std::size_t budget) {
  if (budget == 0) throw Error(ErrorKind::DomainError, "budget must be at least 1");
  Trace trace;
  trace.machine = m.name;
  trace.step_budget = budget;
  trace.steps.push_back({OrdinalTime{}, initial_configuration(m, input), std::monostate{}});
  detail::run_stage(m, trace, budget);
  return trace;
}

}  // namespace ittm

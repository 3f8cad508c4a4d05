#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ittm/error.hpp"

namespace ittm {

using Symbol = std::string;
using StateId = std::string;
using Position = std::int64_t;

enum class Move { L, R, S };

constexpr char move_char(Move m) {
  switch (m) {
    case Move::L: return 'L';
    case Move::R: return 'R';
    case Move::S: return 'S';
  }
  return '?';
}

constexpr Position move_delta(Move m) {
  return m == Move::L ? -1 : (m == Move::R ? 1 : 0);
}

enum class HaltKind { Plain, Accept, Reject };

/// Reserved control state entered at every limit ordinal.
inline const StateId kLimitState = "limit";
/// Target of the implicit transition taken by `partial` machines on a missing pair.
inline const StateId kImplicitReject = "__reject";

/// Two-way infinite tape stored sparsely; blank cells are never stored.
class Tape {
 public:
  Tape() = default;
  explicit Tape(Symbol blank) : blank_(std::move(blank)) {}

  const Symbol& blank() const { return blank_; }
  const std::map<Position, Symbol>& cells() const { return cells_; }
  bool all_blank() const { return cells_.empty(); }

  const Symbol& read(Position pos) const {
    auto it = cells_.find(pos);
    return it == cells_.end() ? blank_ : it->second;
  }

  void write(Position pos, const Symbol& sym) {
    if (sym == blank_) {
      cells_.erase(pos);
    } else {
      cells_[pos] = sym;
    }
  }

  Position min_position() const { return cells_.empty() ? 0 : cells_.begin()->first; }
  Position max_position() const { return cells_.empty() ? -1 : cells_.rbegin()->first; }

  /// Same contents with every cell moved by `offset`.
  Tape shifted(Position offset) const {
    Tape out(blank_);
    for (const auto& [pos, sym] : cells_) out.cells_.emplace(pos + offset, sym);
    return out;
  }

  /// `<min>..<max>:<symbols>` over the stored window; interior blanks are
  /// written out. Symbols are concatenated when all are one character long,
  /// otherwise joined with '.'. An all-blank tape renders as `0..-1:`.
  std::string render() const {
    std::string out = std::to_string(min_position()) + ".." + std::to_string(max_position()) + ":";
    if (cells_.empty()) return out;
    bool single = blank_.size() == 1 &&
                  std::all_of(cells_.begin(), cells_.end(), [](const auto& c) { return c.second.size() == 1; });
    for (Position p = min_position(); p <= max_position(); ++p) {
      if (!single && p != min_position()) out += '.';
      out += read(p);
    }
    return out;
  }

  /// Symbols from `from` to `to` inclusive, concatenated.
  std::string slice(Position from, Position to) const {
    std::string out;
    for (Position p = from; p <= to; ++p) out += read(p);
    return out;
  }

  friend bool operator==(const Tape&, const Tape&) = default;

 private:
  Symbol blank_ = "B";
  std::map<Position, Symbol> cells_;
};

struct Configuration {
  StateId state;
  Position head = 0;
  Tape tape;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Deterministic text key; equal configurations give identical keys.
inline std::string canonical_key(const Configuration& c) {
  return c.state + "@" + std::to_string(c.head) + "|" + c.tape.render();
}

/// Key of the configuration seen from the head: equal for configurations
/// that differ only by a uniform translation of head and tape.
inline std::string relative_key(const Configuration& c) {
  return c.state + "|" + c.tape.shifted(-c.head).render();
}

struct Action {
  Symbol write;
  Move move = Move::S;
  StateId next;

  friend bool operator==(const Action&, const Action&) = default;
};

struct Rule {
  StateId state;
  Symbol read;
  Symbol write;
  Move move = Move::S;
  StateId next;

  /// `q0,1->1,R,q0`
  std::string to_string() const {
    return state + "," + read + "->" + write + "," + move_char(move) + "," + next;
  }

  friend bool operator==(const Rule&, const Rule&) = default;
};

struct Machine {
  std::string name;
  std::vector<StateId> states;
  std::vector<Symbol> input_alphabet;
  std::vector<Symbol> tape_alphabet;
  Symbol blank = "B";
  std::map<std::pair<StateId, Symbol>, Action> rules;
  StateId start;
  std::map<StateId, HaltKind> halting;
  bool partial = false;

  bool is_halting(const StateId& q) const { return q == kImplicitReject || halting.count(q) > 0; }

  HaltKind halt_kind(const StateId& q) const {
    if (q == kImplicitReject) return HaltKind::Reject;
    auto it = halting.find(q);
    return it == halting.end() ? HaltKind::Plain : it->second;
  }

  /// Rank in the declared tape alphabet; this is the total order used for limsup.
  std::optional<std::size_t> symbol_rank(const Symbol& s) const {
    auto it = std::find(tape_alphabet.begin(), tape_alphabet.end(), s);
    if (it == tape_alphabet.end()) return std::nullopt;
    return static_cast<std::size_t>(it - tape_alphabet.begin());
  }

  /// Listing order for rules: input symbols first, then the other tape
  /// symbols, each group in declared order.
  std::optional<std::size_t> symbol_index(const Symbol& s) const {
    auto in = std::find(input_alphabet.begin(), input_alphabet.end(), s);
    if (in != input_alphabet.end()) return static_cast<std::size_t>(in - input_alphabet.begin());
    if (!symbol_rank(s)) return std::nullopt;
    std::size_t i = input_alphabet.size();
    for (const auto& g : tape_alphabet) {
      if (g == s) return i;
      if (std::find(input_alphabet.begin(), input_alphabet.end(), g) == input_alphabet.end()) ++i;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> state_index(const StateId& q) const {
    auto it = std::find(states.begin(), states.end(), q);
    if (it == states.end()) return std::nullopt;
    return static_cast<std::size_t>(it - states.begin());
  }

  bool has_state(const StateId& q) const { return state_index(q).has_value(); }

  bool has_rules_for(const StateId& q) const {
    auto it = rules.lower_bound({q, Symbol{}});
    return it != rules.end() && it->first.first == q;
  }

  std::optional<Rule> lookup(const StateId& q, const Symbol& s) const {
    auto it = rules.find({q, s});
    if (it == rules.end()) return std::nullopt;
    return Rule{q, s, it->second.write, it->second.move, it->second.next};
  }

  /// Rules in canonical order: by (state index, symbol index).
  std::vector<Rule> sorted_rules() const {
    std::vector<Rule> out;
    out.reserve(rules.size());
    for (const auto& [key, act] : rules) out.push_back({key.first, key.second, act.write, act.move, act.next});
    auto rank = [this](const Rule& r) {
      return std::pair{state_index(r.state).value_or(states.size()), symbol_index(r.read).value_or(tape_alphabet.size())};
    };
    std::stable_sort(out.begin(), out.end(), [&](const Rule& a, const Rule& b) { return rank(a) < rank(b); });
    return out;
  }

  friend bool operator==(const Machine&, const Machine&) = default;
};

struct Violation {
  std::string field;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::vector<Violation> validate(const Machine& m) {
  std::vector<Violation> out;
  auto in = [](const auto& vec, const auto& x) { return std::find(vec.begin(), vec.end(), x) != vec.end(); };
  auto has_dupes = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
  };

  if (has_dupes(m.states)) out.push_back({"states", "duplicate state"});
  if (has_dupes(m.tape_alphabet)) out.push_back({"tape_alphabet", "duplicate symbol"});
  if (has_dupes(m.input_alphabet)) out.push_back({"input_alphabet", "duplicate symbol"});
  if (!in(m.tape_alphabet, m.blank)) out.push_back({"blank", "blank " + m.blank + " not in tape alphabet"});
  if (in(m.input_alphabet, m.blank)) out.push_back({"input_alphabet", "blank " + m.blank + " in input alphabet"});
  for (const auto& s : m.input_alphabet) {
    if (!in(m.tape_alphabet, s)) out.push_back({"input_alphabet", "input symbol " + s + " not in tape alphabet"});
  }
  if (!in(m.states, m.start)) out.push_back({"start", "start state " + m.start + " not in states"});
  for (const auto& [q, kind] : m.halting) {
    if (!in(m.states, q)) out.push_back({"halting", "halting state " + q + " not in states"});
  }
  for (const auto& [key, act] : m.rules) {
    const auto& [q, s] = key;
    std::string where = "rule (" + q + ", " + s + ")";
    if (!in(m.states, q)) out.push_back({"rules", where + ": unknown source state " + q});
    if (!in(m.states, act.next)) out.push_back({"rules", where + ": unknown next state " + act.next});
    if (!in(m.tape_alphabet, s)) out.push_back({"rules", where + ": unknown read symbol " + s});
    if (!in(m.tape_alphabet, act.write)) out.push_back({"rules", where + ": unknown write symbol " + act.write});
    if (m.is_halting(q)) out.push_back({"rules", where + ": rule from halting state"});
  }
  if (!m.partial) {
    for (const auto& q : m.states) {
      if (m.is_halting(q)) continue;
      for (const auto& g : m.tape_alphabet) {
        if (!m.rules.count({q, g})) out.push_back({"rules", "missing rule (" + q + ", " + g + ")"});
      }
    }
  }
  return out;
}

/// The rule that fires in `c`. Partial machines fall through to an implicit
/// reject that leaves the cell and head unchanged.
inline Rule resolve(const Machine& m, const Configuration& c) {
  if (m.is_halting(c.state)) throw Error(ErrorKind::HaltedMachineStepped, "state " + c.state + " is halting");
  const Symbol& read = c.tape.read(c.head);
  if (auto rule = m.lookup(c.state, read)) return *rule;
  if (m.partial) return Rule{c.state, read, read, Move::S, kImplicitReject};
  throw Error(ErrorKind::MissingRule, "no rule for (" + c.state + ", " + read + ")");
}

inline Configuration apply(const Configuration& c, const Rule& rule) {
  Configuration next = c;
  next.tape.write(c.head, rule.write);
  next.head = c.head + move_delta(rule.move);
  next.state = rule.next;
  return next;
}

inline Configuration step(const Machine& m, const Configuration& c) { return apply(c, resolve(m, c)); }

/// Start state, head on cell 0, input re-read against the machine's blank.
inline Configuration initial_configuration(const Machine& m, const Tape& input) {
  Tape tape(m.blank);
  for (const auto& [pos, sym] : input.cells()) tape.write(pos, sym);
  return Configuration{m.start, 0, std::move(tape)};
}

}  // namespace ittm

#pragma once

// Text formats: machine files, tape literals, ordinal literals and traces.
//
// Machine files are line oriented. `#` starts a comment. Directives:
//
//   machine <name>
//   partial
//   blank <symbol>
//   input_alphabet <symbol>...
//   tape_alphabet <symbol>...      declaration order is the limsup order, ascending
//   states <state>...              optional; otherwise order of first mention
//   start <state>
//   halt|accept|reject <state>...
//   rule <state> <read> -> <write> <L|R|S> <next>
//
// `-` is accepted as a move and means S. Identifiers use [A-Za-z0-9_] and may
// not begin with "__".

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ittm/error.hpp"
#include "ittm/machine.hpp"
#include "ittm/ordinal.hpp"
#include "ittm/trace.hpp"

namespace ittm {

struct SourceSpan {
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t length = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class ParseErrorKind {
  UnknownDirective,
  DuplicateRule,
  UnknownSymbol,
  UnknownState,
  BadOrdinal,
  BadMove,
  Syntax,
  Invariant,
};

constexpr std::string_view parse_error_code(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::UnknownDirective: return "E001";
    case ParseErrorKind::DuplicateRule: return "E002";
    case ParseErrorKind::UnknownSymbol: return "E003";
    case ParseErrorKind::UnknownState: return "E004";
    case ParseErrorKind::BadOrdinal: return "E005";
    case ParseErrorKind::BadMove: return "E006";
    case ParseErrorKind::Syntax: return "E007";
    case ParseErrorKind::Invariant: return "E008";
  }
  return "E000";
}

constexpr std::string_view parse_error_name(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::UnknownDirective: return "UnknownDirective";
    case ParseErrorKind::DuplicateRule: return "DuplicateRule";
    case ParseErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ParseErrorKind::UnknownState: return "UnknownState";
    case ParseErrorKind::BadOrdinal: return "BadOrdinal";
    case ParseErrorKind::BadMove: return "BadMove";
    case ParseErrorKind::Syntax: return "Syntax";
    case ParseErrorKind::Invariant: return "Invariant";
  }
  return "Unknown";
}

struct ParseError {
  SourceSpan span;
  ParseErrorKind kind = ParseErrorKind::Syntax;
  std::string message;

  std::string code() const { return std::string(parse_error_code(kind)); }

  /// `3:7: E003 UnknownSymbol: ...`
  std::string to_string() const {
    return std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + code() + " " +
           std::string(parse_error_name(kind)) + ": " + message;
  }

  friend bool operator==(const ParseError&, const ParseError&) = default;
};

template <class T>
struct Parsed {
  std::optional<T> value;
  std::vector<ParseError> errors;

  bool ok() const { return value.has_value(); }
  const T& operator*() const { return *value; }
  const T* operator->() const { return &*value; }
};

/// Unwraps a parse result, throwing ParseFailure with every message joined.
template <class T>
T expect(Parsed<T> parsed, std::string_view what = "input") {
  if (parsed.ok()) return std::move(*parsed.value);
  std::string msg(what);
  for (const auto& e : parsed.errors) msg += "\n  " + e.to_string();
  throw Error(ErrorKind::ParseFailure, msg);
}

namespace detail {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

inline std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != '#') ++j;
    out.push_back({std::string(line.substr(i, j - i)), i + 1});
    i = j;
  }
  return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty() || s.substr(0, 2) == "__") return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<Move> parse_move(std::string_view s) {
  if (s == "L") return Move::L;
  if (s == "R") return Move::R;
  if (s == "S" || s == "-") return Move::S;
  return std::nullopt;
}

inline std::string halt_directive(HaltKind k) {
  switch (k) {
    case HaltKind::Accept: return "accept";
    case HaltKind::Reject: return "reject";
    case HaltKind::Plain: break;
  }
  return "halt";
}

inline std::string join(const std::vector<std::string>& v, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

}  // namespace detail

inline Parsed<Machine> parse_machine(std::string_view source) {
  using detail::Token;
  Parsed<Machine> result;
  auto& errors = result.errors;
  auto err = [&](std::size_t line, const Token& tok, ParseErrorKind kind, std::string msg) {
    errors.push_back({{line, tok.column, tok.text.size()}, kind, std::move(msg)});
  };

  struct Mention {
    std::size_t line;
    Token tok;
  };
  struct RuleLine {
    std::size_t line;
    Token state, read, write, move, next;
  };

  Machine m;
  std::map<std::string, std::size_t> seen_directive;
  std::optional<std::vector<Mention>> declared_states;
  std::vector<Mention> state_mentions;  // in file order, for the derived order
  std::vector<std::pair<Mention, HaltKind>> halts;
  std::optional<Mention> start;
  std::vector<RuleLine> rule_lines;
  std::vector<Token> tape_alpha_tokens;
  std::vector<Token> input_alpha_tokens;
  std::optional<Mention> blank;

  auto lines = detail::split_lines(source);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t ln = li + 1;
    auto toks = detail::tokenize(lines[li]);
    if (toks.empty()) continue;
    const std::string& dir = toks[0].text;
    auto once = [&]() {
      if (seen_directive.count(dir)) {
        err(ln, toks[0], ParseErrorKind::Syntax, "duplicate directive '" + dir + "'");
        return false;
      }
      seen_directive[dir] = ln;
      return true;
    };
    auto ident = [&](const Token& t) {
      if (detail::is_identifier(t.text)) return true;
      err(ln, t, ParseErrorKind::Syntax, "invalid identifier '" + t.text + "'");
      return false;
    };
    auto arity = [&](std::size_t n) {
      if (toks.size() == n + 1) return true;
      err(ln, toks[0], ParseErrorKind::Syntax, "'" + dir + "' takes " + std::to_string(n) + " argument(s)");
      return false;
    };

    if (dir == "machine") {
      if (once() && arity(1) && ident(toks[1])) m.name = toks[1].text;
    } else if (dir == "partial") {
      if (once() && arity(0)) m.partial = true;
    } else if (dir == "blank") {
      if (once() && arity(1) && ident(toks[1])) blank = Mention{ln, toks[1]};
    } else if (dir == "input_alphabet" || dir == "tape_alphabet") {
      if (!once()) continue;
      auto& dst = dir == "input_alphabet" ? input_alpha_tokens : tape_alpha_tokens;
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (ident(toks[i])) dst.push_back(toks[i]);
      }
    } else if (dir == "states") {
      if (!once()) continue;
      declared_states.emplace();
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (ident(toks[i])) declared_states->push_back({ln, toks[i]});
      }
    } else if (dir == "start") {
      if (once() && arity(1) && ident(toks[1])) {
        start = Mention{ln, toks[1]};
        state_mentions.push_back(*start);
      }
    } else if (dir == "halt" || dir == "accept" || dir == "reject") {
      HaltKind kind = dir == "halt" ? HaltKind::Plain : (dir == "accept" ? HaltKind::Accept : HaltKind::Reject);
      if (toks.size() < 2) err(ln, toks[0], ParseErrorKind::Syntax, "'" + dir + "' needs at least one state");
      for (std::size_t i = 1; i < toks.size(); ++i) {
        if (!ident(toks[i])) continue;
        halts.push_back({{ln, toks[i]}, kind});
        state_mentions.push_back({ln, toks[i]});
      }
    } else if (dir == "rule") {
      if (toks.size() != 7 || toks[3].text != "->") {
        err(ln, toks[0], ParseErrorKind::Syntax, "expected 'rule <state> <read> -> <write> <move> <next>'");
        continue;
      }
      bool good = ident(toks[1]) & ident(toks[2]) & ident(toks[4]) & ident(toks[6]);
      if (!detail::parse_move(toks[5].text)) {
        err(ln, toks[5], ParseErrorKind::BadMove, "move must be L, R, S or -, got '" + toks[5].text + "'");
        good = false;
      }
      if (!good) continue;
      rule_lines.push_back({ln, toks[1], toks[2], toks[4], toks[5], toks[6]});
      state_mentions.push_back({ln, toks[1]});
      state_mentions.push_back({ln, toks[6]});
    } else {
      err(ln, toks[0], ParseErrorKind::UnknownDirective, "unknown directive '" + dir + "'");
    }
  }

  const Token nowhere{"", 1};
  if (m.name.empty() && !seen_directive.count("machine")) err(1, nowhere, ParseErrorKind::Syntax, "missing 'machine' directive");
  if (!blank && !seen_directive.count("blank")) err(1, nowhere, ParseErrorKind::Syntax, "missing 'blank' directive");
  if (!seen_directive.count("tape_alphabet")) err(1, nowhere, ParseErrorKind::Syntax, "missing 'tape_alphabet' directive");
  if (!start && !seen_directive.count("start")) err(1, nowhere, ParseErrorKind::Syntax, "missing 'start' directive");

  std::set<std::string> gamma;
  for (const auto& t : tape_alpha_tokens) {
    if (!gamma.insert(t.text).second) {
      errors.push_back({{seen_directive["tape_alphabet"], t.column, t.text.size()}, ParseErrorKind::Syntax,
                        "duplicate symbol '" + t.text + "'"});
      continue;
    }
    m.tape_alphabet.push_back(t.text);
  }
  auto check_symbol = [&](std::size_t ln, const Token& t) {
    if (gamma.count(t.text)) return true;
    err(ln, t, ParseErrorKind::UnknownSymbol, "symbol '" + t.text + "' not in tape_alphabet");
    return false;
  };
  if (blank) {
    m.blank = blank->tok.text;
    if (seen_directive.count("tape_alphabet")) check_symbol(blank->line, blank->tok);
  }
  for (const auto& t : input_alpha_tokens) {
    const std::size_t ln = seen_directive["input_alphabet"];
    if (std::find(m.input_alphabet.begin(), m.input_alphabet.end(), t.text) != m.input_alphabet.end()) {
      err(ln, t, ParseErrorKind::Syntax, "duplicate symbol '" + t.text + "'");
      continue;
    }
    if (blank && t.text == m.blank) {
      err(ln, t, ParseErrorKind::Invariant, "blank may not be an input symbol");
      continue;
    }
    if (check_symbol(ln, t)) m.input_alphabet.push_back(t.text);
  }

  std::set<std::string> q_set;
  if (declared_states) {
    for (const auto& s : *declared_states) {
      if (!q_set.insert(s.tok.text).second) {
        err(s.line, s.tok, ParseErrorKind::Syntax, "duplicate state '" + s.tok.text + "'");
        continue;
      }
      m.states.push_back(s.tok.text);
    }
  }
  auto check_state = [&](const Mention& s) {
    if (q_set.count(s.tok.text)) return true;
    if (!declared_states) {
      q_set.insert(s.tok.text);
      m.states.push_back(s.tok.text);
      return true;
    }
    err(s.line, s.tok, ParseErrorKind::UnknownState, "state '" + s.tok.text + "' not declared in 'states'");
    return false;
  };
  for (const auto& s : state_mentions) check_state(s);
  if (start) m.start = start->tok.text;
  for (const auto& [s, kind] : halts) {
    if (m.halting.count(s.tok.text)) {
      err(s.line, s.tok, ParseErrorKind::Syntax, "state '" + s.tok.text + "' already marked halting");
      continue;
    }
    m.halting[s.tok.text] = kind;
  }

  for (const auto& r : rule_lines) {
    bool good = check_symbol(r.line, r.read) & check_symbol(r.line, r.write);
    if (m.halting.count(r.state.text)) {
      err(r.line, r.state, ParseErrorKind::Invariant, "rule from halting state '" + r.state.text + "'");
      good = false;
    }
    auto key = std::pair{r.state.text, r.read.text};
    if (m.rules.count(key)) {
      errors.push_back({{r.line, 1, 4}, ParseErrorKind::DuplicateRule,
                        "second rule for (" + r.state.text + ", " + r.read.text + ")"});
      continue;
    }
    if (good) m.rules[key] = Action{r.write.text, *detail::parse_move(r.move.text), r.next.text};
  }

  if (errors.empty()) {
    for (const auto& v : validate(m)) {
      const std::size_t ln = seen_directive.count(v.field) ? seen_directive[v.field] : 1;
      errors.push_back({{ln, 1, 0}, ParseErrorKind::Invariant, v.field + ": " + v.message});
    }
  }
  std::stable_sort(errors.begin(), errors.end(), [](const ParseError& a, const ParseError& b) {
    return std::pair{a.span.line, a.span.column} < std::pair{b.span.line, b.span.column};
  });
  if (errors.empty()) result.value = std::move(m);
  return result;
}

/// Canonical text: directives in fixed order, rules sorted by (state index,
/// symbol index). A `states` line is written only when the order of first
/// mention would not reproduce the machine's state order.
inline std::string serialize_machine(const Machine& m) {
  std::vector<std::string> halting_in_order;
  for (const auto& q : m.states) {
    if (m.halting.count(q)) halting_in_order.push_back(q);
  }
  const auto rules = m.sorted_rules();

  std::vector<std::string> derived;
  auto mention = [&](const std::string& q) {
    if (std::find(derived.begin(), derived.end(), q) == derived.end()) derived.push_back(q);
  };
  mention(m.start);
  for (const auto& q : halting_in_order) mention(q);
  for (const auto& r : rules) {
    mention(r.state);
    mention(r.next);
  }

  std::ostringstream out;
  out << "machine " << m.name << "\n";
  if (m.partial) out << "partial\n";
  out << "blank " << m.blank << "\n";
  out << "input_alphabet";
  for (const auto& s : m.input_alphabet) out << " " << s;
  out << "\ntape_alphabet";
  for (const auto& s : m.tape_alphabet) out << " " << s;
  out << "\n";
  if (derived != m.states) out << "states " << detail::join(m.states) << "\n";
  out << "start " << m.start << "\n";
  for (const auto& q : halting_in_order) out << detail::halt_directive(m.halting.at(q)) << " " << q << "\n";
  for (const auto& r : rules) {
    out << "rule " << r.state << " " << r.read << " -> " << r.write << " " << move_char(r.move) << " " << r.next << "\n";
  }
  return out.str();
}

/// Symbol i of the literal goes to cell i. A single token over a
/// single-character input alphabet is split per character; otherwise symbols
/// are whitespace separated.
inline Parsed<Tape> parse_tape(std::string_view literal, const Machine& m) {
  Parsed<Tape> result;
  auto toks = detail::tokenize(literal);
  const bool single_char = std::all_of(m.input_alphabet.begin(), m.input_alphabet.end(),
                                       [](const Symbol& s) { return s.size() == 1; });
  std::vector<detail::Token> symbols;
  if (toks.size() == 1 && single_char) {
    for (std::size_t i = 0; i < toks[0].text.size(); ++i) {
      symbols.push_back({std::string(1, toks[0].text[i]), toks[0].column + i});
    }
  } else {
    symbols = std::move(toks);
  }
  Tape tape(m.blank);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto& s = symbols[i];
    if (std::find(m.input_alphabet.begin(), m.input_alphabet.end(), s.text) == m.input_alphabet.end()) {
      result.errors.push_back({{1, s.column, s.text.size()}, ParseErrorKind::UnknownSymbol,
                               "'" + s.text + "' is not an input symbol"});
      continue;
    }
    tape.write(static_cast<Position>(i), s.text);
  }
  if (result.errors.empty()) result.value = std::move(tape);
  return result;
}

/// Grammar: `<n>` | `w[*<a>][+<b>]` with a >= 1.
inline Parsed<OrdinalTime> parse_ordinal(std::string_view text) {
  Parsed<OrdinalTime> result;
  auto bad = [&](std::string msg) {
    result.errors.push_back({{1, 1, text.size()}, ParseErrorKind::BadOrdinal, std::move(msg)});
    return result;
  };
  auto digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  if (text.empty()) return bad("empty ordinal");
  if (text[0] != 'w') {
    if (!digits(text)) return bad("expected a natural number or w-form, got '" + std::string(text) + "'");
    auto n = detail::parse_int<std::uint64_t>(text);
    if (!n) return bad("ordinal offset out of range");
    result.value = OrdinalTime::finite(*n);
    return result;
  }
  std::string_view rest = text.substr(1);
  OrdinalTime t{1, 0};
  if (!rest.empty() && rest[0] == '*') {
    rest.remove_prefix(1);
    std::size_t end = std::min(rest.find('+'), rest.size());
    auto coef = rest.substr(0, end);
    auto k = digits(coef) ? detail::parse_int<std::uint64_t>(coef) : std::nullopt;
    if (!k || *k == 0) return bad("omega coefficient must be a positive integer");
    t.limits = *k;
    rest.remove_prefix(end);
  }
  if (!rest.empty()) {
    if (rest[0] != '+') return bad("unexpected '" + std::string(rest) + "'");
    rest.remove_prefix(1);
    auto n = digits(rest) ? detail::parse_int<std::uint64_t>(rest) : std::nullopt;
    if (!n) return bad("offset must be a natural number");
    t.offset = *n;
  }
  result.value = t;
  return result;
}

// ---------------------------------------------------------------------------
// Trace format

inline std::string format_drift(Position d) { return (d >= 0 ? "+" : "") + std::to_string(d); }

inline std::string format_step(const TraceStep& s) {
  std::string out = "t=" + format_ordinal(s.time) + " state=" + s.config.state + " head=" +
                    std::to_string(s.config.head) + " tape=" + s.config.tape.render();
  if (const auto* r = std::get_if<Rule>(&s.applied)) out += " via=" + r->to_string();
  if (std::holds_alternative<LimitMarker>(s.applied)) out += " via=limit";
  return out;
}

inline std::string format_outcome(const Trace& t) {
  struct V {
    const Trace& t;
    std::string operator()(const outcome::Halted& h) const {
      std::string kind = h.kind == HaltKind::Accept ? "accept" : (h.kind == HaltKind::Reject ? "reject" : "plain");
      return "outcome=Halted kind=" + kind + " steps=" + std::to_string(t.transitions());
    }
    std::string operator()(const outcome::Running&) const {
      return "outcome=Running budget=" + std::to_string(t.step_budget);
    }
    std::string operator()(const outcome::Cycle& c) const {
      return "outcome=Cycle start=" + std::to_string(c.start) + " period=" + std::to_string(c.period);
    }
    std::string operator()(const outcome::TranslationCycle& c) const {
      return "outcome=TranslationCycle start=" + std::to_string(c.start) + " period=" + std::to_string(c.period) +
             " drift=" + format_drift(c.drift);
    }
  };
  return std::visit(V{t}, t.outcome);
}

/// One line per recorded step followed by one outcome line.
inline std::string format_trace(const Trace& t) {
  std::string out;
  for (const auto& s : t.steps) out += format_step(s) + "\n";
  out += format_outcome(t) + "\n";
  return out;
}

/// Inverse of Tape::render.
inline std::optional<Tape> parse_rendered_tape(std::string_view text, const Symbol& blank) {
  if (text.empty()) return std::nullopt;
  // The minimum may be negative; skip its sign.
  auto dots = text.find("..", text[0] == '-' ? 1 : 0);
  auto colon = text.find(':', dots);
  if (dots == std::string_view::npos || colon == std::string_view::npos) return std::nullopt;
  auto lo = detail::parse_int<Position>(text.substr(0, dots));
  auto hi = detail::parse_int<Position>(text.substr(dots + 2, colon - dots - 2));
  if (!lo || !hi) return std::nullopt;
  std::string_view body = text.substr(colon + 1);
  Tape tape(blank);
  if (*hi < *lo) {
    if (!body.empty()) return std::nullopt;
    return tape;
  }
  const auto count = static_cast<std::size_t>(*hi - *lo + 1);
  std::vector<std::string> syms;
  if (count == 1) {
    syms.emplace_back(body);
  } else if (body.find('.') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      auto p = body.find('.', start);
      syms.emplace_back(body.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
      if (p == std::string_view::npos) break;
      start = p + 1;
    }
  } else {
    for (char c : body) syms.emplace_back(1, c);
  }
  if (syms.size() != count) return std::nullopt;
  for (std::size_t i = 0; i < count; ++i) {
    if (syms[i].empty()) return std::nullopt;
    tape.write(*lo + static_cast<Position>(i), syms[i]);
  }
  return tape;
}

/// Inverse of canonical_key; nullopt for keys that are not configuration keys.
inline std::optional<Configuration> parse_canonical_key(std::string_view key, const Symbol& blank) {
  auto at = key.find('@');
  auto bar = key.find('|', at == std::string_view::npos ? 0 : at);
  if (at == std::string_view::npos || bar == std::string_view::npos) return std::nullopt;
  auto head = detail::parse_int<Position>(key.substr(at + 1, bar - at - 1));
  auto tape = parse_rendered_tape(key.substr(bar + 1), blank);
  if (!head || !tape) return std::nullopt;
  return Configuration{std::string(key.substr(0, at)), *head, std::move(*tape)};
}

namespace detail {

inline std::optional<Rule> parse_rule_text(std::string_view s) {
  // q,r->w,m,n
  auto arrow = s.find("->");
  if (arrow == std::string_view::npos) return std::nullopt;
  auto lhs = s.substr(0, arrow), rhs = s.substr(arrow + 2);
  auto c1 = lhs.find(',');
  if (c1 == std::string_view::npos) return std::nullopt;
  auto r1 = rhs.find(','), r2 = rhs.find(',', r1 == std::string_view::npos ? 0 : r1 + 1);
  if (r1 == std::string_view::npos || r2 == std::string_view::npos) return std::nullopt;
  auto move = parse_move(rhs.substr(r1 + 1, r2 - r1 - 1));
  if (!move) return std::nullopt;
  return Rule{std::string(lhs.substr(0, c1)), std::string(lhs.substr(c1 + 1)), std::string(rhs.substr(0, r1)), *move,
              std::string(rhs.substr(r2 + 1))};
}

inline std::map<std::string, std::string> fields(const std::vector<Token>& toks) {
  std::map<std::string, std::string> out;
  for (const auto& t : toks) {
    auto eq = t.text.find('=');
    if (eq == std::string::npos) continue;
    out[t.text.substr(0, eq)] = t.text.substr(eq + 1);
  }
  return out;
}

}  // namespace detail

/// Reads a trace written by format_trace. The machine supplies the blank
/// symbol and the halt kinds.
inline Parsed<Trace> parse_trace(std::string_view text, const Machine& m) {
  Parsed<Trace> result;
  Trace trace;
  trace.machine = m.name;
  auto lines = detail::split_lines(text);
  bool have_outcome = false;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t ln = li + 1;
    auto toks = detail::tokenize(lines[li]);
    if (toks.empty()) continue;
    auto bad = [&](std::string msg) {
      result.errors.push_back({{ln, 1, lines[li].size()}, ParseErrorKind::Syntax, std::move(msg)});
    };
    auto f = detail::fields(toks);
    if (have_outcome) {
      bad("content after outcome line");
      break;
    }
    if (f.count("outcome")) {
      have_outcome = true;
      const auto& o = f["outcome"];
      auto num = [&](const char* k) { return f.count(k) ? detail::parse_int<std::int64_t>(f[k]) : std::nullopt; };
      if (o == "Halted") {
        if (trace.steps.empty()) {
          bad("halted trace without steps");
          continue;
        }
        const auto& c = trace.steps.back().config;
        trace.outcome = outcome::Halted{c, m.halt_kind(c.state)};
        trace.step_budget = trace.transitions();
      } else if (o == "Running") {
        auto b = num("budget");
        if (!b) bad("Running outcome needs budget=");
        trace.outcome = outcome::Running{};
        trace.step_budget = static_cast<std::size_t>(b.value_or(0));
      } else if (o == "Cycle") {
        auto s = num("start"), p = num("period");
        if (!s || !p) bad("Cycle outcome needs start= and period=");
        trace.outcome = outcome::Cycle{static_cast<std::size_t>(s.value_or(0)), static_cast<std::size_t>(p.value_or(0))};
      } else if (o == "TranslationCycle") {
        auto s = num("start"), p = num("period"), d = num("drift");
        if (!s || !p || !d) bad("TranslationCycle outcome needs start=, period= and drift=");
        trace.outcome = outcome::TranslationCycle{static_cast<std::size_t>(s.value_or(0)),
                                                  static_cast<std::size_t>(p.value_or(0)), d.value_or(0)};
      } else {
        bad("unknown outcome '" + o + "'");
      }
      continue;
    }
    if (!f.count("t") || !f.count("state") || !f.count("head") || !f.count("tape")) {
      bad("expected t=, state=, head= and tape= fields");
      continue;
    }
    auto time = parse_ordinal(f["t"]);
    if (!time.ok()) {
      result.errors.push_back({{ln, 1, lines[li].size()}, ParseErrorKind::BadOrdinal, "bad time '" + f["t"] + "'"});
      continue;
    }
    auto head = detail::parse_int<Position>(f["head"]);
    auto tape = parse_rendered_tape(f["tape"], m.blank);
    if (!head || !tape) {
      bad("bad head or tape field");
      continue;
    }
    TraceStep step{*time, Configuration{f["state"], *head, std::move(*tape)}, std::monostate{}};
    if (f.count("via")) {
      if (f["via"] == "limit") {
        step.applied = LimitMarker{};
      } else if (auto r = detail::parse_rule_text(f["via"])) {
        step.applied = *r;
      } else {
        bad("bad via= field");
        continue;
      }
    }
    trace.steps.push_back(std::move(step));
  }
  if (!have_outcome) result.errors.push_back({{lines.size() + (lines.empty() ? 1 : 0), 1, 0}, ParseErrorKind::Syntax, "missing outcome line"});
  if (result.errors.empty()) result.value = std::move(trace);
  return result;
}

}  // namespace ittm

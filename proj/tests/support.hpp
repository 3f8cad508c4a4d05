#pragma once

// Test-only helpers: machine fixtures, random generators and brute-force
// oracles. Nothing here calls the code paths it is used to check.

#include <algorithm>
#include <cstdint>
#include <map>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ittm/ittm.hpp"

namespace ittm::testing {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string machine_path(const std::string& name) { return std::string(ITTM_MACHINES_DIR) + "/" + name; }

inline Machine load(const std::string& name) { return expect(parse_machine(read_text(machine_path(name))), name); }

inline Tape tape_of(const Machine& m, const std::string& literal) { return expect(parse_tape(literal, m)); }

/// Binary numeral by integer arithmetic, most significant bit first.
inline std::string binary(unsigned n) {
  if (n == 0) return "0";
  std::string out;
  for (; n; n >>= 1) out.insert(out.begin(), static_cast<char>('0' + (n & 1)));
  return out;
}

/// Tape contents between the outermost non-blank cells.
inline std::string contents(const Tape& t) { return t.all_blank() ? "" : t.slice(t.min_position(), t.max_position()); }

/// Steps exactly n times without any cycle detection.
inline Trace unrolled(const Machine& m, const Tape& input, std::size_t n) {
  Trace t;
  t.machine = m.name;
  t.step_budget = n;
  t.steps.push_back({OrdinalTime{}, initial_configuration(m, input), std::monostate{}});
  for (std::size_t i = 0; i < n && !m.is_halting(t.steps.back().config.state); ++i) {
    Rule r = resolve(m, t.steps.back().config);
    t.steps.push_back({OrdinalTime::finite(i + 1), apply(t.steps.back().config, r), r});
  }
  return t;
}

struct RandomMachineOptions {
  std::size_t min_states = 1;
  std::size_t max_states = 4;
  bool with_halt = true;
  double stay_bias = 0.0;  // extra probability of an S move
};

/// Total machine over tape alphabet {B, 0, 1} with random rules.
inline Machine random_machine(std::mt19937_64& rng, const RandomMachineOptions& opt, const std::string& name = "random") {
  Machine m;
  m.name = name;
  m.blank = "B";
  m.input_alphabet = {"0", "1"};
  m.tape_alphabet = {"B", "0", "1"};
  const std::size_t n = std::uniform_int_distribution<std::size_t>(opt.min_states, opt.max_states)(rng);
  for (std::size_t i = 0; i < n; ++i) m.states.push_back("s" + std::to_string(i));
  if (opt.with_halt) {
    m.states.push_back("h");
    m.halting["h"] = HaltKind::Plain;
  }
  m.start = "s0";
  std::uniform_int_distribution<std::size_t> pick_state(0, m.states.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_symbol(0, 2);
  std::uniform_int_distribution<int> pick_move(0, 2);
  std::bernoulli_distribution stay(opt.stay_bias);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& g : m.tape_alphabet) {
      Move mv = stay(rng) ? Move::S : static_cast<Move>(pick_move(rng));
      m.rules[{m.states[i], g}] = Action{m.tape_alphabet[pick_symbol(rng)], mv, m.states[pick_state(rng)]};
    }
  }
  return m;
}

inline std::string random_input(std::mt19937_64& rng, std::size_t max_len) {
  std::string s(std::uniform_int_distribution<std::size_t>(0, max_len)(rng), '0');
  for (auto& c : s) c = std::bernoulli_distribution(0.5)(rng) ? '1' : '0';
  return s;
}

/// Brute-force limsup: for every position in a padded window around all
/// cells and heads seen in the period, the maximum (by alphabet rank) of the
/// symbols read there across one period.
inline std::map<Position, Symbol> brute_force_limsup(const Trace& t, const Machine& m, std::size_t start,
                                                     std::size_t period) {
  Position lo = 0, hi = 0;
  bool first = true;
  for (std::size_t i = start; i < start + period; ++i) {
    const auto& c = t.steps[i].config;
    std::vector<Position> ps{c.head};
    for (const auto& [p, s] : c.tape.cells()) ps.push_back(p);
    for (auto p : ps) {
      lo = first ? p : std::min(lo, p);
      hi = first ? p : std::max(hi, p);
      first = false;
    }
  }
  std::map<Position, Symbol> out;
  for (Position p = lo - 2; p <= hi + 2; ++p) {
    std::size_t best = 0;
    for (std::size_t i = start; i < start + period; ++i) {
      const Symbol& s = t.steps[i].config.tape.read(p);
      for (std::size_t r = 0; r < m.tape_alphabet.size(); ++r) {
        if (m.tape_alphabet[r] == s) best = std::max(best, r);
      }
    }
    out[p] = m.tape_alphabet[best];
  }
  return out;
}

/// Trace whose configurations are the given control states with an empty tape.
inline Trace synthetic_trace(const std::vector<std::string>& states, const std::string& machine = "synthetic") {
  Trace t;
  t.machine = machine;
  for (std::size_t i = 0; i < states.size(); ++i) {
    t.steps.push_back({OrdinalTime::finite(i), Configuration{states[i], 0, Tape("B")}, std::monostate{}});
  }
  t.outcome = outcome::Running{};
  t.step_budget = states.size();
  return t;
}

/// Random count matrix with node keys k00, k01, ...
inline AdjacencyMatrix random_count_matrix(std::mt19937_64& rng, std::size_t max_nodes = 8, double density = 0.4) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
  AdjacencyMatrix m;
  for (std::size_t i = 0; i < n; ++i) m.node_order.push_back("k" + std::string(i < 10 ? "0" : "") + std::to_string(i));
  m.entries.assign(n * n, 0.0);
  std::bernoulli_distribution edge(density);
  std::uniform_int_distribution<int> count(1, 5);
  for (auto& e : m.entries) e = edge(rng) ? count(rng) : 0;
  return m;
}

inline std::vector<std::size_t> random_permutation(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// P * A * P^T by explicit matrix products, where P[perm[i]][i] = 1.
inline std::vector<double> conjugate(const std::vector<double>& a, const std::vector<std::size_t>& perm) {
  const std::size_t n = perm.size();
  std::vector<double> p(n * n, 0.0), pa(n * n, 0.0), out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) p[perm[i] * n + i] = 1.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) pa[i * n + j] += p[i * n + k] * a[k * n + j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) out[i * n + j] += pa[i * n + k] * p[j * n + k];
  return out;
}

/// The three collapsed graphs whose merge has edge weights {3, 2, 2, 2, 1, 1, 1, 1, 1}.
inline std::vector<StateGraph> three_run_merge_inputs() {
  return {collapse(synthetic_trace({"A", "B", "C", "D", "E"})), collapse(synthetic_trace({"A", "B", "C", "D", "F"})),
          collapse(synthetic_trace({"A", "B", "G", "D", "E", "Y", "Z"}))};
}

}  // namespace ittm::testing

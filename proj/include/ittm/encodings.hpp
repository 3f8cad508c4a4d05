#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ittm/dsl.hpp"
#include "ittm/error.hpp"
#include "ittm/graph.hpp"
#include "ittm/machine.hpp"
#include "ittm/ordinal.hpp"

namespace ittm {

enum class MatrixMode { Counts, Probabilities };

inline constexpr double kNormalizationTolerance = 1e-12;

/// Dense N x N matrix; row and column i correspond to node_order[i].
struct AdjacencyMatrix {
  std::vector<std::string> node_order;
  std::vector<double> entries;  // row major
  MatrixMode mode = MatrixMode::Counts;

  std::size_t order() const { return node_order.size(); }
  double at(std::size_t i, std::size_t j) const { return entries[i * order() + j]; }
  double& at(std::size_t i, std::size_t j) { return entries[i * order() + j]; }

  double row_sum(std::size_t i) const {
    double s = 0;
    for (std::size_t j = 0; j < order(); ++j) s += at(i, j);
    return s;
  }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;
};

namespace detail {

inline AdjacencyMatrix adjacency_over(const StateGraph& g, const std::vector<std::string>& order, MatrixMode mode) {
  AdjacencyMatrix m{order, std::vector<double>(order.size() * order.size(), 0.0), mode};
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  for (const auto& e : g.edges()) {
    m.at(pos.at(e.from), pos.at(e.to)) += mode == MatrixMode::Counts ? static_cast<double>(e.count) : e.probability;
  }
  return m;
}

}  // namespace detail

/// Rows and columns follow the graph's stable node indices, which for
/// freshly built graphs is ascending key order.
inline AdjacencyMatrix to_adjacency(const StateGraph& g, MatrixMode mode = MatrixMode::Counts) {
  if (g.node_count() == 0) throw Error(ErrorKind::EmptyInput, "graph has no nodes");
  return detail::adjacency_over(g, g.keys_by_index(), mode);
}

/// Builds a probabilistic graph with an edge at every positive entry. Visit
/// orders are not recoverable from a matrix. In probabilities mode each edge
/// gets count 1 and the entry as its probability.
inline StateGraph from_adjacency(const AdjacencyMatrix& m, std::string provenance = "", Symbol blank = "B") {
  const std::size_t n = m.order();
  if (m.entries.size() != n * n) throw Error(ErrorKind::NotSquare, "expected " + std::to_string(n * n) + " entries");
  std::vector<GraphNode> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({m.node_order[i], i, parse_canonical_key(m.node_order[i], blank)});
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = m.at(i, j);
      if (v < 0 || std::isnan(v)) throw Error(ErrorKind::NegativeEntry, "entry (" + std::to_string(i) + "," + std::to_string(j) + ")");
      if (v == 0) continue;
      any = true;
      if (m.mode == MatrixMode::Counts) {
        if (v != std::floor(v) || v > 9.0e15) throw Error(ErrorKind::NonIntegralCount, "entry " + detail::format_double(v));
        edges.push_back({m.node_order[i], m.node_order[j], static_cast<std::uint64_t>(v), 0.0, {}, ""});
      } else {
        edges.push_back({m.node_order[i], m.node_order[j], 1, v, {}, ""});
      }
    }
    if (any && m.mode == MatrixMode::Probabilities && std::abs(m.row_sum(i) - 1.0) > kNormalizationTolerance) {
      throw Error(ErrorKind::NormalizationError, "row " + m.node_order[i] + " sums to " + detail::format_double(m.row_sum(i)));
    }
  }
  return StateGraph::make(GraphKind::Probabilistic, std::move(provenance), std::move(blank), std::move(nodes),
                          std::move(edges), false, m.mode == MatrixMode::Counts);
}

/// Order-3 tensor over a layer sequence; slice t is layer t's adjacency
/// matrix over the union of node keys in ascending order.
struct LayerTensor {
  std::vector<OrdinalTime> times;
  std::vector<std::string> node_order;
  std::vector<double> entries;  // (t, i, j) row major
  MatrixMode mode = MatrixMode::Counts;

  std::size_t layers() const { return times.size(); }
  std::size_t order() const { return node_order.size(); }
  double at(std::size_t t, std::size_t i, std::size_t j) const { return entries[(t * order() + i) * order() + j]; }

  AdjacencyMatrix slice(std::size_t t) const {
    const std::size_t n = order();
    auto first = entries.begin() + static_cast<std::ptrdiff_t>(t * n * n);
    return {node_order, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n * n)), mode};
  }

  friend bool operator==(const LayerTensor&, const LayerTensor&) = default;
};

inline LayerTensor to_layer_tensor(const GraphLayerSequence& seq, MatrixMode mode = MatrixMode::Counts) {
  LayerTensor t;
  t.mode = mode;
  std::set<std::string> keys;
  for (const auto& [time, g] : seq.layers()) {
    t.times.push_back(time);
    for (const auto& n : g.nodes()) keys.insert(n.key);
  }
  t.node_order.assign(keys.begin(), keys.end());
  for (const auto& [time, g] : seq.layers()) {
    auto slice = detail::adjacency_over(g, t.node_order, mode);
    t.entries.insert(t.entries.end(), slice.entries.begin(), slice.entries.end());
  }
  return t;
}

// ---------------------------------------------------------------------------
// CSV: one header row of node keys, then N rows of N values.

inline std::string format_matrix_csv(const AdjacencyMatrix& m) {
  std::string out = detail::join(m.node_order, ",") + "\n";
  for (std::size_t i = 0; i < m.order(); ++i) {
    for (std::size_t j = 0; j < m.order(); ++j) {
      if (j) out += ",";
      out += detail::format_double(m.at(i, j));
    }
    out += "\n";
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto c = line.find(',', start);
    out.emplace_back(line.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

inline AdjacencyMatrix parse_csv_block(const std::vector<std::string_view>& lines, std::size_t& i, MatrixMode mode) {
  if (i >= lines.size()) throw Error(ErrorKind::BadFormat, "missing CSV header");
  AdjacencyMatrix m;
  m.mode = mode;
  m.node_order = split_csv(lines[i++]);
  const std::size_t n = m.order();
  for (std::size_t r = 0; r < n; ++r, ++i) {
    if (i >= lines.size()) throw Error(ErrorKind::NotSquare, "expected " + std::to_string(n) + " rows");
    auto cells = split_csv(lines[i]);
    if (cells.size() != n) throw Error(ErrorKind::NotSquare, "row " + std::to_string(r) + " has " + std::to_string(cells.size()) + " values");
    for (const auto& c : cells) {
      auto v = parse_double(c);
      if (!v) throw Error(ErrorKind::BadFormat, "bad number '" + c + "'");
      m.entries.push_back(*v);
    }
  }
  return m;
}

inline std::vector<std::string_view> content_lines(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto l : split_lines(text)) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

}  // namespace detail

inline AdjacencyMatrix parse_matrix_csv(std::string_view text, MatrixMode mode = MatrixMode::Counts) {
  auto lines = detail::content_lines(text);
  std::size_t i = 0;
  auto m = detail::parse_csv_block(lines, i, mode);
  if (i != lines.size()) throw Error(ErrorKind::NotSquare, "trailing rows after matrix");
  return m;
}

/// Slices as CSV blocks, each preceded by a `# t=<ordinal>` line.
inline std::string format_tensor(const LayerTensor& t) {
  std::string out;
  for (std::size_t k = 0; k < t.layers(); ++k) {
    out += "# t=" + format_ordinal(t.times[k]) + "\n" + format_matrix_csv(t.slice(k));
  }
  return out;
}

inline LayerTensor parse_tensor(std::string_view text, MatrixMode mode = MatrixMode::Counts) {
  auto lines = detail::content_lines(text);
  LayerTensor t;
  t.mode = mode;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (lines[i].substr(0, 4) != "# t=") throw Error(ErrorKind::BadFormat, "expected '# t=<ordinal>'");
    t.times.push_back(expect(parse_ordinal(lines[i].substr(4)), "tensor time"));
    ++i;
    auto m = detail::parse_csv_block(lines, i, mode);
    if (t.times.size() == 1) {
      t.node_order = m.node_order;
    } else if (m.node_order != t.node_order) {
      throw Error(ErrorKind::BadFormat, "slices disagree on node order");
    }
    t.entries.insert(t.entries.end(), m.entries.begin(), m.entries.end());
  }
  return t;
}

// ---------------------------------------------------------------------------
// DOT

namespace detail {

inline std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string to_dot(const StateGraph& g) {
  std::ostringstream out;
  out << "digraph " << detail::dot_quote(g.provenance().empty() ? "graph" : g.provenance()) << " {\n";
  out << "  // kind=" << graph_kind_name(g.kind()) << "\n";
  auto keys = g.keys_by_index();
  for (std::size_t i = 0; i < keys.size(); ++i) out << "  n" << i << " [label=" << detail::dot_quote(keys[i]) << "];\n";
  for (const auto& e : g.edges()) {
    out << "  n" << g.find(e.from)->index << " -> n" << g.find(e.to)->index << " [label="
        << detail::dot_quote("count=" + std::to_string(e.count) + " p=" + detail::format_double(e.probability)) << "];\n";
  }
  out << "}\n";
  return out.str();
}

/// Transition-rule graph: control states as nodes, one labeled edge per rule.
inline std::string rules_to_dot(const Machine& m) {
  std::ostringstream out;
  out << "digraph " << detail::dot_quote(m.name) << " {\n";
  for (const auto& q : m.states) {
    out << "  " << detail::dot_quote(q) << " [shape=" << (m.is_halting(q) ? "doublecircle" : "circle") << "];\n";
  }
  for (const auto& r : m.sorted_rules()) {
    out << "  " << detail::dot_quote(r.state) << " -> " << detail::dot_quote(r.next) << " [label="
        << detail::dot_quote(r.read + "/" + r.write + "," + move_char(r.move)) << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace ittm

#pragma once

// Evolution, collapsed and probabilistic machine state graphs.
//
// Node identity is the key string: the canonical configuration key for
// collapsed and probabilistic graphs, `t=<ordinal>|<key>` for evolution graphs.
// Each node also carries a stable index, used only as the row/column order of
// matrix encodings. Freshly built graphs index nodes in ascending key order.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "ittm/dsl.hpp"
#include "ittm/error.hpp"
#include "ittm/machine.hpp"
#include "ittm/ordinal.hpp"
#include "ittm/trace.hpp"

namespace ittm {

enum class GraphKind { Evolution, Collapsed, Probabilistic };

constexpr std::string_view graph_kind_name(GraphKind k) {
  switch (k) {
    case GraphKind::Evolution: return "Evolution";
    case GraphKind::Collapsed: return "Collapsed";
    case GraphKind::Probabilistic: return "Probabilistic";
  }
  return "?";
}

struct GraphNode {
  std::string key;
  std::size_t index = 0;
  std::optional<Configuration> config;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  std::string from;
  std::string to;
  std::uint64_t count = 1;
  double probability = 0.0;  // count normalized over the source's out-edges
  std::vector<std::size_t> visit_orders;
  std::string label;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

namespace detail {

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string applied_label(const Applied& a) {
  if (const auto* r = std::get_if<Rule>(&a)) return r->to_string();
  if (std::holds_alternative<LimitMarker>(a)) return "limit";
  return "";
}

}  // namespace detail

class StateGraph {
 public:
  StateGraph() = default;

  /// Validates and canonicalizes: nodes sorted by key, edges sorted by
  /// (from, to, label). Nodes without an explicit index ordering get indices
  /// by ascending key. When `normalize` is set, edge probabilities are
  /// recomputed from counts.
  static StateGraph make(GraphKind kind, std::string provenance, Symbol blank, std::vector<GraphNode> nodes,
                         std::vector<GraphEdge> edges, bool assign_indices = true, bool normalize = true) {
    StateGraph g;
    g.kind_ = kind;
    g.provenance_ = std::move(provenance);
    g.blank_ = std::move(blank);
    std::sort(nodes.begin(), nodes.end(), [](const GraphNode& a, const GraphNode& b) { return a.key < b.key; });
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i > 0 && nodes[i].key == nodes[i - 1].key) throw Error(ErrorKind::BadFormat, "duplicate node " + nodes[i].key);
      if (assign_indices) nodes[i].index = i;
    }
    if (!assign_indices) {
      std::vector<bool> used(nodes.size(), false);
      for (const auto& n : nodes) {
        if (n.index >= nodes.size() || used[n.index]) throw Error(ErrorKind::NotABijection, "node indices are not 0..N-1");
        used[n.index] = true;
      }
    }
    g.nodes_ = std::move(nodes);
    g.reindex();
    for (auto& e : edges) {
      if (!g.find(e.from) || !g.find(e.to)) throw Error(ErrorKind::UnknownNode, "edge " + e.from + " -> " + e.to);
      if (e.count == 0) throw Error(ErrorKind::BadFormat, "edge count must be positive");
      std::sort(e.visit_orders.begin(), e.visit_orders.end());
      if (kind == GraphKind::Probabilistic) e.visit_orders.clear();
    }
    std::sort(edges.begin(), edges.end(), [](const GraphEdge& a, const GraphEdge& b) {
      return std::tie(a.from, a.to, a.label) < std::tie(b.from, b.to, b.label);
    });
    for (std::size_t i = 1; i < edges.size(); ++i) {
      if (std::tie(edges[i].from, edges[i].to, edges[i].label) == std::tie(edges[i - 1].from, edges[i - 1].to, edges[i - 1].label)) {
        throw Error(ErrorKind::BadFormat, "duplicate edge " + edges[i].from + " -> " + edges[i].to);
      }
    }
    g.edges_ = std::move(edges);
    if (normalize) {
      std::map<std::string, std::uint64_t> totals;
      for (const auto& e : g.edges_) totals[e.from] += e.count;
      for (auto& e : g.edges_) e.probability = static_cast<double>(e.count) / static_cast<double>(totals[e.from]);
    }
    return g;
  }

  GraphKind kind() const { return kind_; }
  const std::string& provenance() const { return provenance_; }
  const Symbol& blank() const { return blank_; }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }

  const GraphNode* find(const std::string& key) const {
    auto it = by_key_.find(key);
    return it == by_key_.end() ? nullptr : &nodes_[it->second];
  }

  /// Out-edges of `key` in (to, label) order.
  std::vector<const GraphEdge*> out_edges(const std::string& key) const {
    std::vector<const GraphEdge*> out;
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key,
                               [](const GraphEdge& e, const std::string& k) { return e.from < k; });
    for (; it != edges_.end() && it->from == key; ++it) out.push_back(&*it);
    return out;
  }

  std::uint64_t total_count() const {
    return std::accumulate(edges_.begin(), edges_.end(), std::uint64_t{0},
                           [](std::uint64_t acc, const GraphEdge& e) { return acc + e.count; });
  }

  /// Node keys in stable-index order.
  std::vector<std::string> keys_by_index() const {
    std::vector<std::string> out(nodes_.size());
    for (const auto& n : nodes_) out[n.index] = n.key;
    return out;
  }

  friend bool operator==(const StateGraph& a, const StateGraph& b) {
    return a.kind_ == b.kind_ && a.provenance_ == b.provenance_ && a.blank_ == b.blank_ && a.nodes_ == b.nodes_ &&
           a.edges_ == b.edges_;
  }

 private:
  void reindex() {
    by_key_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) by_key_.emplace(nodes_[i].key, i);
  }

  GraphKind kind_ = GraphKind::Collapsed;
  std::string provenance_;
  Symbol blank_ = "B";
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::unordered_map<std::string, std::size_t> by_key_;
};

inline std::string evolution_key(const TraceStep& s) {
  return "t=" + format_ordinal(s.time) + "|" + canonical_key(s.config);
}

/// One node per recorded step, chained in step order.
inline StateGraph evolution_graph(const Trace& trace) {
  if (trace.steps.empty()) throw Error(ErrorKind::EmptyInput, "trace has no steps");
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    nodes.push_back({evolution_key(trace.steps[i]), 0, trace.steps[i].config});
    if (i > 0) {
      edges.push_back({nodes[i - 1].key, nodes[i].key, 1, 0.0, {i - 1}, detail::applied_label(trace.steps[i].applied)});
    }
  }
  return StateGraph::make(GraphKind::Evolution, trace.machine, trace.steps[0].config.tape.blank(), std::move(nodes),
                          std::move(edges));
}

/// One node per distinct configuration; step i -> i+1 adds an occurrence of
/// that edge and records i in its visit orders.
inline StateGraph collapse(const Trace& trace) {
  if (trace.steps.empty()) throw Error(ErrorKind::EmptyInput, "trace has no steps");
  std::map<std::string, GraphNode> nodes;
  std::map<std::tuple<std::string, std::string, std::string>, GraphEdge> edges;
  std::string prev;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    std::string key = canonical_key(trace.steps[i].config);
    nodes.try_emplace(key, GraphNode{key, 0, trace.steps[i].config});
    if (i > 0) {
      std::string label = detail::applied_label(trace.steps[i].applied);
      auto [it, fresh] = edges.try_emplace({prev, key, label}, GraphEdge{prev, key, 0, 0.0, {}, label});
      it->second.count += 1;
      it->second.visit_orders.push_back(i - 1);
    }
    prev = std::move(key);
  }
  std::vector<GraphNode> node_list;
  for (auto& [k, n] : nodes) node_list.push_back(std::move(n));
  std::vector<GraphEdge> edge_list;
  for (auto& [k, e] : edges) edge_list.push_back(std::move(e));
  return StateGraph::make(GraphKind::Collapsed, trace.machine, trace.steps[0].config.tape.blank(), std::move(node_list),
                          std::move(edge_list));
}

/// Union of nodes, edge counts summed, probabilities normalized per source.
/// Accepts collapsed and already merged graphs.
inline StateGraph merge(const std::vector<StateGraph>& graphs) {
  if (graphs.empty()) throw Error(ErrorKind::EmptyInput, "nothing to merge");
  const auto& first = graphs.front();
  std::map<std::string, GraphNode> nodes;
  std::map<std::tuple<std::string, std::string, std::string>, GraphEdge> edges;
  for (const auto& g : graphs) {
    if (g.kind() == GraphKind::Evolution) throw Error(ErrorKind::WrongGraphKind, "evolution graphs cannot be merged");
    if (g.provenance() != first.provenance() || g.blank() != first.blank()) {
      throw Error(ErrorKind::MixedProvenance, "graphs from '" + first.provenance() + "' and '" + g.provenance() + "'");
    }
    for (const auto& n : g.nodes()) nodes.try_emplace(n.key, GraphNode{n.key, 0, n.config});
    for (const auto& e : g.edges()) {
      auto [it, fresh] = edges.try_emplace({e.from, e.to, e.label}, GraphEdge{e.from, e.to, 0, 0.0, {}, e.label});
      it->second.count += e.count;
    }
  }
  std::vector<GraphNode> node_list;
  for (auto& [k, n] : nodes) node_list.push_back(std::move(n));
  std::vector<GraphEdge> edge_list;
  for (auto& [k, e] : edges) edge_list.push_back(std::move(e));
  return StateGraph::make(GraphKind::Probabilistic, first.provenance(), first.blank(), std::move(node_list),
                          std::move(edge_list));
}

/// Walks the edges in stored visit order, reproducing the key sequence of the
/// trace the graph was collapsed from.
inline std::vector<std::string> replay(const StateGraph& g, const std::string& start) {
  if (!g.find(start)) throw Error(ErrorKind::UnknownNode, "start " + start);
  if (g.kind() == GraphKind::Probabilistic) throw Error(ErrorKind::AmbiguousReplay, "probabilistic graphs keep no visit orders");
  std::map<std::size_t, const GraphEdge*> by_order;
  for (const auto& e : g.edges()) {
    if (e.visit_orders.empty()) throw Error(ErrorKind::AmbiguousReplay, "edge " + e.from + " -> " + e.to + " has no visit orders");
    for (auto o : e.visit_orders) {
      if (!by_order.emplace(o, &e).second) throw Error(ErrorKind::AmbiguousReplay, "visit order used twice");
    }
  }
  std::vector<std::string> out{start};
  std::size_t expected = 0;
  for (const auto& [order, e] : by_order) {
    if (order != expected++) throw Error(ErrorKind::AmbiguousReplay, "gap in visit orders");
    if (e->from != out.back()) throw Error(ErrorKind::AmbiguousReplay, "visit order leaves from a different node");
    out.push_back(e->to);
  }
  return out;
}

/// Source of the edge with visit order 0, or the only node of an edgeless graph.
inline std::optional<std::string> replay_start(const StateGraph& g) {
  for (const auto& e : g.edges()) {
    if (!e.visit_orders.empty() && e.visit_orders.front() == 0) return e.from;
  }
  if (g.edges().empty() && g.node_count() == 1) return g.nodes().front().key;
  return std::nullopt;
}

/// Follows the heaviest normalized out-edge, ties to the smaller target key.
/// Stops at a sink, before revisiting a node, or after `max_steps` hops.
inline std::vector<std::string> route_greedy(const StateGraph& g, const std::string& start, std::size_t max_steps) {
  if (!g.find(start)) throw Error(ErrorKind::UnknownNode, "start " + start);
  std::vector<std::string> path{start};
  std::set<std::string> visited{start};
  while (path.size() <= max_steps) {
    const GraphEdge* best = nullptr;
    for (const GraphEdge* e : g.out_edges(path.back())) {
      // out_edges is ordered by target key, so strict > keeps the smaller key on ties.
      if (!best || e->probability > best->probability) best = e;
    }
    if (!best || visited.count(best->to)) break;
    visited.insert(best->to);
    path.push_back(best->to);
  }
  return path;
}

class GraphLayerSequence {
 public:
  GraphLayerSequence() = default;
  explicit GraphLayerSequence(std::vector<std::pair<OrdinalTime, StateGraph>> layers) : layers_(std::move(layers)) {
    for (std::size_t i = 1; i < layers_.size(); ++i) {
      if (!(layers_[i - 1].first < layers_[i].first)) throw Error(ErrorKind::DomainError, "layer times must strictly increase");
    }
  }

  const std::vector<std::pair<OrdinalTime, StateGraph>>& layers() const { return layers_; }
  std::size_t size() const { return layers_.size(); }

 private:
  std::vector<std::pair<OrdinalTime, StateGraph>> layers_;
};

struct LayerHop {
  OrdinalTime time;
  std::string from;
  std::string to;

  friend bool operator==(const LayerHop&, const LayerHop&) = default;
};

enum class LayerStop { Completed, KeyAbsent, Sink };

struct LayerPath {
  std::string start;
  std::vector<LayerHop> hops;
  LayerStop stop = LayerStop::Completed;

  bool truncated() const { return stop != LayerStop::Completed; }
};

/// One greedy hop per layer, carrying the reached key into the next layer.
inline LayerPath traverse_layers(const GraphLayerSequence& seq, const std::string& start) {
  LayerPath path{start, {}, LayerStop::Completed};
  if (seq.size() == 0) return path;
  if (!seq.layers().front().second.find(start)) throw Error(ErrorKind::UnknownNode, "start " + start + " not in first layer");
  std::string cur = start;
  for (const auto& [time, g] : seq.layers()) {
    if (!g.find(cur)) {
      path.stop = LayerStop::KeyAbsent;
      break;
    }
    auto hop = route_greedy(g, cur, 1);
    if (hop.size() < 2) {
      path.stop = LayerStop::Sink;
      break;
    }
    path.hops.push_back({time, cur, hop[1]});
    cur = hop[1];
  }
  return path;
}

/// Relabels stable indices: node with index i gets index perm[i].
inline StateGraph permute_nodes(const StateGraph& g, const std::vector<std::size_t>& perm) {
  const std::size_t n = g.node_count();
  if (perm.size() != n) throw Error(ErrorKind::NotABijection, "permutation size differs from node count");
  std::vector<bool> hit(n, false);
  for (auto p : perm) {
    if (p >= n || hit[p]) throw Error(ErrorKind::NotABijection, "not a permutation of 0..N-1");
    hit[p] = true;
  }
  std::vector<GraphNode> nodes = g.nodes();
  for (auto& node : nodes) node.index = perm[node.index];
  return StateGraph::make(g.kind(), g.provenance(), g.blank(), std::move(nodes), g.edges(), false, false);
}

/// Splits a transfinite trace at its limit entries and collapses each stage;
/// each layer is stamped with the time its stage begins (0, w, w*2, ...).
inline GraphLayerSequence stage_layers(const Trace& trace) {
  std::vector<std::pair<OrdinalTime, StateGraph>> layers;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= trace.steps.size(); ++i) {
    if (i == trace.steps.size() || std::holds_alternative<LimitMarker>(trace.steps[i].applied)) {
      Trace stage;
      stage.machine = trace.machine;
      stage.steps.assign(trace.steps.begin() + static_cast<std::ptrdiff_t>(begin),
                         trace.steps.begin() + static_cast<std::ptrdiff_t>(i));
      layers.emplace_back(stage.steps.front().time, collapse(stage));
      begin = i;
    }
  }
  return GraphLayerSequence(std::move(layers));
}

// ---------------------------------------------------------------------------
// Native text format
//
//   graph kind=<Kind> provenance=<name> blank=<symbol>
//   node <index> <key>
//   edge <from index> <to index> count=<c> p=<prob> orders=<csv> label=<rule>

inline std::string format_graph(const StateGraph& g) {
  std::ostringstream out;
  out << "graph kind=" << graph_kind_name(g.kind()) << " provenance=" << g.provenance() << " blank=" << g.blank() << "\n";
  std::vector<std::string> keys = g.keys_by_index();
  for (std::size_t i = 0; i < keys.size(); ++i) out << "node " << i << " " << keys[i] << "\n";
  for (const auto& e : g.edges()) {
    out << "edge " << g.find(e.from)->index << " " << g.find(e.to)->index << " count=" << e.count
        << " p=" << detail::format_double(e.probability) << " orders=";
    for (std::size_t i = 0; i < e.visit_orders.size(); ++i) out << (i ? "," : "") << e.visit_orders[i];
    out << " label=" << e.label << "\n";
  }
  return out.str();
}

inline StateGraph parse_graph(std::string_view text) {
  auto lines = detail::split_lines(text);
  auto fail = [](std::size_t ln, const std::string& msg) {
    throw Error(ErrorKind::BadFormat, "graph line " + std::to_string(ln) + ": " + msg);
  };
  std::optional<GraphKind> kind;
  std::string provenance;
  Symbol blank = "B";
  std::vector<GraphNode> nodes;
  std::map<std::size_t, std::string> by_index;
  std::vector<GraphEdge> edges;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::size_t ln = li + 1;
    std::string_view line = lines[li];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    const auto& head = toks[0].text;
    if (head == "graph") {
      auto f = detail::fields(toks);
      for (auto k : {GraphKind::Evolution, GraphKind::Collapsed, GraphKind::Probabilistic}) {
        if (f["kind"] == graph_kind_name(k)) kind = k;
      }
      if (!kind) fail(ln, "unknown graph kind");
      provenance = f["provenance"];
      if (f.count("blank")) blank = f["blank"];
    } else if (head == "node") {
      if (toks.size() != 3) fail(ln, "expected 'node <index> <key>'");
      auto idx = detail::parse_int<std::size_t>(toks[1].text);
      if (!idx || !by_index.emplace(*idx, toks[2].text).second) fail(ln, "bad or duplicate node index");
      nodes.push_back({toks[2].text, *idx, parse_canonical_key(toks[2].text, blank)});
      if (kind == GraphKind::Evolution) {
        auto bar = toks[2].text.find('|');
        nodes.back().config = bar == std::string::npos ? std::nullopt : parse_canonical_key(toks[2].text.substr(bar + 1), blank);
      }
    } else if (head == "edge") {
      if (toks.size() < 3) fail(ln, "expected 'edge <from> <to> ...'");
      auto a = detail::parse_int<std::size_t>(toks[1].text), b = detail::parse_int<std::size_t>(toks[2].text);
      if (!a || !b || !by_index.count(*a) || !by_index.count(*b)) fail(ln, "edge references unknown node");
      auto f = detail::fields(toks);
      GraphEdge e{by_index[*a], by_index[*b], 0, 0.0, {}, f["label"]};
      auto c = detail::parse_int<std::uint64_t>(f["count"]);
      auto p = detail::parse_double(f["p"]);
      if (!c || !p) fail(ln, "bad count= or p=");
      e.count = *c;
      e.probability = *p;
      std::string_view orders = f["orders"];
      while (!orders.empty()) {
        auto comma = orders.find(',');
        auto o = detail::parse_int<std::size_t>(orders.substr(0, comma));
        if (!o) fail(ln, "bad orders=");
        e.visit_orders.push_back(*o);
        if (comma == std::string_view::npos) break;
        orders.remove_prefix(comma + 1);
      }
      edges.push_back(std::move(e));
    } else {
      fail(ln, "unknown line '" + head + "'");
    }
  }
  if (!kind) fail(1, "missing graph header");
  return StateGraph::make(*kind, provenance, blank, std::move(nodes), std::move(edges), false, false);
}

}  // namespace ittm

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ittm/error.hpp"
#include "ittm/graph.hpp"

namespace ittm {

/// Per-step error probability and output length of an autoregressive process.
struct AccuracyModel {
  double epsilon = 0.0;
  std::uint64_t length = 0;
};

inline void check_model(const AccuracyModel& m) {
  if (!(m.epsilon >= 0.0 && m.epsilon <= 1.0)) throw Error(ErrorKind::DomainError, "epsilon must lie in [0, 1]");
}

/// (1 - epsilon)^L: probability that all L sequential steps are correct.
inline double accuracy_closed_form(const AccuracyModel& m) {
  check_model(m);
  return std::pow(1.0 - m.epsilon, static_cast<double>(m.length));
}

/// Same quantity through exp(L * log1p(-epsilon)).
inline double accuracy_log_domain(const AccuracyModel& m) {
  check_model(m);
  if (m.epsilon == 1.0) return m.length == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(m.length) * std::log1p(-m.epsilon));
}

struct MonteCarloEstimate {
  double rate = 0.0;
  double standard_error = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
};

namespace detail {

/// Each step fails independently with probability epsilon; a trial succeeds
/// iff none of its L steps fails.
inline std::uint64_t simulate_shard(const AccuracyModel& m, std::uint64_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uint64_t ok = 0;
  if (m.epsilon == 0.0) return trials;
  // A step fails when a uniform 64-bit draw falls below epsilon * 2^64.
  const bool always_fail = m.epsilon >= 1.0;
  const auto threshold = always_fail ? std::numeric_limits<std::uint64_t>::max()
                                     : static_cast<std::uint64_t>(std::ldexp(m.epsilon, 64));
  for (std::uint64_t t = 0; t < trials; ++t) {
    bool correct = true;
    for (std::uint64_t s = 0; s < m.length; ++s) {
      if (always_fail || rng() < threshold) {
        correct = false;
        break;
      }
    }
    ok += correct;
  }
  return ok;
}

}  // namespace detail

/// Seeded simulation of `trials` sequences. With shards > 1 the trials are
/// split evenly and shard i is seeded from a seed_seq over (seed, i); the
/// result depends on (seed, shards) only, not on thread scheduling.
inline MonteCarloEstimate accuracy_monte_carlo(const AccuracyModel& m, std::uint64_t trials, std::uint64_t seed,
                                               unsigned shards = 1) {
  check_model(m);
  if (trials == 0) throw Error(ErrorKind::DomainError, "trials must be at least 1");
  if (shards == 0) shards = 1;
  std::uint64_t successes = 0;
  if (shards == 1) {
    successes = detail::simulate_shard(m, trials, seed);
  } else {
    std::vector<std::uint64_t> counts(shards, 0);
    std::vector<std::thread> workers;
    for (unsigned i = 0; i < shards; ++i) {
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), i};
      std::array<std::uint32_t, 2> words{};
      seq.generate(words.begin(), words.end());
      const std::uint64_t shard_seed = (std::uint64_t{words[0]} << 32) | words[1];
      const std::uint64_t n = trials / shards + (i < trials % shards ? 1 : 0);
      workers.emplace_back([&m, &counts, i, n, shard_seed] { counts[i] = detail::simulate_shard(m, n, shard_seed); });
    }
    for (auto& w : workers) w.join();
    for (auto c : counts) successes += c;
  }
  MonteCarloEstimate est;
  est.trials = trials;
  est.successes = successes;
  est.rate = static_cast<double>(successes) / static_cast<double>(trials);
  est.standard_error = std::sqrt(est.rate * (1.0 - est.rate) / static_cast<double>(trials));
  return est;
}

/// L * N^2 pairwise comparisons for routing over a fully connected N-node
/// graph through L layers.
constexpr std::uint64_t attention_cost(std::uint64_t tokens, std::uint64_t layers) { return layers * tokens * tokens; }

struct SaturationReport {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;     // distinct (from, to) pairs
  std::size_t self_loops = 0;
  double density = 0.0;           // counted edges / N^2
  double mean_out_degree = 0.0;   // counted edges / N
  double mean_entropy_bits = 0.0; // mean over non-sink nodes
  double max_entropy_bits = 0.0;
  std::map<std::string, double> node_entropy_bits;
};

/// Self-loops are left out of density and mean degree unless
/// `include_self_loops` is set. Entropy uses the normalized out-edge
/// probabilities with 0 log 0 = 0.
inline SaturationReport saturation(const StateGraph& g, bool include_self_loops = false) {
  SaturationReport r;
  r.node_count = g.node_count();
  std::map<std::pair<std::string, std::string>, double> pairs;
  for (const auto& e : g.edges()) pairs[{e.from, e.to}] += e.probability;
  r.edge_count = pairs.size();
  std::map<std::string, std::vector<double>> out;
  for (const auto& [ft, p] : pairs) {
    if (ft.first == ft.second) ++r.self_loops;
    out[ft.first].push_back(p);
  }
  const std::size_t counted = include_self_loops ? r.edge_count : r.edge_count - r.self_loops;
  if (r.node_count > 0) {
    const double n = static_cast<double>(r.node_count);
    r.density = static_cast<double>(counted) / (n * n);
    r.mean_out_degree = static_cast<double>(counted) / n;
  }
  double total = 0;
  for (const auto& [key, probs] : out) {
    double h = 0;
    for (double p : probs) {
      if (p > 0) h -= p * std::log2(p);
    }
    r.node_entropy_bits[key] = h;
    total += h;
    r.max_entropy_bits = std::max(r.max_entropy_bits, h);
  }
  if (!out.empty()) r.mean_entropy_bits = total / static_cast<double>(out.size());
  return r;
}

inline std::string format_saturation(const SaturationReport& r) {
  return "nodes=" + std::to_string(r.node_count) + "\nedges=" + std::to_string(r.edge_count) +
         "\nself_loops=" + std::to_string(r.self_loops) + "\ndensity=" + detail::format_double(r.density) +
         "\nmean_out_degree=" + detail::format_double(r.mean_out_degree) +
         "\nmean_entropy_bits=" + detail::format_double(r.mean_entropy_bits) +
         "\nmax_entropy_bits=" + detail::format_double(r.max_entropy_bits) + "\n";
}

}  // namespace ittm

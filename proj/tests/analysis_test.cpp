#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "support.hpp"

namespace ittm {
namespace {

TEST(Accuracy, Endpoints) {
  EXPECT_EQ(accuracy_closed_form({0.0, 100}), 1.0);
  EXPECT_EQ(accuracy_closed_form({1.0, 100}), 0.0);
  EXPECT_EQ(accuracy_log_domain({0.0, 100}), 1.0);
  EXPECT_EQ(accuracy_log_domain({1.0, 100}), 0.0);
  EXPECT_EQ(accuracy_closed_form({0.3, 0}), 1.0);
  EXPECT_EQ(accuracy_log_domain({1.0, 0}), 1.0);
}

TEST(Accuracy, KnownValue) {
  // 0.99^100 by repeated multiplication
  double p = 1.0;
  for (int i = 0; i < 100; ++i) p *= 0.99;
  EXPECT_NEAR(accuracy_closed_form({0.01, 100}), p, 1e-13);
  EXPECT_NEAR(accuracy_closed_form({0.01, 100}), 0.36603234127322950, 1e-15);
  EXPECT_NEAR(accuracy_closed_form({0.01, 100}), accuracy_log_domain({0.01, 100}), 1e-12);
}

TEST(Accuracy, ClosedAndLogAgree) {
  for (double eps : {1e-9, 1e-6, 1e-3, 0.01, 0.1, 0.5, 0.9}) {
    for (std::uint64_t len : {1u, 10u, 100u, 1000u, 100000u}) {
      // rounding 1 - eps costs up to one ulp, amplified L times by the power
      const double p = accuracy_log_domain({eps, len});
      const double tol = 1e-12 + static_cast<double>(len) * 2 * std::numeric_limits<double>::epsilon() * p;
      EXPECT_NEAR(accuracy_closed_form({eps, len}), p, tol) << eps << " " << len;
    }
  }
}

TEST(Accuracy, Monotone) {
  for (double eps = 0.0; eps <= 1.0; eps += 0.05) {
    for (std::uint64_t len = 0; len < 200; len += 7) {
      EXPECT_GE(accuracy_closed_form({eps, len}), accuracy_closed_form({eps, len + 7}));
      if (eps + 0.05 <= 1.0) {
        EXPECT_GE(accuracy_closed_form({eps, len}), accuracy_closed_form({eps + 0.05, len}));
      }
    }
  }
}

TEST(Accuracy, DomainErrors) {
  for (double eps : {-0.1, 1.5, std::nan("")}) {
    try {
      accuracy_closed_form({eps, 3});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::DomainError);
    }
  }
  try {
    accuracy_monte_carlo({0.1, 3}, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DomainError);
  }
}

TEST(MonteCarlo, WithinThreeStandardErrors) {
  const AccuracyModel m{0.01, 100};
  const double exact = accuracy_closed_form(m);
  auto est = accuracy_monte_carlo(m, 200000, 42);
  EXPECT_EQ(est.trials, 200000u);
  EXPECT_NEAR(est.rate, exact, 3 * est.standard_error);
  EXPECT_NEAR(est.standard_error, std::sqrt(exact * (1 - exact) / 200000), 1e-4);
}

TEST(MonteCarlo, DeterministicPerSeed) {
  const AccuracyModel m{0.05, 20};
  EXPECT_EQ(accuracy_monte_carlo(m, 5000, 7).successes, accuracy_monte_carlo(m, 5000, 7).successes);
  EXPECT_NE(accuracy_monte_carlo(m, 5000, 7).successes, accuracy_monte_carlo(m, 5000, 8).successes);
  EXPECT_EQ(accuracy_monte_carlo(m, 5001, 7, 3).successes, accuracy_monte_carlo(m, 5001, 7, 3).successes);
}

TEST(MonteCarlo, ShardsStillConverge) {
  const AccuracyModel m{0.02, 30};
  auto est = accuracy_monte_carlo(m, 100001, 3, 4);
  EXPECT_EQ(est.trials, 100001u);
  EXPECT_NEAR(est.rate, accuracy_closed_form(m), 4 * est.standard_error);
}

TEST(MonteCarlo, Endpoints) {
  EXPECT_EQ(accuracy_monte_carlo({0.0, 50}, 1000, 1).rate, 1.0);
  EXPECT_EQ(accuracy_monte_carlo({1.0, 50}, 1000, 1).rate, 0.0);
  EXPECT_EQ(accuracy_monte_carlo({1.0, 0}, 1000, 1).rate, 1.0);
}

// Counts every ordered (query, key) pair at every layer.
std::uint64_t count_comparisons(std::uint64_t tokens, std::uint64_t layers) {
  std::uint64_t n = 0;
  for (std::uint64_t l = 0; l < layers; ++l)
    for (std::uint64_t q = 0; q < tokens; ++q)
      for (std::uint64_t k = 0; k < tokens; ++k) ++n;
  return n;
}

TEST(AttentionCost, Values) {
  static_assert(attention_cost(1, 5) == 5);
  EXPECT_EQ(attention_cost(0, 12), 0u);
  EXPECT_EQ(attention_cost(128, 12), 196608u);
  for (std::uint64_t n = 0; n <= 64; n += 3)
    for (std::uint64_t l = 0; l <= 8; ++l) EXPECT_EQ(attention_cost(n, l), count_comparisons(n, l));
}

TEST(Saturation, SingleNode) {
  auto r = saturation(collapse(testing::synthetic_trace({"A"})));
  EXPECT_EQ(r.node_count, 1u);
  EXPECT_EQ(r.edge_count, 0u);
  EXPECT_EQ(r.density, 0.0);
  EXPECT_EQ(r.mean_entropy_bits, 0.0);
}

TEST(Saturation, UniformFanOut) {
  StateGraph g = from_adjacency({{"A", "B", "C"}, {0, 1, 1, 0, 0, 0, 0, 0, 0}, MatrixMode::Counts});
  auto r = saturation(g);
  EXPECT_EQ(r.node_entropy_bits.at("A"), 1.0);
  EXPECT_EQ(r.max_entropy_bits, 1.0);
  EXPECT_EQ(r.mean_entropy_bits, 1.0);
  EXPECT_DOUBLE_EQ(r.density, 2.0 / 9);
  EXPECT_DOUBLE_EQ(r.mean_out_degree, 2.0 / 3);
}

TEST(Saturation, CompleteGraph) {
  AdjacencyMatrix m{{"A", "B", "C", "D"}, std::vector<double>(16, 1.0), MatrixMode::Counts};
  StateGraph g = from_adjacency(m);
  auto r = saturation(g);
  EXPECT_EQ(r.self_loops, 4u);
  EXPECT_EQ(r.density, 0.75);
  EXPECT_EQ(saturation(g, true).density, 1.0);
  EXPECT_DOUBLE_EQ(r.mean_entropy_bits, 2.0);
  EXPECT_EQ(format_saturation(r).substr(0, 17), "nodes=4\nedges=16\n");
}

TEST(Saturation, ThreeRunMerge) {
  auto r = saturation(merge(testing::three_run_merge_inputs()));
  EXPECT_EQ(r.node_count, 9u);
  EXPECT_EQ(r.edge_count, 9u);
  EXPECT_DOUBLE_EQ(r.density, 9.0 / 81);
  // B splits 2:1, D splits 2:1, others are deterministic
  const double h = -(2.0 / 3) * std::log2(2.0 / 3) - (1.0 / 3) * std::log2(1.0 / 3);
  EXPECT_NEAR(r.node_entropy_bits.at("B@0|0..-1:"), h, 1e-15);
  EXPECT_NEAR(r.mean_entropy_bits, 2 * h / 7, 1e-15);
}

}  // namespace
}  // namespace ittm

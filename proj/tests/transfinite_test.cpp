#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

namespace ittm {
namespace {

using testing::load;
using testing::tape_of;

Machine from_text(const std::string& text) { return expect(parse_machine(text)); }

// Writes 1 on cell 0 once, then sits on it forever.
const char* kWriteOnce =
    "machine write_once\nblank B\ninput_alphabet 0 1\ntape_alphabet B 0 1\nstart a\n"
    "rule a B -> 1 S b\nrule a 0 -> 1 S b\nrule a 1 -> 1 S b\n"
    "rule b B -> B S b\nrule b 0 -> 0 S b\nrule b 1 -> 1 S b\n";

// Swaps the tape between "10" and "01" with a sweep over both cells.
const char* kTwoCell =
    "machine two_cell\nblank B\ninput_alphabet 0 1\ntape_alphabet B 0 1\nstart a\n"
    "rule a 1 -> 0 R b\nrule a 0 -> 1 R c\nrule a B -> B S a\n"
    "rule b 0 -> 1 L a\nrule b 1 -> 1 L a\nrule b B -> B S b\n"
    "rule c 1 -> 0 L a\nrule c 0 -> 0 L a\nrule c B -> B S c\n";

// Blinks before and after every limit.
const char* kTwoPhase =
    "machine two_phase\nblank B\ninput_alphabet 0 1\ntape_alphabet B 0 1\nstart q\n"
    "rule q B -> 1 S q\nrule q 0 -> 1 S q\nrule q 1 -> 0 S q\n"
    "rule limit B -> 1 S p\nrule limit 0 -> 1 S p\nrule limit 1 -> 0 S p\n"
    "rule p B -> 0 S p\nrule p 0 -> 1 S p\nrule p 1 -> 0 S p\n";

TEST(LimitConfiguration, BlinkerTakesMaximum) {
  Machine m = load("blinker.tm");
  LimitReport r = limit_configuration(run(m, Tape("B"), 1000), m);
  EXPECT_EQ(r.limit_config.state, kLimitState);
  EXPECT_EQ(r.limit_config.head, 0);
  EXPECT_EQ(r.limit_config.tape.read(0), "1");
  EXPECT_EQ(r.per_cell.at(0).seen, (std::vector<Symbol>{"0", "1"}));
  EXPECT_EQ(r.period, 2u);
}

TEST(LimitConfiguration, StabilizedCellKeepsValue) {
  Machine m = from_text(kWriteOnce);
  Trace t = run(m, Tape("B"), 100);
  ASSERT_EQ(t.outcome, (Outcome{outcome::Cycle{1, 1}}));
  LimitReport r = limit_configuration(t, m);
  EXPECT_EQ(r.limit_config.tape.read(0), "1");
  EXPECT_EQ(r.per_cell.at(0).seen, (std::vector<Symbol>{"1"}));
}

TEST(LimitConfiguration, TwoCellOscillator) {
  Machine m = from_text(kTwoCell);
  Trace t = run(m, tape_of(m, "10"), 100);
  auto* c = std::get_if<outcome::Cycle>(&t.outcome);
  ASSERT_NE(c, nullptr);
  LimitReport r = limit_configuration(t, m);
  auto oracle = testing::brute_force_limsup(t, m, c->start, c->period);
  for (const auto& [pos, sym] : oracle) EXPECT_EQ(r.limit_config.tape.read(pos), sym) << pos;
  EXPECT_EQ(testing::contents(r.limit_config.tape), "11");
  // Both "10" and "01" occur in the period.
  bool saw10 = false, saw01 = false;
  for (std::size_t i = c->start; i < c->start + c->period; ++i) {
    const auto& tape = t.steps[i].config.tape;
    saw10 |= tape.slice(0, 1) == "10";
    saw01 |= tape.slice(0, 1) == "01";
  }
  EXPECT_TRUE(saw10 && saw01);
}

TEST(LimitConfiguration, Errors) {
  Machine counter = load("counter.tm");
  try {
    limit_configuration(run(counter, tape_of(counter, "1"), 100), counter);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoCycleFound);
  }
  Machine runner = load("runner.tm");
  try {
    limit_configuration(run(runner, Tape("B"), 100), runner);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnboundedTape);
  }
}

TEST(LimitConfiguration, MatchesBruteForceOnRandomCyclers) {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int i = 0; i < 3000 && checked < 100; ++i) {
    testing::RandomMachineOptions opt;
    opt.with_halt = false;
    opt.stay_bias = 0.3;
    Machine m = testing::random_machine(rng, opt);
    Trace t = run(m, tape_of(m, testing::random_input(rng, 4)), 300);
    auto* c = std::get_if<outcome::Cycle>(&t.outcome);
    if (!c) continue;
    ++checked;
    ASSERT_EQ(t.steps[c->start].config, t.steps[c->start + c->period].config);
    LimitReport r = limit_configuration(t, m);
    for (const auto& [pos, sym] : testing::brute_force_limsup(t, m, c->start, c->period)) {
      ASSERT_EQ(r.limit_config.tape.read(pos), sym);
    }
    for (const auto& [pos, cell] : r.per_cell) {
      // eventually constant cells keep their value
      if (cell.seen.size() == 1) {
        ASSERT_EQ(cell.limsup, t.steps.back().config.tape.read(pos));
      }
    }
  }
  EXPECT_GE(checked, 20);
}

TEST(RunTransfinite, BlinkerHaltsAfterOmega) {
  Machine m = load("blinker_limit.tm");
  Trace t = run_transfinite(m, Tape("B"), {}, 1);
  ASSERT_TRUE(std::holds_alternative<outcome::Halted>(t.outcome));
  EXPECT_EQ(t.steps.back().time, (OrdinalTime{1, 1}));
  EXPECT_EQ(t.steps.back().config.state, "qh");
  EXPECT_EQ(testing::contents(t.steps.back().config.tape), "1");
  EXPECT_EQ(t.steps[t.steps.size() - 2].time, OrdinalTime::omega());
  EXPECT_TRUE(std::holds_alternative<LimitMarker>(t.steps[t.steps.size() - 2].applied));
}

TEST(RunTransfinite, HaltingMachineStaysFinite) {
  Machine m = load("counter.tm");
  Trace t = run_transfinite(m, tape_of(m, "11"), {}, 3);
  ASSERT_TRUE(std::holds_alternative<outcome::Halted>(t.outcome));
  for (const auto& s : t.steps) EXPECT_TRUE(s.time.is_finite());
  EXPECT_EQ(format_trace(t), format_trace(run(m, tape_of(m, "11"), 1000)));
}

TEST(RunTransfinite, TwoLimitStages) {
  Machine m = from_text(kTwoPhase);
  Trace t = run_transfinite(m, Tape("B"), {{50}}, 2);
  std::vector<OrdinalTime> limits;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    if (i) {
      ASSERT_LT(t.steps[i - 1].time, t.steps[i].time);
    }
    if (t.steps[i].time.is_limit()) limits.push_back(t.steps[i].time);
  }
  EXPECT_EQ(limits, (std::vector<OrdinalTime>{OrdinalTime::omega(1), OrdinalTime::omega(2)}));
  EXPECT_TRUE(std::holds_alternative<outcome::Cycle>(t.outcome));
  // The cycle after w*2 is entirely at times above w*2.
  auto c = std::get<outcome::Cycle>(t.outcome);
  EXPECT_GT(t.steps[c.start].time, OrdinalTime::omega(2));
}

TEST(RunTransfinite, NoLimitRulesHaltsInLimitState) {
  Machine m = load("blinker.tm");
  Trace t = run_transfinite(m, Tape("B"), {}, 1);
  ASSERT_TRUE(std::holds_alternative<outcome::Halted>(t.outcome));
  EXPECT_EQ(t.steps.back().time, OrdinalTime::omega());
  EXPECT_EQ(t.steps.back().config.state, kLimitState);
}

TEST(RunTransfinite, MaxLimitsZeroStopsAtCycle) {
  Machine m = load("blinker_limit.tm");
  Trace t = run_transfinite(m, Tape("B"), {}, 0);
  EXPECT_TRUE(std::holds_alternative<outcome::Cycle>(t.outcome));
  for (const auto& s : t.steps) EXPECT_TRUE(s.time.is_finite());
}

TEST(RunTransfinite, Errors) {
  Machine counter = load("counter.tm");
  try {
    run_transfinite(counter, tape_of(counter, "1111111"), {{3}}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LimitUndetectedWithinBudget);
  }
  Machine runner = load("runner.tm");
  try {
    run_transfinite(runner, Tape("B"), {}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnboundedTape);
  }
}

TEST(HaltingAtOmega, Examples) {
  Machine counter = load("counter.tm");
  EXPECT_EQ(decide_halting_at_omega(counter, tape_of(counter, "11"), 100), (HaltingVerdict{verdict::Halts{6}}));

  Machine runner = load("runner.tm");
  auto rv = decide_halting_at_omega(runner, Tape("B"), 50);
  auto* rd = std::get_if<verdict::Diverges>(&rv);
  ASSERT_NE(rd, nullptr);
  EXPECT_TRUE(rd->translation);
  EXPECT_EQ(rd->period, 1u);
  EXPECT_EQ(rd->drift, 1);
  EXPECT_TRUE(verify_witness(runner, Tape("B"), *rd));
  EXPECT_EQ(format_verdict(rv), "Diverges(translation-cycle period=1 drift=+1)");

  Machine blinker = load("blinker.tm");
  auto bv = decide_halting_at_omega(blinker, Tape("B"), 50);
  auto* bd = std::get_if<verdict::Diverges>(&bv);
  ASSERT_NE(bd, nullptr);
  EXPECT_FALSE(bd->translation);
  EXPECT_EQ(bd->period, 2u);
  EXPECT_TRUE(verify_witness(blinker, Tape("B"), *bd));

  EXPECT_EQ(decide_halting_at_omega(counter, tape_of(counter, "1111111"), 3), (HaltingVerdict{verdict::Unknown{3}}));
}

TEST(HaltingAtOmega, ForgedWitnessRejected) {
  Machine blinker = load("blinker.tm");
  auto v = std::get<verdict::Diverges>(decide_halting_at_omega(blinker, Tape("B"), 50));
  v.period = 3;
  EXPECT_FALSE(verify_witness(blinker, Tape("B"), v));
}

TEST(HaltingAtOmega, RandomVerdictsAreSound) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 400; ++i) {
    Machine m = testing::random_machine(rng, {});
    Tape input = tape_of(m, testing::random_input(rng, 4));
    auto v = decide_halting_at_omega(m, input, 400);
    if (auto* d = std::get_if<verdict::Diverges>(&v)) {
      ASSERT_TRUE(verify_witness(m, input, *d));
      // Divergence claims must survive a much longer unrolled run.
      ASSERT_FALSE(m.is_halting(testing::unrolled(m, input, 2000).steps.back().config.state));
    }
    if (auto* h = std::get_if<verdict::Halts>(&v)) {
      ASSERT_TRUE(m.is_halting(testing::unrolled(m, input, h->steps).steps.back().config.state));
    }
  }
}

TEST(LimitReportFormat, Blinker) {
  Machine m = load("blinker.tm");
  EXPECT_EQ(format_limit_report(limit_configuration(run(m, Tape("B"), 100), m)),
            "t=w state=limit head=0 tape=0..0:1 via=limit\n"
            "cycle start=1 period=2\n"
            "cell 0 seen=0,1 limsup=1\n");
}

}  // namespace
}  // namespace ittm

#include <gtest/gtest.h>

#include <cmath>

#include "liecomp/scenarios.hpp"

using namespace liecomp;

namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const GAction& helicoid() {
  static const Scenario sc = build_scenario("example6_helicoid", {{"alpha", 1.0}});
  return sc.action;
}

void expect_trace_inside(const GAction& a, const FlowOutcome& r) {
  for (const TracePoint& p : r.trace) EXPECT_GT(a.margin(p.x), 0.0);
  EXPECT_EQ(r.trace.back().x, r.endpoint);
}

}  // namespace

TEST(Flow, TranslationIsExact) {
  Scenario sc = build_scenario("translation_rn", {{"n", 2}});
  FlowOutcome r = flow(sc.action, v2(1, 0), 3.0, v2(0, 0));
  EXPECT_EQ(r.status, FlowStatus::Complete);
  EXPECT_LT((r.endpoint - v2(3, 0)).norm(), 1e-12);
  EXPECT_GE(r.trace.size(), 65u);
  EXPECT_DOUBLE_EQ(r.trace.back().t, 3.0);
}

TEST(Flow, HelicoidAlongX) {
  for (double u : {-1.0, 0.0, 2.5}) {
    FlowOutcome r = flow(helicoid(), v2(1, 0), 1.0, v3(1, 0, u));
    EXPECT_EQ(r.status, FlowStatus::Complete);
    EXPECT_LT((r.endpoint - v3(2, 0, u)).norm(), 1e-12);
    expect_trace_inside(helicoid(), r);
  }
}

TEST(Flow, EscapesThroughTheAxis) {
  FlowOutcome r = flow(helicoid(), v2(1, 0), 3.0, v3(-2, 0, 0.5));
  ASSERT_EQ(r.status, FlowStatus::Escaped);
  EXPECT_LT(std::fabs(r.escape_time - 2.0), 1e-3);
  EXPECT_LT(r.escape_bracket, 1e-6);
  EXPECT_FALSE(r.low_confidence);
  EXPECT_LT(helicoid().margin(r.endpoint), 10.0 * IntegratorConfig{}.escape_margin);
  expect_trace_inside(helicoid(), r);
}

TEST(Flow, NegativeTimeRunsBackwards) {
  FlowOutcome r = flow(helicoid(), v2(1, 0), -3.0, v3(2, 0, 0.5));
  ASSERT_EQ(r.status, FlowStatus::Escaped);
  EXPECT_LT(std::fabs(r.escape_time + 2.0), 1e-3);
  EXPECT_LT(r.trace.back().t, 0.0);
}

TEST(Flow, StartOutsideIsAnError) {
  EXPECT_THROW(flow(helicoid(), v2(1, 0), 1.0, v3(0, 0, 1)), Error);
}

TEST(Flow, StepLimit) {
  IntegratorConfig cfg;
  cfg.max_steps = 3;
  FlowOutcome r = flow(helicoid(), v2(1, 0), 1.0, v3(1, 0.5, 1), cfg);
  EXPECT_EQ(r.status, FlowStatus::StepLimit);
}

TEST(Flow, Deterministic) {
  FlowOutcome a = flow(helicoid(), v2(0.3, 1), 2.0, v3(1, 0.2, 1));
  FlowOutcome b = flow(helicoid(), v2(0.3, 1), 2.0, v3(1, 0.2, 1));
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].t, b.trace[i].t);
    EXPECT_EQ(a.trace[i].x, b.trace[i].x);
  }
}

TEST(RunWord, SquareReturns) {
  FlowWord w{{v2(1, 0), 1.0}, {v2(0, 1), 1.0}, {v2(1, 0), -1.0}, {v2(0, 1), -1.0}};
  FlowOutcome r = run_word(helicoid(), w, v3(1, 1, 1));
  ASSERT_EQ(r.status, FlowStatus::Complete);
  EXPECT_LT((r.endpoint - v3(1, 1, 1)).norm(), 1e-8);
  EXPECT_DOUBLE_EQ(r.trace.back().t, 4.0);
}

TEST(RunWord, SingleStageMatchesFlow) {
  FlowOutcome a = run_word(helicoid(), {{v2(0.4, -0.7), 1.5}}, v3(1, 0.5, 0.3));
  FlowOutcome b = flow(helicoid(), v2(0.4, -0.7), 1.5, v3(1, 0.5, 0.3));
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.endpoint, b.endpoint);
}

TEST(RunWord, EscapeReportsStage) {
  FlowOutcome r = run_word(helicoid(), {{v2(1, 0), -2.0}, {v2(0, 1), 1.0}}, v3(1, 0, 0.5));
  ASSERT_EQ(r.status, FlowStatus::Escaped);
  EXPECT_EQ(r.failed_stage, 0);
  EXPECT_LT(std::fabs(r.escape_time - 1.0), 1e-3);

  FlowOutcome late = run_word(helicoid(), {{v2(0, 1), 1.0}, {v2(0, 1), -3.0}}, v3(0, 1, 0.5));
  ASSERT_EQ(late.status, FlowStatus::Escaped);
  EXPECT_EQ(late.failed_stage, 1);
  EXPECT_LT(std::fabs(late.escape_time - 3.0), 1e-3);
}

TEST(RunWord, WindingShiftsZ) {
  // A square around the axis multiplies z by e^{-2 pi alpha}.
  FlowWord w{{v2(0, 1), 1.0}, {v2(1, 0), -2.0}, {v2(0, 1), -2.0}, {v2(1, 0), 2.0}, {v2(0, 1), 1.0}};
  FlowOutcome r = run_word(helicoid(), w, v3(1, 0, 1));
  ASSERT_EQ(r.status, FlowStatus::Complete);
  EXPECT_LT((r.endpoint.head(2) - v2(1, 0)).norm(), 1e-9);
  EXPECT_NEAR(r.endpoint[2] / oracle_z(1.0, 1.0, 2.0 * std::numbers::pi), 1.0, 1e-6);
}

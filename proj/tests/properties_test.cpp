#include <gtest/gtest.h>

#include "property_cases.hpp"

using namespace liecomp;
using namespace liecomp::props;

namespace {

constexpr int kCases = 50;
constexpr std::uint64_t kSeed = 20240601;
// Enough completed cases that a pass is not vacuous.
constexpr int kMinEvaluated = 25;

void expect_ok(const Outcome& o, double tol) {
  EXPECT_EQ(o.cases, kCases);
  EXPECT_EQ(o.failures, 0);
  EXPECT_GE(o.evaluated, kMinEvaluated);
  EXPECT_LT(o.worst, tol);
}

}  // namespace

TEST(Properties, FlowGroupLaw) { expect_ok(flow_group_law(kCases, kSeed), kFlowTol); }
TEST(Properties, WordInverse) { expect_ok(word_inverse(kCases, kSeed), kFlowTol); }
TEST(Properties, Reparametrization) { expect_ok(reparametrization(kCases, kSeed), kLiftTol); }
TEST(Properties, Concatenation) { expect_ok(concatenation(kCases, kSeed), kLiftTol); }
TEST(Properties, Equivariance) { expect_ok(equivariance(kCases, kSeed), kEquivarianceTol); }
TEST(Properties, SameLeafSymmetry) { expect_ok(leaf_symmetry(kCases, kSeed), 2 * kLeafTol); }
TEST(Properties, SameLeafTransitivity) { expect_ok(leaf_transitivity(kCases, kSeed), 2 * kLeafTol); }
TEST(Properties, WindingLaw) { expect_ok(winding_law(kCases, kSeed), kWindingTol); }

TEST(Properties, DeterministicPerSeed) {
  Outcome a = concatenation(10, 7), b = concatenation(10, 7);
  EXPECT_EQ(a.worst, b.worst);
  EXPECT_EQ(a.evaluated, b.evaluated);
}

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "liecomp/config.hpp"

using namespace liecomp;

namespace {

constexpr double kPi = std::numbers::pi;
const std::string kData = LIECOMP_TEST_DATA_DIR;

Json data(const std::string& name) { return read_json_file(kData + "/" + name); }

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

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Config;
}

Json minimal_scenario() {
  return Json::parse(R"({"name": "t", "group": {"type": "abelian", "dim": 1},
                         "manifold": {"dim": 1, "coords": ["x"]}, "fields": [["1"]]})");
}

}  // namespace

TEST(LoadScenario, HelicoidFileMatchesBuiltin) {
  Scenario file = load_scenario(data("example6.json"));
  Scenario builtin = build_scenario("example6", {{"alpha", 1.0}});
  EXPECT_EQ(file.name, "example6_file");
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Vec p = v3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    Vec x = v2(rng.uniform(-1, 1), rng.uniform(-1, 1));
    EXPECT_LT((file.action.zeta(x, p) - builtin.action.zeta(x, p)).norm(), 1e-14);
    EXPECT_DOUBLE_EQ(file.action.angle(as_span(p)), std::atan2(p[1], p[0]));
  }
  EXPECT_LT(check_homomorphism(file.action, 200, 0), 1e-8);
}

TEST(LoadScenario, ParameterOverrides) {
  Scenario sc = load_scenario(data("example6.json"), {{"alpha", 0.0}});
  EXPECT_EQ(sc.params.at("alpha"), 0.0);
  EXPECT_EQ(sc.action.zeta(v2(0, 1), v3(1, 0, 2)), v3(0, 1, 0));
  EXPECT_EQ(kind_of([] { load_scenario(data("example6.json"), {{"beta", 1.0}}); }),
            ErrorKind::BadParameter);
}

TEST(LoadScenario, FlippedFileFailsTheHomomorphismCheck) {
  Scenario sc = load_scenario(data("example6_flipped.json"));
  EXPECT_GT(check_homomorphism(sc.action, 200, 0), 1e-6);
}

TEST(LoadScenario, MatrixBasisConstants) {
  Scenario sc = load_scenario(data("affine_line.json"));
  const LieAlgebra& alg = sc.action.algebra();
  ASSERT_EQ(alg.dim(), 2u);
  // [X, Y] = X for X = E12, Y = -E11.
  EXPECT_EQ(alg.c(0, 1, 0), 1.0);
  EXPECT_EQ(alg.c(0, 1, 1), 0.0);
  EXPECT_EQ(alg.c(1, 0, 0), -1.0);
  EXPECT_LT(check_homomorphism(sc.action, 200, 0), 1e-12);
}

TEST(LoadScenario, MatrixBasisErrors) {
  Mat a = Mat::Zero(2, 2), b = Mat::Zero(2, 2);
  a(0, 1) = 1;
  b(0, 1) = 2;
  EXPECT_THROW(detail::algebra_from_basis({a, b}), Error);
  // E12 and E21 bracket to diag(1, -1), outside their span.
  Mat e21 = Mat::Zero(2, 2);
  e21(1, 0) = 1;
  EXPECT_EQ(kind_of([&] { detail::algebra_from_basis({a, e21}); }), ErrorKind::Validation);
}

TEST(LoadScenario, BoxAllowsNullBounds) {
  Json j = minimal_scenario();
  j["manifold"]["box"] = Json::parse("[[0, null]]");
  Scenario sc = load_scenario(j);
  EXPECT_EQ(sc.action.domain().box()[0].lo, 0.0);
  EXPECT_TRUE(std::isinf(sc.action.domain().box()[0].hi));
  double in[] = {5.0}, out[] = {-1.0};
  EXPECT_TRUE(sc.action.domain().contains(in));
  EXPECT_FALSE(sc.action.domain().contains(out));
}

TEST(LoadScenario, RejectsBadInput) {
  auto with = [](auto edit) {
    Json j = minimal_scenario();
    edit(j);
    return [j] { load_scenario(j); };
  };
  EXPECT_EQ(kind_of(with([](Json& j) { j["colour"] = "red"; })), ErrorKind::Config);
  EXPECT_EQ(kind_of(with([](Json& j) { j.erase("fields"); })), ErrorKind::Config);
  EXPECT_EQ(kind_of(with([](Json& j) { j["group"]["type"] = "lorentz"; })), ErrorKind::Config);
  EXPECT_EQ(kind_of(with([](Json& j) { j["group"]["dim"] = 0; })), ErrorKind::Config);
  EXPECT_EQ(kind_of(with([](Json& j) { j["manifold"]["dim"] = 2; })), ErrorKind::Config);
  EXPECT_EQ(kind_of(with([](Json& j) { j["fields"] = Json::parse(R"([["1"], ["0"]])"); })),
            ErrorKind::Config);
  EXPECT_EQ(kind_of(with([](Json& j) { j["manifold"]["sample_box"] = Json::parse("[[0, null]]"); })),
            ErrorKind::Config);
  EXPECT_EQ(kind_of(with([](Json& j) { j["fields"][0][0] = "x +"; })), ErrorKind::Syntax);
  EXPECT_EQ(kind_of(with([](Json& j) { j["fields"][0][0] = "beta"; })), ErrorKind::Validation);
  EXPECT_EQ(kind_of([] { read_json_file(kData + "/missing.json"); }), ErrorKind::Config);
}

TEST(LoadPath, Linear) {
  GroupModel g = GroupModel::abelian(2);
  GPath p = load_path(data("radial_path.json"), g);
  EXPECT_EQ(p.segments().size(), 1u);
  EXPECT_EQ(p.end(g).value, Mat(v2(-1, 0)));
  GPath empty = load_path(data("empty_path.json"), g);
  EXPECT_TRUE(empty.segments().empty());
}

TEST(LoadPath, ArcExpandsToChords) {
  GroupModel g = GroupModel::abelian(2);
  GPath p = load_path(data("circle_path.json"), g, 64);
  EXPECT_EQ(p.segments().size(), 64u);
  EXPECT_LT((p.end(g).value - Mat(v2(1, 0))).norm(), 1e-14);
  EXPECT_LT((p.evaluate(g, 0.25).value - Mat(v2(0, 1))).norm(), 1e-14);
  Json j = Json::parse(R"({"start": [2, 0], "segments": [{"type": "arc", "center": [1, 0], "angle": 3.141592653589793, "duration": 2},
                                                           {"type": "linear", "delta": [1, 0], "duration": 2}]})");
  GPath q = load_path(j, g, 4);
  ASSERT_EQ(q.segments().size(), 3u);
  EXPECT_LT((q.evaluate(g, 0.5).value - Mat(v2(0, 0))).norm(), 1e-14);
  EXPECT_LT((q.end(g).value - Mat(v2(1, 0))).norm(), 1e-14);
}

TEST(LoadPath, Errors) {
  GroupModel g = GroupModel::abelian(2);
  EXPECT_EQ(kind_of([&] { load_path(data("bad_key_path.json"), g); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { load_path(Json::parse(R"({"segments": [{"type": "linear", "delta": [1]}]})"), g); }),
            ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { load_path(Json::parse(R"({"segments": [{"type": "spline"}]})"), g); }),
            ErrorKind::Config);
  EXPECT_THROW(load_path(Json::parse(R"({"segments": [{"type": "linear", "delta": [1, 0], "duration": 0}]})"), g),
               Error);
  Scenario aff = build_scenario("affine_line");
  EXPECT_EQ(kind_of([&] {
              load_path(Json::parse(R"({"segments": [{"type": "arc", "center": [0, 0], "angle": 1}]})"),
                        aff.action.group());
            }),
            ErrorKind::InvalidPath);
  EXPECT_EQ(kind_of([&] {
              load_path(Json::parse(R"({"start": [[1, 0], [0, 0]], "segments": []})"), aff.action.group());
            }),
            ErrorKind::Singular);
}

TEST(LoadPath, MatrixExp) {
  Scenario aff = build_scenario("affine_line");
  const GroupModel& g = aff.action.group();
  GPath p = load_path(data("affine_exp_path.json"), g);
  ASSERT_FALSE(p.segments().empty());
  EXPECT_EQ(p.segments()[0].kind, SegmentKind::Exp);
  EXPECT_EQ(p.start().value, Mat::Identity(2, 2));
}

TEST(LoadLoop, Files) {
  auto loop = load_loop(data("z0_circle_loop.json"), 3);
  ASSERT_EQ(loop.size(), 257u);
  EXPECT_EQ(loop.front(), loop.back());
  EXPECT_EQ(load_loop(data("constant_loop.json"), 3).size(), 1u);
  EXPECT_THROW(load_loop(data("constant_loop.json"), 2), Error);
  EXPECT_THROW(load_loop(Json::parse(R"({"points": []})"), 2), Error);
}

TEST(LoadLeafPoints, File) {
  Scenario sc = build_scenario("example6");
  auto pts = load_leaf_points(data("leaf_points.json"), sc.action.group(), 3);
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_EQ(pts[1].g.value, Mat(v2(-1, 1)));
  EXPECT_NEAR(pts[1].x[2], 0.7 * std::exp(-kPi / 2), 1e-16);
  EXPECT_THROW(load_leaf_points(Json::parse(R"({"points": [{"g": [0, 0]}]})"), sc.action.group(), 3), Error);
}

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "liecomp/cli.hpp"

using namespace liecomp;

namespace {

constexpr double kPi = std::numbers::pi;
const std::string kData = LIECOMP_TEST_DATA_DIR;

struct CliRun {
  int code;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return kData + "/" + name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("liecomp_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace

TEST(CliCheck, BuiltinsPass) {
  CliRun r = run({"check", "--scenario", "example6", "--alpha", "1"});
  EXPECT_EQ(r.code, 0) << r.err;
  Json j = r.json();
  EXPECT_LT(j["homomorphism_residual"].get<double>(), 1e-8);
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_EQ(j["samples"].get<int>(), 200);

  CliRun t = run({"check", "--scenario", "translation_rn", "--n", "2"});
  EXPECT_EQ(t.code, 0);
  EXPECT_EQ(t.json()["homomorphism_residual"].get<double>(), 0.0);
  EXPECT_EQ(run({"check", "--scenario", "affine_line"}).code, 0);
  EXPECT_EQ(run({"check", "--file", data("example6.json")}).code, 0);
}

TEST(CliCheck, CorruptedFieldFails) {
  CliRun r = run({"check", "--file", data("example6_flipped.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_GT(r.json()["homomorphism_residual"].get<double>(), 1e-6);
  EXPECT_FALSE(r.json()["ok"].get<bool>());
}

TEST(CliCheck, ConfigErrors) {
  EXPECT_EQ(run({"check"}).code, 3);
  EXPECT_EQ(run({"check", "--scenario", "example6", "--file", data("example6.json")}).code, 3);
  CliRun unknown = run({"check", "--scenario", "example7"});
  EXPECT_EQ(unknown.code, 3);
  EXPECT_NE(unknown.err.find("liecomp: "), std::string::npos);
  EXPECT_EQ(run({"check", "--scenario", "example6", "--alpha", "-1"}).code, 3);
  EXPECT_EQ(run({"check", "--scenario", "example6", "--param", "alpha"}).code, 3);
  EXPECT_EQ(run({"check", "--file", data("missing.json")}).code, 3);
  EXPECT_EQ(run({"frobnicate"}).code, 3);
  EXPECT_EQ(run({}).code, 3);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(CliLift, CircleMatchesOracle) {
  CliRun r = run({"lift", "--scenario", "example6", "--alpha", "1", "--path", data("circle_path.json"), "--x0", "1,0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = r.json();
  EXPECT_EQ(j["status"], "complete");
  const double z = j["endpoint_m"][2].get<double>();
  EXPECT_LT(std::fabs(z - oracle_z(1, 1, 2 * kPi)) / oracle_z(1, 1, 2 * kPi), 1e-6);
  EXPECT_NEAR(j["winding"].get<double>(), 2 * kPi, 1e-9);
  EXPECT_TRUE(j["escape_time"].is_null());
}

TEST(CliLift, RadialPathEscapes) {
  CliRun r = run({"lift", "--scenario", "example6", "--path", data("radial_path.json"), "--x0", "1,0,1"});
  EXPECT_EQ(r.code, 2);
  Json j = r.json();
  EXPECT_EQ(j["status"], "escaped");
  EXPECT_LT(std::fabs(j["escape_time"].get<double>() - 1.0), 1e-3);
  EXPECT_LT(j["escape_bracket"].get<double>(), 1e-6);
}

TEST(CliLift, EmptyPathAndErrors) {
  CliRun r = run({"lift", "--scenario", "example6", "--path", data("empty_path.json"), "--x0", "1,2,3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.json()["endpoint_m"], Json::parse("[1.0, 2.0, 3.0]"));
  for (const char* form : {"--x0=-1,2,3", "--x0 -1,2,3"}) {
    std::string f = form;
    std::vector<std::string> args{"lift", "--scenario", "example6", "--path", data("empty_path.json")};
    if (auto sp = f.find(' '); sp != std::string::npos) {
      args.push_back(f.substr(0, sp));
      args.push_back(f.substr(sp + 1));
    } else {
      args.push_back(f);
    }
    CliRun neg = run(args);
    EXPECT_EQ(neg.code, 0) << form << neg.err;
    EXPECT_EQ(neg.json()["endpoint_m"][0].get<double>(), -1.0);
  }
  EXPECT_EQ(run({"lift", "--scenario", "example6", "--path", data("empty_path.json"), "--x0", "0,0,1"}).code, 3);
  EXPECT_EQ(run({"lift", "--scenario", "example6", "--path", data("empty_path.json"), "--x0", "1,a,1"}).code, 3);
  EXPECT_EQ(run({"lift", "--scenario", "example6", "--path", data("bad_key_path.json"), "--x0", "1,0,1"}).code, 3);
  EXPECT_EQ(run({"lift", "--scenario", "example6", "--path", data("circle_path.json"), "--x0", "1,0,1",
                 "--rel-tol", "0"})
                .code,
            3);
}

TEST(CliLift, OutputFilesAreDeterministic) {
  TempDir dir;
  auto once = [&](const std::string& tag) {
    CliRun r = run({"lift", "--scenario", "example6", "--path", data("circle_path.json"), "--x0", "1,0,1",
                 "--chords-per-turn", "256", "--out", dir.file(tag + ".csv"), "--summary",
                 dir.file(tag + ".json"), "--plot", dir.file(tag + "_plot.csv")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
  };
  once("a");
  once("b");
  for (const char* suffix : {".csv", ".json", "_plot.csv"})
    EXPECT_EQ(slurp(dir.file(std::string("a") + suffix)), slurp(dir.file(std::string("b") + suffix))) << suffix;

  std::istringstream csv(slurp(dir.file("a.csv")));
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  EXPECT_EQ(header, "t,g1,g2,x,y,z");
  EXPECT_EQ(first, "0,1,0,1,0,1");
  std::istringstream plot(slurp(dir.file("a_plot.csv")));
  std::getline(plot, header);
  EXPECT_EQ(header, "x,y,z");

  // Every value survives a text round trip.
  std::string line;
  while (std::getline(csv, line)) {
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      double v = std::stod(cell);
      EXPECT_EQ(cli_detail::fmt(v), cell);
    }
  }
}

TEST(CliHolonomy, ConstantLoopIsIdentity) {
  CliRun r = run({"holonomy", "--scenario", "example6", "--loop", data("constant_loop.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = r.json();
  EXPECT_EQ(j["h"], Json::parse("[0.0, 0.0]"));
  EXPECT_EQ(j["round_trip_residual"].get<double>(), 0.0);
  EXPECT_EQ(j["isotropy"]["orbit_dim"].get<int>(), 2);
  EXPECT_FALSE(j["caveat"].get<std::string>().empty());
}

TEST(CliHolonomy, ClosedCircleInZ0Orbit) {
  CliRun r = run({"holonomy", "--scenario", "example6", "--loop", data("z0_circle_loop.json"), "--frame", "1,0",
               "--frame", "0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = r.json();
  EXPECT_LT(std::hypot(j["h"][0].get<double>(), j["h"][1].get<double>()), 1e-6);
  EXPECT_LT(j["round_trip_residual"].get<double>(), 1e-6);
  EXPECT_TRUE(j["round_trip_ok"].get<bool>());
}

TEST(CliHolonomy, AffineOpenCurve) {
  CliRun r = run({"holonomy", "--scenario", "affine_line", "--loop", data("affine_open_curve.json"), "--frame", "1,0",
               "--open"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json h = r.json()["h"];
  EXPECT_NEAR(h[0][0].get<double>(), 1.0, 1e-10);
  EXPECT_NEAR(h[0][1].get<double>(), 1.0, 1e-10);
  EXPECT_NEAR(h[1][0].get<double>(), 0.0, 1e-10);
  EXPECT_NEAR(h[1][1].get<double>(), 1.0, 1e-10);
  // Without --open the curve is rejected.
  EXPECT_EQ(run({"holonomy", "--scenario", "affine_line", "--loop", data("affine_open_curve.json"), "--frame",
                 "1,0"})
                .code,
            3);
}

TEST(CliHolonomy, FrameErrors) {
  EXPECT_EQ(run({"holonomy", "--scenario", "example6", "--loop", data("z0_circle_loop.json"), "--frame", "1,0"}).code,
            4);
  EXPECT_EQ(run({"holonomy", "--scenario", "example6", "--loop", data("z0_circle_loop.json"), "--frame", "1,0,0",
                 "--frame", "0,1"})
                .code,
            3);
}

TEST(CliClassify, LeafPoints) {
  CliRun r = run({"classify", "--scenario", "example6", "--alpha", "1", "--points", data("leaf_points.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  Json pts = r.json()["points"];
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_EQ(pts[0]["group"], pts[1]["group"]);
  EXPECT_NE(pts[0]["group"], pts[2]["group"]);
  EXPECT_EQ(pts[3]["class"]["tag"], "zero");
  EXPECT_EQ(pts[3]["group"], pts[4]["group"]);
  EXPECT_EQ(pts[0]["base"], Json::parse("[-1.0, 0.0]"));
  EXPECT_EQ(r.json()["groups"].size(), 3u);
  EXPECT_EQ(run({"classify", "--scenario", "translation_rn", "--points", data("leaf_points.json")}).code, 3);
}

TEST(CliClassify, OutputIsByteIdentical) {
  TempDir dir;
  for (const char* name : {"a.json", "b.json"})
    ASSERT_EQ(run({"classify", "--scenario", "example6", "--points", data("leaf_points.json"), "--out",
                   dir.file(name)})
                  .code,
              0);
  EXPECT_EQ(slurp(dir.file("a.json")), slurp(dir.file("b.json")));
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorKind::Escape), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::Singular), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::IllConditioned), 4);
  EXPECT_EQ(exit_code_for(ErrorKind::Config), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::Validation), 3);
}

#pragma once

// Command-line front end. `run_cli` is the whole program minus process
// plumbing, so tests can drive it with in-memory streams.
//
// Exit codes: 0 ok, 1 check failure, 2 escape, 3 config or validation error,
// 4 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "liecomp/config.hpp"

namespace liecomp {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitEscaped = 2,
  kExitConfig = 3,
  kExitNumerical = 4,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Escape: return kExitEscaped;
    case ErrorKind::Domain:
    case ErrorKind::Sampling:
    case ErrorKind::IllConditioned:
    case ErrorKind::Singular: return kExitNumerical;
    default: return kExitConfig;
  }
}

namespace cli_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (item.empty() || used != item.size() || !std::isfinite(v))
      throw Error(ErrorKind::Config, what + ": '" + text + "' is not a comma-separated list of numbers");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::Config, what + " is empty");
  return out;
}

inline Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json group_json(const GroupModel& group, const GroupElement& g) {
  if (group.kind() == GroupKind::Abelian) return vec_json(g.value.col(0));
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < g.value.rows(); ++r) rows.push_back(vec_json(g.value.row(r).transpose()));
  return rows;
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline std::vector<std::string> group_coordinate_names(const GroupModel& group) {
  std::vector<std::string> out;
  if (group.kind() == GroupKind::Abelian) {
    for (std::size_t i = 0; i < group.dim(); ++i) out.push_back("g" + std::to_string(i + 1));
  } else {
    const auto n = static_cast<std::size_t>(group.matrix_size());
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) out.push_back("g" + std::to_string(r + 1) + std::to_string(c + 1));
  }
  return out;
}

class OutputFile {
 public:
  explicit OutputFile(const std::string& path) : file_(path) {
    if (!file_) throw Error(ErrorKind::Config, "cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_; }

 private:
  std::ofstream file_;
};

/// Writes `j` followed by a newline to `path`, or to `fallback` when path is empty.
inline void emit_json(const Json& j, const std::string& path, std::ostream& fallback) {
  if (path.empty()) {
    fallback << j.dump(2) << '\n';
    return;
  }
  OutputFile f(path);
  f.stream() << j.dump(2) << '\n';
}

struct Common {
  std::string scenario;
  std::string file;
  std::optional<double> alpha;
  std::optional<double> n;
  std::vector<std::string> params;
  std::uint64_t seed = 0;
  std::optional<double> rel_tol;
  std::size_t chords_per_turn = 4096;
};

inline void add_common(CLI::App* app, Common& c) {
  app->add_option("--scenario", c.scenario, "Built-in scenario name");
  app->add_option("--file", c.file, "Scenario JSON file");
  app->add_option("--alpha", c.alpha, "Shortcut for --param alpha=VALUE");
  app->add_option("--n", c.n, "Shortcut for --param n=VALUE");
  app->add_option("--param", c.params, "Scenario parameter KEY=VALUE (repeatable)");
  app->add_option("--seed", c.seed, "Sampling seed");
  app->add_option("--rel-tol", c.rel_tol, "Integrator relative tolerance");
  app->add_option("--chords-per-turn", c.chords_per_turn, "Linear chords per full turn of an arc");
}

inline Scenario resolve_scenario(const Common& c) {
  if (c.scenario.empty() == c.file.empty())
    throw Error(ErrorKind::Config, "give exactly one of --scenario and --file");
  Env given;
  for (const std::string& kv : c.params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorKind::Config, "--param expects KEY=VALUE, got '" + kv + "'");
    given[kv.substr(0, eq)] = parse_list(kv.substr(eq + 1), "--param " + kv.substr(0, eq)).at(0);
  }
  if (c.alpha) given["alpha"] = *c.alpha;
  if (c.n) given["n"] = *c.n;
  if (!c.scenario.empty()) return build_scenario(c.scenario, given);
  return load_scenario(read_json_file(c.file), given);
}

inline IntegratorConfig integrator(const Common& c) {
  IntegratorConfig cfg;
  if (c.rel_tol) cfg.rel_tol = *c.rel_tol;
  cfg.validate();
  return cfg;
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Lifts curves through the graph foliation of a g-manifold and reports completion data",
               "liecomp"};
  app.require_subcommand(1);

  Common check_c, lift_c, hol_c, cls_c;
  std::size_t samples = 200;
  CLI::App* check = app.add_subcommand("check", "Verify that zeta is a Lie algebra homomorphism");
  add_common(check, check_c);
  check->add_option("--samples", samples, "Number of sampled points");

  std::string path_file, x0_text, trace_out, summary_out, plot_out;
  CLI::App* lift = app.add_subcommand("lift", "Lift a group path from x0 and write the trace");
  add_common(lift, lift_c);
  lift->add_option("--path", path_file, "Path JSON file")->required();
  lift->add_option("--x0", x0_text, "Start point in M, comma separated")->required();
  lift->add_option("--out", trace_out, "Trace CSV output");
  lift->add_option("--summary", summary_out, "Summary JSON output (default: stdout)");
  lift->add_option("--plot", plot_out, "Polyline CSV of the M-projection");

  std::string loop_file, hol_x0, hol_out;
  std::vector<std::string> frame_text;
  bool open_curve = false;
  CLI::App* hol = app.add_subcommand("holonomy", "Group element produced by a loop in one orbit");
  add_common(hol, hol_c);
  hol->add_option("--loop", loop_file, "Loop JSON file")->required();
  hol->add_option("--frame", frame_text, "Frame vector in g, comma separated (repeatable)");
  hol->add_option("--x0", hol_x0, "Base point (default: first loop point)");
  hol->add_flag("--open", open_curve, "Accept a curve whose ends differ");
  hol->add_option("--out", hol_out, "Report JSON output (default: stdout)");

  std::string points_file, cls_out;
  double cls_tol = 1e-6;
  CLI::App* cls = app.add_subcommand("classify", "Leaf invariants and grouping for helicoid leaf points");
  add_common(cls, cls_c);
  cls->add_option("--points", points_file, "Leaf-point JSON file")->required();
  cls->add_option("--tol", cls_tol, "Invariant comparison tolerance");
  cls->add_option("--out", cls_out, "Report JSON output (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (check->parsed()) {
      Scenario sc = resolve_scenario(check_c);
      const GAction& a = sc.action;
      double residual = check_homomorphism(a, samples, check_c.seed);
      Json report{{"scenario", sc.name},
                  {"samples", samples},
                  {"seed", check_c.seed},
                  {"homomorphism_residual", residual},
                  {"jacobi_residual", a.algebra().jacobi_residual()},
                  {"commutator_residual", a.group().commutator_residual(a.algebra())},
                  {"ok", residual < 1e-6}};
      out << report.dump(2) << '\n';
      return residual < 1e-6 ? kExitOk : kExitCheckFailed;
    }

    if (lift->parsed()) {
      Scenario sc = resolve_scenario(lift_c);
      const GAction& a = sc.action;
      const GroupModel& group = a.group();
      IntegratorConfig cfg = integrator(lift_c);
      GPath path = load_path(read_json_file(path_file), group, lift_c.chords_per_turn);
      Vec x0 = to_vec(parse_list(x0_text, "--x0"));
      LiftResult r = lift_path(a, path, x0, cfg);

      if (!trace_out.empty()) {
        OutputFile f(trace_out);
        std::ostream& os = f.stream();
        os << 't';
        for (const std::string& name : group_coordinate_names(group)) os << ',' << name;
        for (const std::string& name : a.domain().coords()) os << ',' << name;
        os << '\n';
        for (const LiftPoint& p : r.trace) {
          os << fmt(p.t);
          for (double v : group.coordinates(p.g)) os << ',' << fmt(v);
          for (Eigen::Index i = 0; i < p.x.size(); ++i) os << ',' << fmt(p.x[i]);
          os << '\n';
        }
      }
      if (!plot_out.empty()) {
        OutputFile f(plot_out);
        std::ostream& os = f.stream();
        const Eigen::Index cols = std::min<Eigen::Index>(3, x0.size());
        const char* names[] = {"x", "y", "z"};
        for (Eigen::Index i = 0; i < cols; ++i) os << (i ? "," : "") << names[i];
        os << '\n';
        for (const LiftPoint& p : r.trace) {
          for (Eigen::Index i = 0; i < cols; ++i) os << (i ? "," : "") << fmt(p.x[i]);
          os << '\n';
        }
      }

      Json summary{{"status", to_string(r.status)},
                   {"endpoint_g", group_json(group, r.endpoint_g)},
                   {"endpoint_m", vec_json(r.endpoint_m)},
                   {"escape_time", number_or_null(r.escape_time)},
                   {"escape_bracket", number_or_null(r.escape_bracket)},
                   {"low_confidence", r.low_confidence},
                   {"winding", r.winding ? Json(*r.winding) : Json(nullptr)},
                   {"trace_points", r.trace.size()}};
      emit_json(summary, summary_out, out);
      if (r.status == FlowStatus::Escaped) return kExitEscaped;
      if (r.status == FlowStatus::StepLimit) return kExitNumerical;
      return kExitOk;
    }

    if (hol->parsed()) {
      Scenario sc = resolve_scenario(hol_c);
      const GAction& a = sc.action;
      IntegratorConfig cfg = integrator(hol_c);
      std::vector<Vec> loop = load_loop(read_json_file(loop_file), a.dim_manifold());
      Vec x0 = hol_x0.empty() ? loop.front() : to_vec(parse_list(hol_x0, "--x0"));
      std::vector<Vec> frame;
      for (const std::string& f : frame_text) frame.push_back(to_vec(parse_list(f, "--frame")));
      if (frame.empty())
        for (std::size_t i = 0; i < a.dim_algebra(); ++i)
          frame.push_back(Vec::Unit(static_cast<Eigen::Index>(a.dim_algebra()), static_cast<Eigen::Index>(i)));
      LoopOptions opt;
      opt.allow_open = open_curve;
      HolonomyElement h = loop_to_group(a, frame, loop, x0, cfg, opt);
      IsotropyReport iso = isotropy(a, x0);
      Json null_basis = Json::array();
      for (Eigen::Index c = 0; c < iso.nullspace.cols(); ++c) null_basis.push_back(vec_json(iso.nullspace.col(c)));
      Json frame_json = Json::array();
      for (const Vec& f : frame) frame_json.push_back(vec_json(f));
      const bool ok = h.round_trip_residual < 1e-6;
      Json report{{"scenario", sc.name},
                  {"x0", vec_json(x0)},
                  {"frame", frame_json},
                  {"loop_points", loop.size()},
                  {"group_segments", h.group_curve.segments().size()},
                  {"h", group_json(a.group(), h.h)},
                  {"round_trip_residual", number_or_null(h.round_trip_residual)},
                  {"round_trip_ok", ok},
                  {"isotropy", {{"singular_values", iso.singular_values},
                                {"nullspace", null_basis},
                                {"orbit_dim", iso.orbit_dim}}},
                  {"caveat", HolonomyElement::closure_caveat}};
      emit_json(report, hol_out, out);
      if (!std::isfinite(h.round_trip_residual)) return kExitEscaped;
      return ok ? kExitOk : kExitCheckFailed;
    }

    // classify
    Scenario sc = resolve_scenario(cls_c);
    if (sc.name != "example6_helicoid")
      throw Error(ErrorKind::Config, "classify is defined for example6_helicoid only");
    const double alpha = sc.params.at("alpha");
    std::vector<LeafPoint> pts = load_leaf_points(read_json_file(points_file), sc.action.group(), 3);
    std::vector<LeafInvariant> invs;
    for (const LeafPoint& p : pts) invs.push_back(leaf_invariant(alpha, p));
    std::vector<int> label(pts.size(), -1);
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t g = 0; g < groups.size() && label[i] < 0; ++g)
        if (same_invariant(invs[groups[g].front()], invs[i], cls_tol)) label[i] = static_cast<int>(g);
      if (label[i] < 0) {
        label[i] = static_cast<int>(groups.size());
        groups.emplace_back();
      }
      groups[static_cast<std::size_t>(label[i])].push_back(i);
    }
    Json points = Json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      points.push_back({{"g", group_json(sc.action.group(), pts[i].g)},
                        {"x", vec_json(pts[i].x)},
                        {"base", vec_json(invs[i].base)},
                        {"class", {{"tag", to_string(invs[i].tag)},
                                   {"sign", invs[i].sign},
                                   {"value", invs[i].value}}},
                        {"group", label[i]}});
    }
    Json report{{"scenario", sc.name}, {"alpha", alpha}, {"points", points}, {"groups", groups}};
    emit_json(report, cls_out, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "liecomp: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
}

}  // namespace liecomp

#pragma once

// JSON loaders for scenario, path, loop and leaf-point files. Every object is
// schema-strict: unknown keys are errors.
//
// Scenario file
//   {"name": str,
//    "group": {"type": "abelian", "dim": d} | {"type": "matrix", "dim": d, "basis": [[[..]..]..]},
//    "manifold": {"dim": n, "coords": [str..], "box": [[lo|null, hi|null]..],
//                 "exclusions": [expr..], "angle": expr, "sample_box": [[lo, hi]..]},
//    "params": {name: number..},
//    "fields": [[expr..]..]}
// Path file
//   {"start": [..] | [[..]..],
//    "segments": [{"type": "linear", "delta": [..], "duration": w}
//                | {"type": "exp", "X": [..], "duration": w}
//                | {"type": "arc", "center": [..], "angle": sweep, "duration": w}]}
//   An arc sweeps `angle` radians about `center` from the current point, as
//   linear chords (abelian groups only).
// Loop file
//   {"points": [[..]..]}
// Leaf-point file
//   {"points": [{"g": [..] | [[..]..], "x": [..]}..]}

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "liecomp/scenarios.hpp"

namespace liecomp {

using Json = nlohmann::json;

namespace detail {

inline void check_keys(const Json& j, const std::string& what,
                       std::initializer_list<const char*> required,
                       std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw Error(ErrorKind::Config, what + " must be a JSON object");
  std::set<std::string> known;
  for (const char* k : required) {
    known.insert(k);
    if (!j.contains(k)) throw Error(ErrorKind::Config, what + " is missing key '" + k + "'");
  }
  for (const char* k : optional) known.insert(k);
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw Error(ErrorKind::Config, what + " has unknown key '" + item.key() + "'");
}

inline double get_number(const Json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorKind::Config, what + " must be a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorKind::Config, what + " must be finite");
  return v;
}

inline std::size_t get_count(const Json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() <= 0)
    throw Error(ErrorKind::Config, what + " must be a positive integer");
  return static_cast<std::size_t>(j.get<long long>());
}

inline std::string get_string(const Json& j, const std::string& what) {
  if (!j.is_string()) throw Error(ErrorKind::Config, what + " must be a string");
  return j.get<std::string>();
}

inline Vec get_vector(const Json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorKind::Config, what + " must be an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = get_number(j[i], what + "[" + std::to_string(i) + "]");
  return v;
}

inline Mat get_matrix(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw Error(ErrorKind::Config, what + " must be a non-empty array of rows");
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    Vec row = get_vector(j[r], what + "[" + std::to_string(r) + "]");
    if (static_cast<std::size_t>(row.size()) != cols)
      throw Error(ErrorKind::Config, what + " has ragged rows");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

inline Expr get_expr(const Json& j, const std::string& what) {
  if (j.is_number()) return Expr::number(get_number(j, what));
  return Expr::parse(get_string(j, what));
}

inline std::vector<Interval> get_intervals(const Json& j, std::size_t n, bool allow_null,
                                           const std::string& what) {
  if (!j.is_array() || j.size() != n)
    throw Error(ErrorKind::Config, what + " needs one [lo, hi] pair per coordinate");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Json& p = j[i];
    const std::string at = what + "[" + std::to_string(i) + "]";
    if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::Config, at + " must be [lo, hi]");
    Interval iv;
    if (!(allow_null && p[0].is_null())) iv.lo = get_number(p[0], at + ".lo");
    if (!(allow_null && p[1].is_null())) iv.hi = get_number(p[1], at + ".hi");
    out.push_back(iv);
  }
  return out;
}

/// Structure constants read off the basis commutators by least squares.
inline LieAlgebra algebra_from_basis(const std::vector<Mat>& basis) {
  const std::size_t d = basis.size();
  const Eigen::Index n = basis.front().rows();
  Mat flat(n * n, static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k)
    flat.col(static_cast<Eigen::Index>(k)) = basis[k].reshaped();
  Eigen::ColPivHouseholderQR<Mat> qr(flat);
  if (qr.rank() != static_cast<Eigen::Index>(d))
    throw Error(ErrorKind::Validation, "matrix basis is linearly dependent");
  std::vector<double> c(d * d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      Mat comm = basis[i] * basis[j] - basis[j] * basis[i];
      Vec rhs = comm.reshaped();
      Vec coef = qr.solve(rhs);
      if ((flat * coef - rhs).cwiseAbs().maxCoeff() > 1e-10)
        throw Error(ErrorKind::Validation, "matrix basis is not closed under commutators");
      for (std::size_t k = 0; k < d; ++k) {
        double v = coef[static_cast<Eigen::Index>(k)];
        c[(i * d + j) * d + k] = v;
        c[(j * d + i) * d + k] = -v;
      }
    }
  }
  std::vector<std::string> names;
  for (std::size_t i = 0; i < d; ++i) names.push_back("X" + std::to_string(i + 1));
  return LieAlgebra(std::move(names), std::move(c));
}

}  // namespace detail

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Config, "'" + path + "' is not valid JSON: " + e.what());
  }
}

/// A user-defined g-manifold. `overrides` replaces values of parameters the
/// file already declares.
inline Scenario load_scenario(const Json& j, const Env& overrides = {}) {
  using namespace detail;
  check_keys(j, "scenario", {"name", "group", "manifold", "fields"}, {"params"});
  Scenario sc;
  sc.name = get_string(j["name"], "name");

  if (j.contains("params")) {
    if (!j["params"].is_object()) throw Error(ErrorKind::Config, "params must be an object");
    for (const auto& item : j["params"].items())
      sc.params[item.key()] = get_number(item.value(), "params." + item.key());
  }
  for (const auto& [key, value] : overrides) {
    auto it = sc.params.find(key);
    if (it == sc.params.end())
      throw Error(ErrorKind::BadParameter, "scenario '" + sc.name + "' has no parameter '" + key + "'");
    it->second = value;
  }
  for (const auto& [key, value] : sc.params) sc.schema.push_back({key, value});

  const Json& grp = j["group"];
  const std::string type = get_string(grp.is_object() && grp.contains("type") ? grp["type"] : Json(),
                                      "group.type");
  LieAlgebra alg;
  GroupModel group;
  if (type == "abelian") {
    check_keys(grp, "group", {"type", "dim"});
    const std::size_t d = get_count(grp["dim"], "group.dim");
    alg = LieAlgebra::abelian(d);
    group = GroupModel::abelian(d);
  } else if (type == "matrix") {
    check_keys(grp, "group", {"type", "dim", "basis"});
    const std::size_t d = get_count(grp["dim"], "group.dim");
    const Json& jb = grp["basis"];
    if (!jb.is_array() || jb.size() != d)
      throw Error(ErrorKind::Config, "group.basis needs dim matrices");
    std::vector<Mat> basis;
    for (std::size_t i = 0; i < d; ++i)
      basis.push_back(get_matrix(jb[i], "group.basis[" + std::to_string(i) + "]"));
    group = GroupModel::matrix(basis);
    alg = algebra_from_basis(basis);
  } else {
    throw Error(ErrorKind::Config, "group.type must be 'abelian' or 'matrix'");
  }

  const Json& man = j["manifold"];
  check_keys(man, "manifold", {"dim", "coords"}, {"box", "exclusions", "angle", "sample_box"});
  const std::size_t n = get_count(man["dim"], "manifold.dim");
  if (!man["coords"].is_array() || man["coords"].size() != n)
    throw Error(ErrorKind::Config, "manifold.coords needs dim names");
  std::vector<std::string> coords;
  for (const Json& c : man["coords"]) coords.push_back(get_string(c, "manifold.coords[]"));
  std::vector<Interval> box, sample_box;
  if (man.contains("box")) box = get_intervals(man["box"], n, true, "manifold.box");
  if (man.contains("sample_box"))
    sample_box = get_intervals(man["sample_box"], n, false, "manifold.sample_box");
  std::vector<Expr> exclusions;
  if (man.contains("exclusions")) {
    if (!man["exclusions"].is_array())
      throw Error(ErrorKind::Config, "manifold.exclusions must be an array");
    for (const Json& e : man["exclusions"]) exclusions.push_back(get_expr(e, "manifold.exclusions[]"));
  }
  std::optional<Expr> angle;
  if (man.contains("angle")) angle = get_expr(man["angle"], "manifold.angle");

  const Json& jf = j["fields"];
  if (!jf.is_array() || jf.size() != group.dim())
    throw Error(ErrorKind::Config, "fields needs one vector field per group dimension");
  std::vector<std::vector<Expr>> fields;
  for (std::size_t i = 0; i < jf.size(); ++i) {
    if (!jf[i].is_array() || jf[i].size() != n)
      throw Error(ErrorKind::Config, "fields[" + std::to_string(i) + "] needs dim components");
    std::vector<Expr> f;
    for (const Json& e : jf[i]) f.push_back(get_expr(e, "fields[" + std::to_string(i) + "][]"));
    fields.push_back(std::move(f));
  }

  sc.action = GAction(std::move(alg), std::move(group),
                      Domain(std::move(coords), std::move(box), std::move(exclusions),
                             std::move(sample_box)),
                      std::move(fields), sc.params, std::move(angle));
  return sc;
}

inline GroupElement load_group_element(const Json& j, const GroupModel& group,
                                       const std::string& what) {
  if (group.kind() == GroupKind::Abelian) {
    Vec v = detail::get_vector(j, what);
    if (static_cast<std::size_t>(v.size()) != group.dim())
      throw Error(ErrorKind::Config, what + " needs " + std::to_string(group.dim()) + " coordinates");
    return {Mat(v)};
  }
  Mat m = detail::get_matrix(j, what);
  if (m.rows() != group.matrix_size() || m.cols() != group.matrix_size())
    throw Error(ErrorKind::Config, what + " has the wrong matrix size");
  if (!(std::fabs(m.determinant()) > 1e-12))
    throw Error(ErrorKind::Singular, what + " is singular");
  return {m};
}

inline GPath load_path(const Json& j, const GroupModel& group, std::size_t chords_per_turn = 4096) {
  using namespace detail;
  check_keys(j, "path", {"segments"}, {"start"});
  GroupElement start = j.contains("start") ? load_group_element(j["start"], group, "start")
                                           : group.identity();
  if (!j["segments"].is_array()) throw Error(ErrorKind::Config, "segments must be an array");
  std::vector<PathSegment> segs;
  const auto d = static_cast<Eigen::Index>(group.dim());
  auto check_dim = [&](const Vec& v, const std::string& what) {
    if (v.size() != d) throw Error(ErrorKind::Config, what + " has the wrong dimension");
  };
  for (std::size_t i = 0; i < j["segments"].size(); ++i) {
    const Json& s = j["segments"][i];
    const std::string at = "segments[" + std::to_string(i) + "]";
    const std::string type = get_string(s.is_object() && s.contains("type") ? s["type"] : Json(),
                                        at + ".type");
    if (type == "linear") {
      check_keys(s, at, {"type", "delta"}, {"duration"});
      Vec delta = get_vector(s["delta"], at + ".delta");
      check_dim(delta, at + ".delta");
      double w = s.contains("duration") ? get_number(s["duration"], at + ".duration") : 1.0;
      segs.push_back({SegmentKind::Linear, delta, w});
    } else if (type == "exp") {
      check_keys(s, at, {"type", "X"}, {"duration"});
      Vec x = get_vector(s["X"], at + ".X");
      check_dim(x, at + ".X");
      double w = s.contains("duration") ? get_number(s["duration"], at + ".duration") : 1.0;
      segs.push_back({SegmentKind::Exp, x, w});
    } else if (type == "arc") {
      check_keys(s, at, {"type", "center", "angle"}, {"duration"});
      if (group.kind() != GroupKind::Abelian)
        throw Error(ErrorKind::InvalidPath, "arcs require the abelian group model");
      Vec center = get_vector(s["center"], at + ".center");
      check_dim(center, at + ".center");
      double sweep = get_number(s["angle"], at + ".angle");
      double w = s.contains("duration") ? get_number(s["duration"], at + ".duration") : 1.0;
      Vec here = GPath(start, segs).end(group).value.col(0);
      Vec rel = here - center;
      const double radius = std::hypot(rel[0], rel[1]);
      for (Eigen::Index k = 2; k < rel.size(); ++k)
        if (rel[k] != 0.0)
          throw Error(ErrorKind::InvalidPath, at + ": arc plane must contain the current point");
      auto chords = arc_chords(center, radius, std::atan2(rel[1], rel[0]), sweep, chords_per_turn, w);
      segs.insert(segs.end(), chords.begin(), chords.end());
    } else {
      throw Error(ErrorKind::Config, at + ".type must be 'linear', 'exp' or 'arc'");
    }
  }
  GPath path(std::move(start), std::move(segs));
  path.validate(group);
  return path;
}

inline std::vector<Vec> load_loop(const Json& j, std::size_t n) {
  detail::check_keys(j, "loop", {"points"});
  if (!j["points"].is_array() || j["points"].empty())
    throw Error(ErrorKind::Config, "points must be a non-empty array");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < j["points"].size(); ++i) {
    Vec p = detail::get_vector(j["points"][i], "points[" + std::to_string(i) + "]");
    if (static_cast<std::size_t>(p.size()) != n)
      throw Error(ErrorKind::Config, "points[" + std::to_string(i) + "] has the wrong dimension");
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<LeafPoint> load_leaf_points(const Json& j, const GroupModel& group, std::size_t n) {
  detail::check_keys(j, "leaf points", {"points"});
  if (!j["points"].is_array()) throw Error(ErrorKind::Config, "points must be an array");
  std::vector<LeafPoint> out;
  for (std::size_t i = 0; i < j["points"].size(); ++i) {
    const Json& p = j["points"][i];
    const std::string at = "points[" + std::to_string(i) + "]";
    detail::check_keys(p, at, {"g", "x"});
    LeafPoint lp{load_group_element(p["g"], group, at + ".g"), detail::get_vector(p["x"], at + ".x")};
    if (static_cast<std::size_t>(lp.x.size()) != n)
      throw Error(ErrorKind::Config, at + ".x has the wrong dimension");
    out.push_back(std::move(lp));
  }
  return out;
}

}  // namespace liecomp

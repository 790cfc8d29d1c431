#pragma once

// Built-in g-manifolds with closed-form oracles.
//
//   translation_rn   d_i on R^n, complete.
//   example4_annulus the pullbacks of d_x, d_y to a strip (r, theta) of the
//                    universal cover of an annulus W, via p(r, theta) = r e^{i theta}.
//   example6_helicoid
//                    zeta_X = d_x + alpha y z / r^2 d_z, zeta_Y = d_y - alpha x z / r^2 d_z
//                    on R^3 minus the z-axis; for alpha > 0 the orbits off z = 0 are
//                    helicoidal staircases accumulating on the plane z = 0.
//   affine_line      aff(1) acting on R by d_x and x d_x.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "liecomp/completion.hpp"

namespace liecomp {

struct ParamSpec {
  std::string name;
  double default_value = 0.0;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  bool integer = false;
};

/// An equivariant map f : M -> N into a complete G-space N, with the action
/// (g, w) -> g.w on N. Used for the universal-property check: g.f(x) is
/// constant along every leaf of G x M.
struct EquivariantTarget {
  std::function<Vec(const Vec&)> map;
  std::function<Vec(const GroupElement&, const Vec&)> act;
};

struct Scenario {
  std::string name;
  std::vector<ParamSpec> schema;
  Env params;
  GAction action;
  std::optional<EquivariantTarget> target;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"translation_rn", "example4_annulus",
                                              "example6_helicoid", "affine_line"};
  return names;
}

inline std::string canonical_scenario_name(const std::string& name) {
  if (name == "example6") return "example6_helicoid";
  if (name == "example4") return "example4_annulus";
  return name;
}

inline std::vector<ParamSpec> scenario_schema(const std::string& raw_name) {
  const std::string name = canonical_scenario_name(raw_name);
  if (name == "translation_rn") return {{"n", 2.0, 1.0, 16.0, true}};
  if (name == "example4_annulus")
    return {{"r0", 0.5, 0.0, std::numeric_limits<double>::infinity(), false},
            {"r1", 2.0, 0.0, std::numeric_limits<double>::infinity(), false},
            {"theta_min", -std::numbers::pi},
            {"theta_max", 3.0 * std::numbers::pi}};
  if (name == "example6_helicoid")
    return {{"alpha", 1.0, 0.0, std::numeric_limits<double>::infinity(), false}};
  if (name == "affine_line") return {};
  throw Error(ErrorKind::UnknownScenario, "unknown scenario '" + raw_name + "'");
}

namespace detail {

inline Env resolve_params(const std::string& name, const std::vector<ParamSpec>& schema,
                          const Env& given) {
  Env out;
  for (const ParamSpec& p : schema) out[p.name] = p.default_value;
  for (const auto& [key, value] : given) {
    auto it = std::find_if(schema.begin(), schema.end(),
                           [&](const ParamSpec& p) { return p.name == key; });
    if (it == schema.end())
      throw Error(ErrorKind::BadParameter, "scenario '" + name + "' has no parameter '" + key + "'");
    if (!std::isfinite(value) || value < it->min || value > it->max)
      throw Error(ErrorKind::BadParameter, "parameter '" + key + "' out of range");
    if (it->integer && value != std::floor(value))
      throw Error(ErrorKind::BadParameter, "parameter '" + key + "' must be an integer");
    out[key] = value;
  }
  return out;
}

inline std::vector<Expr> parse_all(std::initializer_list<const char*> srcs) {
  std::vector<Expr> out;
  for (const char* s : srcs) out.push_back(Expr::parse(s));
  return out;
}

}  // namespace detail

/// Builds a named scenario. Unknown names and parameters are errors.
inline Scenario build_scenario(const std::string& raw_name, const Env& given = {}) {
  const std::string name = canonical_scenario_name(raw_name);
  std::vector<ParamSpec> schema = scenario_schema(name);
  Env params = detail::resolve_params(name, schema, given);
  Scenario sc{name, schema, params, {}, std::nullopt};

  if (name == "translation_rn") {
    const auto n = static_cast<std::size_t>(params.at("n"));
    std::vector<std::string> coords;
    for (std::size_t i = 0; i < n; ++i) coords.push_back("x" + std::to_string(i + 1));
    std::vector<std::vector<Expr>> fields(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) fields[i].push_back(Expr::number(i == k ? 1.0 : 0.0));
    sc.action = GAction(LieAlgebra::abelian(n), GroupModel::abelian(n), Domain(coords, {}, {}),
                        std::move(fields), {});
    return sc;
  }

  if (name == "example4_annulus") {
    const double r0 = params.at("r0"), r1 = params.at("r1");
    const double tmin = params.at("theta_min"), tmax = params.at("theta_max");
    if (!(r0 > 0.0 && r0 < r1)) throw Error(ErrorKind::BadParameter, "need 0 < r0 < r1");
    if (!(tmin < tmax)) throw Error(ErrorKind::BadParameter, "need theta_min < theta_max");
    Domain dom({"r", "theta"}, {{r0, r1}, {tmin, tmax}}, {});
    std::vector<std::vector<Expr>> fields{
        detail::parse_all({"cos(theta)", "-sin(theta)/r"}),
        detail::parse_all({"sin(theta)", "cos(theta)/r"}),
    };
    // Geometry-only parameters; the fields do not read them.
    sc.action = GAction(LieAlgebra::abelian(2), GroupModel::abelian(2), std::move(dom),
                        std::move(fields), {});
    // p is equivariant for w -> w - g, whose fundamental fields (with the
    // minus-sign convention) are d_x, d_y.
    sc.target = EquivariantTarget{
        [](const Vec& x) {
          Vec w(2);
          w << x[0] * std::cos(x[1]), x[0] * std::sin(x[1]);
          return w;
        },
        [](const GroupElement& g, const Vec& w) { return Vec(w - g.value.col(0)); }};
    return sc;
  }

  if (name == "example6_helicoid") {
    const double alpha = params.at("alpha");
    Domain dom({"x", "y", "z"}, {}, detail::parse_all({"x^2 + y^2"}),
               {{-2.0, 2.0}, {-2.0, 2.0}, {-2.0, 2.0}});
    std::vector<std::vector<Expr>> fields{
        detail::parse_all({"1", "0", "alpha*y*z/(x^2 + y^2)"}),
        detail::parse_all({"0", "1", "-alpha*x*z/(x^2 + y^2)"}),
    };
    sc.action = GAction(LieAlgebra::abelian(2), GroupModel::abelian(2), std::move(dom),
                        std::move(fields), {{"alpha", alpha}}, Expr::parse("atan2(y, x)"));
    if (alpha == 0.0) {
      sc.target = EquivariantTarget{
          [](const Vec& x) { return x; },
          [](const GroupElement& g, const Vec& w) {
            Vec out = w;
            out[0] -= g.value(0, 0);
            out[1] -= g.value(1, 0);
            return out;
          }};
    }
    return sc;
  }

  // affine_line. With zeta_X = d_x and zeta_Y = x d_x we have
  // [zeta_X, zeta_Y] = zeta_X, so [X, Y] = X; the dilation generator is
  // represented by -E_11 to reproduce that bracket.
  std::vector<double> c(8, 0.0);
  c[(0 * 2 + 1) * 2 + 0] = 1.0;   // [X, Y] = X
  c[(1 * 2 + 0) * 2 + 0] = -1.0;  // [Y, X] = -X
  Mat bx(2, 2), by(2, 2);
  bx << 0.0, 1.0, 0.0, 0.0;
  by << -1.0, 0.0, 0.0, 0.0;
  sc.action = GAction(LieAlgebra({"X", "Y"}, c), GroupModel::matrix({bx, by}),
                      Domain({"x"}, {}, {}), {detail::parse_all({"1"}), detail::parse_all({"x"})},
                      {});
  return sc;
}

/// z after the projection sweeps an unwrapped angle dtheta: u e^{-alpha dtheta}.
inline double oracle_z(double alpha, double u, double dtheta) { return u * std::exp(-alpha * dtheta); }

/// Predicted |z| of the lifted spiral after total angle theta: the distance to the
/// closed leaf at z = 0.
inline double closure_gap(double alpha, double u, double theta) {
  if (!(theta > 0.0)) throw Error(ErrorKind::BadParameter, "closure_gap needs theta > 0");
  return std::fabs(u) * std::exp(-alpha * theta);
}

enum class LeafClassTag { Zero, Circle, Level };

inline const char* to_string(LeafClassTag t) {
  switch (t) {
    case LeafClassTag::Zero: return "zero";
    case LeafClassTag::Circle: return "circle";
    case LeafClassTag::Level: return "level";
  }
  return "unknown";
}

/// Leaf-space coordinates of a point of G x M for the helicoid: the puncture
/// of the leaf's G-projection, and the orbit class in {0} u S^1_+ u S^1_-
/// (the circle coordinate is frac((log|u| + alpha theta0) / (2 pi alpha))).
/// For alpha = 0 the class is the level z itself.
struct LeafInvariant {
  Vec base;
  LeafClassTag tag = LeafClassTag::Zero;
  int sign = 0;
  double value = 0.0;
};

inline LeafInvariant leaf_invariant(double alpha, const LeafPoint& p) {
  if (p.g.value.rows() != 2 || p.x.size() != 3)
    throw Error(ErrorKind::Dimension, "helicoid leaf points are (R^2, R^3)");
  const double x0 = p.x[0], y0 = p.x[1], u = p.x[2];
  if (x0 == 0.0 && y0 == 0.0) throw Error(ErrorKind::OutsideDomain, "point lies on the z-axis");
  LeafInvariant inv;
  inv.base = Vec(2);
  inv.base << p.g.value(0, 0) - x0, p.g.value(1, 0) - y0;
  if (alpha == 0.0) {
    inv.tag = LeafClassTag::Level;
    inv.value = u;
    return inv;
  }
  if (u == 0.0) return inv;
  inv.tag = LeafClassTag::Circle;
  inv.sign = u > 0.0 ? 1 : -1;
  const double theta0 = std::atan2(y0, x0);
  const double s = (std::log(std::fabs(u)) + alpha * theta0) / (2.0 * std::numbers::pi * alpha);
  inv.value = s - std::floor(s);
  return inv;
}

/// Distance on R/Z.
inline double circle_distance(double a, double b) {
  double d = std::fabs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

inline bool same_invariant(const LeafInvariant& a, const LeafInvariant& b, double tol = 1e-6) {
  if (a.tag != b.tag || a.sign != b.sign) return false;
  if ((a.base - b.base).cwiseAbs().maxCoeff() > tol) return false;
  if (a.tag == LeafClassTag::Circle) return circle_distance(a.value, b.value) <= tol;
  if (a.tag == LeafClassTag::Level) return std::fabs(a.value - b.value) <= tol;
  return true;
}

/// Lifts `path` from x0 and returns the max deviation of g(t).f(x(t)) from
/// its initial value along the trace.
inline double universal_constancy_check(const Scenario& sc, const GPath& path, const Vec& x0,
                                        const IntegratorConfig& cfg = {}) {
  if (!sc.target)
    throw Error(ErrorKind::BadParameter,
                "scenario '" + sc.name + "' has no built-in equivariant target");
  LiftResult lift = lift_path(sc.action, path, x0, cfg);
  const EquivariantTarget& t = *sc.target;
  const Vec initial = t.act(lift.trace.front().g, t.map(lift.trace.front().x));
  double worst = 0.0;
  for (const LiftPoint& p : lift.trace)
    worst = std::max(worst, (t.act(p.g, t.map(p.x)) - initial).norm());
  return worst;
}

/// Group path whose lift from (g, x) in example4_annulus follows the straight
/// line from x to y in (r, theta) coordinates: c(t) = g + p(gamma(t)) - p(x),
/// as a chain of `chords` linear segments.
inline GPath example4_witness(const GroupElement& g, const Vec& x, const Vec& y,
                              std::size_t chords = 4096) {
  if (chords == 0) throw Error(ErrorKind::BadParameter, "chords must be positive");
  auto p = [](const Vec& q) {
    Vec w(2);
    w << q[0] * std::cos(q[1]), q[0] * std::sin(q[1]);
    return w;
  };
  std::vector<PathSegment> segs;
  Vec prev = p(x);
  for (std::size_t k = 1; k <= chords; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(chords);
    Vec next = p(Vec(x + u * (y - x)));
    segs.push_back({SegmentKind::Linear, next - prev, 1.0});
    prev = next;
  }
  return GPath(g, std::move(segs));
}

}  // namespace liecomp

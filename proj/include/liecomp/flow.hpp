#pragma once

// Flows of fundamental vector fields and pseudogroup words
// Fl_{t_n} o ... o Fl_{t_1}, integrated with an adaptive Dormand-Prince 5(4)
// scheme. A trajectory that runs into the excluded set (margin <= escape
// margin) is reported as Escaped, with the escape time bracketed by halving
// the trial step against the domain margin.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "liecomp/manifold.hpp"

namespace liecomp {

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 1e-2;
  std::size_t max_steps = 1'000'000;
  double escape_margin = 1e-9;

  void validate() const {
    if (!(rel_tol >= 1e-14) || !(abs_tol > 0.0) || !(initial_step > 0.0) || max_steps == 0 ||
        !(escape_margin > 0.0))
      throw Error(ErrorKind::BadParameter,
                  "integrator tolerances must be positive and rel_tol >= 1e-14");
  }
};

enum class FlowStatus { Complete, Escaped, StepLimit };

inline const char* to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::Complete: return "complete";
    case FlowStatus::Escaped: return "escaped";
    case FlowStatus::StepLimit: return "step_limit";
  }
  return "unknown";
}

struct TracePoint {
  double t = 0.0;
  Vec x;
};

struct FlowOutcome {
  FlowStatus status = FlowStatus::Complete;
  double escape_time = std::numeric_limits<double>::quiet_NaN();
  double escape_bracket = std::numeric_limits<double>::quiet_NaN();  // width of the bracket
  bool low_confidence = false;  // escape flagged by step collapse away from the margin
  int failed_stage = -1;        // run_word only
  Vec endpoint;
  std::vector<TracePoint> trace;
};

namespace detail {

/// |a - b| reduced to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a > std::numbers::pi) a -= kTwoPi;
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

struct SegmentRun {
  FlowStatus status = FlowStatus::Complete;
  double escape_local = std::numeric_limits<double>::quiet_NaN();
  double escape_bracket = std::numeric_limits<double>::quiet_NaN();
  bool low_confidence = false;
  Vec y;
  double winding = 0.0;
};

struct SegmentOptions {
  std::size_t min_samples = 1;
  bool track_angle = false;
  double time_tolerance = 1e-6;
  double collapse_step = 1e-14;
  // A step may cover at most this fraction of the estimated distance to the
  // boundary, so trajectories cannot jump across a thin excluded set.
  double boundary_fraction = 0.5;
};

/// Integrates y' = zeta_velocity(y) over local time [0, duration] from y0.
/// `on_accept(s, y)` is called after every accepted step.
/// `steps` is a budget shared across consecutive segments.
template <class Sink>
SegmentRun integrate_segment(const GAction& action, const Vec& velocity, double duration,
                             const Vec& y0, const IntegratorConfig& cfg,
                             const SegmentOptions& opt, std::size_t& steps, Sink&& on_accept) {
  // Dormand-Prince 5(4) tableau.
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                          b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

  SegmentRun run;
  run.y = y0;
  const double eps = cfg.escape_margin;
  if (!(action.margin(y0) > eps)) {
    run.status = FlowStatus::Escaped;
    run.escape_local = 0.0;
    run.escape_bracket = 0.0;
    return run;
  }
  if (duration <= 0.0 || velocity.isZero(0.0)) return run;

  auto rhs = [&](const Vec& y, Vec& out) { action.zeta_into(velocity, as_span(y), out); };

  const Eigen::Index n = y0.size();
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);
  try {
    rhs(run.y, k1);
  } catch (const Error&) {
    run.status = FlowStatus::Escaped;
    run.escape_local = 0.0;
    run.escape_bracket = 0.0;
    return run;
  }

  const double h_max = duration / static_cast<double>(std::max<std::size_t>(1, opt.min_samples));
  double h = std::min({cfg.initial_step, h_max, duration});
  double s = 0.0;
  double boundary = std::numeric_limits<double>::infinity();  // earliest local time seen outside
  double theta = opt.track_angle ? action.angle(as_span(run.y)) : 0.0;

  auto escaped = [&](bool low) {
    run.status = FlowStatus::Escaped;
    double hi = std::isfinite(boundary) ? boundary : s;
    run.escape_local = 0.5 * (s + hi);
    run.escape_bracket = hi - s;
    run.low_confidence = low;
    return run;
  };

  while (s < duration) {
    if (steps >= cfg.max_steps) {
      run.status = FlowStatus::StepLimit;
      return run;
    }
    ++steps;
    const double remaining = duration - s;
    h = std::min(h, h_max);
    double speed = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (action.domain().constrained()[static_cast<std::size_t>(i)]) speed += k1[i] * k1[i];
    speed = std::sqrt(speed);
    double cap = std::numeric_limits<double>::infinity();
    if (speed > 0.0)
      cap = opt.boundary_fraction * action.domain().distance_estimate(as_span(run.y)) / speed;
    double h_try = std::min(h, cap);
    bool last = false;
    if (h_try >= remaining) {
      h_try = remaining;
      last = true;
    }

    bool outside = false;
    try {
      tmp = run.y + h_try * a21 * k1;
      rhs(tmp, k2);
      tmp = run.y + h_try * (a31 * k1 + a32 * k2);
      rhs(tmp, k3);
      tmp = run.y + h_try * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(tmp, k4);
      tmp = run.y + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(tmp, k5);
      tmp = run.y + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(tmp, k6);
      y_new = run.y + h_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      outside = !(action.margin(y_new) > eps);
      if (!outside) rhs(y_new, k7);
    } catch (const Error&) {
      outside = true;
    }

    if (outside) {
      boundary = std::min(boundary, s + h_try);
      if (boundary - s < opt.time_tolerance && action.margin(run.y) < 10.0 * eps)
        return escaped(false);
      h = 0.5 * h_try;
      if (h < opt.collapse_step) return escaped(action.margin(run.y) >= 10.0 * eps);
      continue;
    }

    err = h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::fabs(run.y[i]), std::fabs(y_new[i]));
      norm = std::max(norm, std::fabs(err[i]) / sc);
    }
    if (!std::isfinite(norm)) norm = 1e10;

    double theta_new = theta;
    bool rotated_too_far = false;
    if (opt.track_angle) {
      theta_new = action.angle(as_span(y_new));
      rotated_too_far = std::fabs(wrap_angle(theta_new - theta)) >= 0.5 * std::numbers::pi;
    }

    if (norm > 1.0 || rotated_too_far) {
      double factor = rotated_too_far ? 0.5 : std::max(0.2, 0.9 * std::pow(norm, -0.2));
      h = h_try * factor;
      if (h < opt.collapse_step) return escaped(action.margin(run.y) >= 10.0 * eps);
      continue;
    }

    s = last ? duration : s + h_try;
    run.y = y_new;
    k1 = k7;
    if (opt.track_angle) {
      run.winding += wrap_angle(theta_new - theta);
      theta = theta_new;
    }
    on_accept(s, run.y);

    if (std::isfinite(boundary) && boundary - s < opt.time_tolerance) {
      if (action.margin(run.y) < 10.0 * eps) return escaped(false);
      // Bracket closed while still well inside M: the rejected trial was an
      // overshoot, not a crossing.
      boundary = std::numeric_limits<double>::infinity();
    }

    double grow = norm == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(norm, -0.2));
    // A capped step says nothing about the controller's own step size.
    if (!(h_try < h)) h = h_try * grow;
    if (std::isfinite(boundary)) h = std::min(h, 0.5 * (boundary - s));
  }
  return run;
}

inline void require_in_domain(const GAction& action, const Vec& x0) {
  if (static_cast<std::size_t>(x0.size()) != action.dim_manifold())
    throw Error(ErrorKind::Dimension, "point has wrong dimension");
  if (!action.contains(x0)) throw Error(ErrorKind::OutsideDomain, "start point is outside the domain");
}

}  // namespace detail

/// Fl_t^{zeta_X}(x0). Trace times are signed; at least 64 samples.
inline FlowOutcome flow(const GAction& action, const Vec& x, double t, const Vec& x0,
                        const IntegratorConfig& cfg = {}) {
  cfg.validate();
  detail::require_in_domain(action, x0);
  if (static_cast<std::size_t>(x.size()) != action.dim_algebra())
    throw Error(ErrorKind::Dimension, "algebra vector has wrong dimension");
  const double sign = t < 0.0 ? -1.0 : 1.0;
  FlowOutcome out;
  out.trace.push_back({0.0, x0});
  std::size_t steps = 0;
  detail::SegmentOptions opt;
  opt.min_samples = 64;
  auto run = detail::integrate_segment(action, Vec(sign * x), std::fabs(t), x0, cfg, opt, steps,
                                       [&](double s, const Vec& y) {
                                         out.trace.push_back({sign * s, y});
                                       });
  out.status = run.status;
  out.endpoint = run.y;
  out.low_confidence = run.low_confidence;
  if (run.status == FlowStatus::Escaped) {
    out.escape_time = sign * run.escape_local;
    out.escape_bracket = run.escape_bracket;
    out.failed_stage = 0;
  }
  return out;
}

struct WordStage {
  Vec x;
  double t = 0.0;
};
using FlowWord = std::vector<WordStage>;

/// Sequential composition of flows. Trace times are cumulative |t| across
/// stages; on escape `failed_stage` and the global escape time are reported.
inline FlowOutcome run_word(const GAction& action, const FlowWord& word, const Vec& x0,
                            const IntegratorConfig& cfg = {}) {
  cfg.validate();
  detail::require_in_domain(action, x0);
  FlowOutcome out;
  out.trace.push_back({0.0, x0});
  Vec y = x0;
  double elapsed = 0.0;
  std::size_t steps = 0;
  const std::size_t per_stage =
      word.empty() ? 1 : std::max<std::size_t>(1, (64 + word.size() - 1) / word.size());
  for (std::size_t i = 0; i < word.size(); ++i) {
    const WordStage& st = word[i];
    if (static_cast<std::size_t>(st.x.size()) != action.dim_algebra())
      throw Error(ErrorKind::Dimension, "algebra vector has wrong dimension");
    const double sign = st.t < 0.0 ? -1.0 : 1.0;
    detail::SegmentOptions opt;
    opt.min_samples = per_stage;
    auto run = detail::integrate_segment(action, Vec(sign * st.x), std::fabs(st.t), y, cfg, opt,
                                         steps, [&](double s, const Vec& p) {
                                           out.trace.push_back({elapsed + s, p});
                                         });
    y = run.y;
    if (run.status != FlowStatus::Complete) {
      out.status = run.status;
      out.endpoint = y;
      out.failed_stage = static_cast<int>(i);
      out.low_confidence = run.low_confidence;
      if (run.status == FlowStatus::Escaped) {
        out.escape_time = elapsed + run.escape_local;
        out.escape_bracket = run.escape_bracket;
      }
      return out;
    }
    elapsed += std::fabs(st.t);
  }
  out.endpoint = y;
  return out;
}

}  // namespace liecomp

#pragma once

// Lifting curves in G through the graph foliation on G x M.
//
// A curve c in G with left-logarithmic derivative X(t) lifts from (c(0), x0)
// to the curve (c(t), y(t)) with y' = zeta_{X(t)}(y), which stays on the leaf
// through (c(0), x0). The group component is advanced in closed form per
// segment; only the M component is integrated.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "liecomp/flow.hpp"

namespace liecomp {

enum class SegmentKind { Linear, Exp };

/// One piece of a group path. `displacement` is the total 𝔤-displacement of
/// the piece: a Linear piece moves the abelian coordinates by it, an Exp piece
/// right-multiplies by exp(displacement). `duration` is a relative clock weight.
struct PathSegment {
  SegmentKind kind = SegmentKind::Linear;
  Vec displacement;
  double duration = 1.0;
};

/// Piecewise curve c : [0, 1] -> G, normalized to unit total time.
class GPath {
 public:
  GPath() = default;

  GPath(GroupElement start, std::vector<PathSegment> segments)
      : start_(std::move(start)), segments_(std::move(segments)) {
    double total = 0.0;
    for (const PathSegment& s : segments_) {
      if (!(s.duration > 0.0) || !std::isfinite(s.duration))
        throw Error(ErrorKind::InvalidPath, "segment durations must be positive");
      if (s.displacement.size() != segments_.front().displacement.size())
        throw Error(ErrorKind::InvalidPath, "segments have differing algebra dimensions");
      if (!s.displacement.allFinite())
        throw Error(ErrorKind::InvalidPath, "segment displacement is not finite");
      total += s.duration;
    }
    double acc = 0.0;
    for (const PathSegment& s : segments_) {
      acc += s.duration;
      breaks_.push_back(acc / total);
    }
    if (!segments_.empty()) breaks_.back() = 1.0;
  }

  const GroupElement& start() const { return start_; }
  const std::vector<PathSegment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }

  /// Normalized duration of segment i.
  double weight(std::size_t i) const { return breaks_[i + 1] - breaks_[i]; }
  double segment_start(std::size_t i) const { return breaks_[i]; }

  /// Index of the segment containing t; boundaries belong to the right piece.
  std::size_t segment_at(double t) const {
    if (segments_.empty()) return 0;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    auto idx = static_cast<std::size_t>(std::distance(breaks_.begin(), it));
    idx = idx == 0 ? 0 : idx - 1;
    return std::min(idx, segments_.size() - 1);
  }

  void validate(const GroupModel& group) const {
    group.coordinates(start_);  // shape check
    for (const PathSegment& s : segments_) {
      if (static_cast<std::size_t>(s.displacement.size()) != group.dim())
        throw Error(ErrorKind::InvalidPath, "segment dimension does not match the group");
      if (s.kind == SegmentKind::Linear && group.kind() != GroupKind::Abelian)
        throw Error(ErrorKind::InvalidPath, "linear segments require the abelian group model");
    }
  }

  /// Group element reached after fraction `u` of segment i, from `base`.
  static GroupElement advance(const GroupModel& group, const GroupElement& base,
                              const PathSegment& seg, double u) {
    if (group.kind() == GroupKind::Abelian) return {base.value + u * seg.displacement};
    return group.mul(base, group.exp_segment(seg.displacement, u));
  }

  GroupElement evaluate(const GroupModel& group, double t) const {
    validate(group);
    GroupElement g = start_;
    if (segments_.empty()) return g;
    t = std::clamp(t, 0.0, 1.0);
    const std::size_t k = segment_at(t);
    for (std::size_t i = 0; i < k; ++i) g = advance(group, g, segments_[i], 1.0);
    return advance(group, g, segments_[k], (t - breaks_[k]) / weight(k));
  }

  GroupElement end(const GroupModel& group) const { return evaluate(group, 1.0); }

  /// Same curve traversed backwards.
  GPath reversed(const GroupModel& group) const {
    std::vector<PathSegment> segs(segments_.rbegin(), segments_.rend());
    for (PathSegment& s : segs) s.displacement = -s.displacement;
    return GPath(end(group), std::move(segs));
  }

  /// mu_g o c.
  GPath left_translated(const GroupModel& group, const GroupElement& g) const {
    return GPath(group.mul(g, start_), segments_);
  }

  /// This path followed by `next`, which must start where this one ends.
  GPath concat(const GroupModel& group, const GPath& next) const {
    if (group.distance(end(group), next.start()) > 1e-10)
      throw Error(ErrorKind::InvalidPath, "paths do not join");
    std::vector<PathSegment> segs = segments_;
    segs.insert(segs.end(), next.segments_.begin(), next.segments_.end());
    return GPath(start_, std::move(segs));
  }

 private:
  GroupElement start_;
  std::vector<PathSegment> segments_;
  std::vector<double> breaks_{0.0};
};

/// Left-logarithmic derivative of `path` at normalized time t: piecewise
/// constant, displacement / normalized duration. Empty paths give an empty
/// vector.
inline Vec left_log_derivative(const GPath& path, double t) {
  if (path.empty()) return Vec();
  const std::size_t i = path.segment_at(t);
  return path.segments()[i].displacement / path.weight(i);
}

/// Linear chords on the circle of `radius` about `center` in the first two
/// group coordinates, sweeping `sweep` radians from angle `phase`.
/// Chord count is ceil(|sweep| / 2pi * chords_per_turn).
inline std::vector<PathSegment> arc_chords(const Vec& center, double radius, double phase,
                                           double sweep, std::size_t chords_per_turn,
                                           double duration = 1.0) {
  if (center.size() < 2) throw Error(ErrorKind::InvalidPath, "arcs need two group coordinates");
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidPath, "arc radius must be positive");
  if (chords_per_turn == 0) throw Error(ErrorKind::BadParameter, "chords per turn must be positive");
  const auto chords = static_cast<std::size_t>(std::max(
      1.0, std::ceil(std::fabs(sweep) / (2.0 * std::numbers::pi) *
                     static_cast<double>(chords_per_turn) - 1e-9)));
  std::vector<PathSegment> out;
  out.reserve(chords);
  auto point = [&](std::size_t k) {
    double a = phase + sweep * static_cast<double>(k) / static_cast<double>(chords);
    Vec p = Vec::Zero(center.size());
    p[0] = radius * std::cos(a);
    p[1] = radius * std::sin(a);
    return p;
  };
  Vec prev = point(0);
  for (std::size_t k = 1; k <= chords; ++k) {
    Vec next = point(k);
    out.push_back({SegmentKind::Linear, next - prev, duration / static_cast<double>(chords)});
    prev = next;
  }
  return out;
}

struct LiftPoint {
  double t = 0.0;
  GroupElement g;
  Vec x;
};

struct LiftResult {
  FlowStatus status = FlowStatus::Complete;
  double escape_time = std::numeric_limits<double>::quiet_NaN();
  double escape_bracket = std::numeric_limits<double>::quiet_NaN();
  bool low_confidence = false;
  GroupElement endpoint_g;
  Vec endpoint_m;
  std::vector<LiftPoint> trace;
  std::optional<double> winding;  // unwrapped change of the action's angle observable
};

/// Lifts `path` from (path.start(), x0).
inline LiftResult lift_path(const GAction& action, const GPath& path, const Vec& x0,
                            const IntegratorConfig& cfg = {}) {
  cfg.validate();
  const GroupModel& group = action.group();
  path.validate(group);
  detail::require_in_domain(action, x0);

  LiftResult out;
  out.trace.push_back({0.0, path.start(), x0});
  const bool track = action.has_angle();
  double winding = 0.0;

  GroupElement g = path.start();
  Vec y = x0;
  std::size_t steps = 0;
  const std::size_t nseg = path.segments().size();
  detail::SegmentOptions opt;
  opt.track_angle = track;
  opt.min_samples = nseg == 0 ? 1 : std::max<std::size_t>(1, (64 + nseg - 1) / nseg);

  for (std::size_t i = 0; i < nseg; ++i) {
    const PathSegment& seg = path.segments()[i];
    const double w = path.weight(i);
    const double t0 = path.segment_start(i);
    double last_s = 0.0;
    auto run = detail::integrate_segment(
        action, Vec(seg.displacement / w), w, y, cfg, opt, steps, [&](double s, const Vec& p) {
          last_s = s;
          out.trace.push_back({t0 + s, GPath::advance(group, g, seg, s / w), p});
        });
    winding += run.winding;
    y = run.y;
    if (run.status != FlowStatus::Complete) {
      out.status = run.status;
      out.low_confidence = run.low_confidence;
      if (run.status == FlowStatus::Escaped) {
        out.escape_time = t0 + run.escape_local;
        out.escape_bracket = run.escape_bracket;
      }
      out.endpoint_g = GPath::advance(group, g, seg, last_s / w);
      out.endpoint_m = y;
      if (track) out.winding = winding;
      return out;
    }
    g = GPath::advance(group, g, seg, 1.0);
    // Pin the segment's last trace point to the exact group endpoint.
    if (seg.displacement.isZero(0.0))
      out.trace.push_back({t0 + w, g, y});
    else
      out.trace.back().g = g;
  }
  out.endpoint_g = g;
  out.endpoint_m = y;
  if (track) out.winding = winding;
  return out;
}

struct GammaImage {
  Vec probe;
  FlowStatus status = FlowStatus::Complete;
  std::optional<Vec> image;
  double escape_time = std::numeric_limits<double>::quiet_NaN();
};

/// Pointwise values of the pseudogroup element gamma(c): each probe is lifted
/// along the same path independently.
inline std::vector<GammaImage> gamma(const GAction& action, const GPath& path,
                                     const std::vector<Vec>& probes,
                                     const IntegratorConfig& cfg = {}) {
  std::vector<GammaImage> out;
  out.reserve(probes.size());
  for (const Vec& p : probes) {
    LiftResult r = lift_path(action, path, p, cfg);
    GammaImage img;
    img.probe = p;
    img.status = r.status;
    if (r.status == FlowStatus::Complete) {
      img.image = r.endpoint_m;
    } else {
      img.escape_time = r.escape_time;
    }
    out.push_back(std::move(img));
  }
  return out;
}

/// Lifts `path` and its left translate by g from the same x0; leaves map to
/// leaves under left translation, so both M endpoints agree and the group
/// endpoints differ by g.
inline double equivariance_check(const GAction& action, const GPath& path, const Vec& x0,
                                 const GroupElement& g, const IntegratorConfig& cfg = {}) {
  const GroupModel& group = action.group();
  LiftResult base = lift_path(action, path, x0, cfg);
  LiftResult moved = lift_path(action, path.left_translated(group, g), x0, cfg);
  if (base.status != FlowStatus::Complete || moved.status != FlowStatus::Complete)
    throw Error(ErrorKind::Escape, "equivariance check needs a complete lift");
  return (base.endpoint_m - moved.endpoint_m).norm() +
         group.distance(group.mul(g, base.endpoint_g), moved.endpoint_g);
}

}  // namespace liecomp

#pragma once

// Data identifying the G-completion of a g-manifold: isotropy subalgebras,
// witnessed leaf identifications, and holonomy elements of H built from
// loops in an orbit.
//
// Leaf equivalence is only ever established by a witness path. A witness that
// fails to identify two points says nothing about other paths, so no verdict
// ever claims two points lie on different leaves.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "liecomp/lift.hpp"

namespace liecomp {

struct IsotropyReport {
  Vec point;
  std::vector<double> singular_values;  // length d, nonincreasing, zero-padded when d > n
  Mat nullspace;                        // d x dim(h), orthonormal columns
  std::size_t orbit_dim = 0;
};

/// Evaluation matrix with rows zeta_{X_i}(x).
inline Mat evaluation_matrix(const GAction& action, const Vec& x) {
  const auto d = static_cast<Eigen::Index>(action.dim_algebra());
  const auto n = static_cast<Eigen::Index>(action.dim_manifold());
  Mat a(d, n);
  for (Eigen::Index i = 0; i < d; ++i)
    a.row(i) = action.field(static_cast<std::size_t>(i), as_span(x)).transpose();
  return a;
}

/// Isotropy subalgebra h = ker(X -> zeta_X(x)) from the SVD of the
/// evaluation matrix; directions with sigma < tol * sigma_max are null.
inline IsotropyReport isotropy(const GAction& action, const Vec& x, double tol = 1e-8) {
  detail::require_in_domain(action, x);
  const Mat a = evaluation_matrix(action, x);
  const Eigen::Index d = a.rows();
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU);
  const Vec sv = svd.singularValues();

  IsotropyReport rep;
  rep.point = x;
  rep.singular_values.assign(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index i = 0; i < sv.size(); ++i) rep.singular_values[static_cast<std::size_t>(i)] = sv[i];

  double sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  if (sigma_max < tol) sigma_max = 1.0;
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index i = 0; i < d; ++i)
    if (rep.singular_values[static_cast<std::size_t>(i)] < tol * sigma_max) null_cols.push_back(i);

  rep.orbit_dim = static_cast<std::size_t>(d) - null_cols.size();
  rep.nullspace.resize(d, static_cast<Eigen::Index>(null_cols.size()));
  for (std::size_t c = 0; c < null_cols.size(); ++c) {
    Vec v = svd.matrixU().col(null_cols[c]);
    // Deterministic sign: first significant component positive.
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::fabs(v[i]) > 1e-12) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    rep.nullspace.col(static_cast<Eigen::Index>(c)) = v;
  }
  return rep;
}

inline std::size_t orbit_dim(const GAction& action, const Vec& x, double tol = 1e-8) {
  return isotropy(action, x, tol).orbit_dim;
}

struct LeafPoint {
  GroupElement g;
  Vec x;
};

enum class LeafVerdict { Identified, NotIdentifiedByWitness, Escaped };

inline const char* to_string(LeafVerdict v) {
  switch (v) {
    case LeafVerdict::Identified: return "identified";
    case LeafVerdict::NotIdentifiedByWitness: return "not_identified_by_witness";
    case LeafVerdict::Escaped: return "escaped";
  }
  return "unknown";
}

struct LeafRecord {
  LeafPoint a;
  LeafPoint b;
  GPath witness;
  LeafVerdict verdict = LeafVerdict::NotIdentifiedByWitness;
  double residual = std::numeric_limits<double>::infinity();
  Vec lifted_endpoint;
};

/// Lifts `witness` from a and compares the M endpoint with b.x. The witness
/// must run from a.g to b.g in G.
inline LeafRecord same_leaf(const GAction& action, const LeafPoint& a, const LeafPoint& b,
                            const GPath& witness, const IntegratorConfig& cfg = {},
                            double tol = 1e-6) {
  const GroupModel& group = action.group();
  witness.validate(group);
  if (group.distance(witness.start(), a.g) > 1e-10)
    throw Error(ErrorKind::MalformedWitness, "witness does not start at the first leaf point");
  if (group.distance(witness.end(group), b.g) > 1e-10)
    throw Error(ErrorKind::MalformedWitness, "witness does not end at the second leaf point");
  detail::require_in_domain(action, b.x);

  LeafRecord rec{a, b, witness, LeafVerdict::NotIdentifiedByWitness,
                 std::numeric_limits<double>::infinity(), Vec()};
  LiftResult lift = lift_path(action, witness, a.x, cfg);
  rec.lifted_endpoint = lift.endpoint_m;
  if (lift.status != FlowStatus::Complete) {
    rec.verdict = LeafVerdict::Escaped;
    return rec;
  }
  rec.residual = (lift.endpoint_m - b.x).norm();
  rec.verdict = rec.residual < tol ? LeafVerdict::Identified : LeafVerdict::NotIdentifiedByWitness;
  return rec;
}

namespace detail {

/// Walks the chord a -> b in steps of half the estimated boundary distance;
/// false if the chord comes within `gap` of leaving the domain.
inline bool chord_in_domain(const GAction& action, const Vec& a, const Vec& b, double gap = 1e-9) {
  const double len = (b - a).norm();
  double t = 0.0;
  while (true) {
    Vec p = a + t * (b - a);
    if (!action.contains(p)) return false;
    if (len == 0.0 || t >= 1.0) return true;
    const double d = action.domain().distance_estimate(as_span(p));
    if (d < gap) return false;
    t = std::min(1.0, t + 0.5 * d / len);
  }
}

}  // namespace detail

struct LoopOptions {
  bool allow_open = false;            // accept curves whose ends differ
  std::size_t subdivisions = 64;      // group segments per polyline piece
  double residual_tol = 1e-8;         // least-squares residual, relative to |c'|
  double max_condition = 1e6;
};

struct HolonomyElement {
  GroupElement h;
  std::vector<Vec> loop;
  GPath group_curve;    // g(t), with g(0) = e and g(1) = h
  double round_trip_residual = std::numeric_limits<double>::infinity();
  // H cannot be told apart from its closure numerically; every report carries this.
  static constexpr const char* closure_caveat =
      "sampled element only: H may be non-closed and is indistinguishable from its closure";
};

/// Turns a polyline loop in one orbit into a group element of H: decompose
/// c'(t) = sum_k f_k(t) zeta_{frame_k}(c(t)), integrate g' = g . sum_k f_k frame_k
/// from e, and return h = g(1). The resulting group curve is re-lifted from x0
/// to check that it reproduces the curve's endpoint.
inline HolonomyElement loop_to_group(const GAction& action, const std::vector<Vec>& frame,
                                     const std::vector<Vec>& loop, const Vec& x0,
                                     const IntegratorConfig& cfg = {},
                                     const LoopOptions& opt = {}) {
  const GroupModel& group = action.group();
  const std::size_t d = action.dim_algebra();
  const auto n = static_cast<Eigen::Index>(action.dim_manifold());
  if (loop.empty()) throw Error(ErrorKind::InvalidPath, "loop needs at least one point");
  if (frame.empty()) throw Error(ErrorKind::BadParameter, "frame must not be empty");
  if (opt.subdivisions == 0) throw Error(ErrorKind::BadParameter, "subdivisions must be positive");
  for (const Vec& f : frame)
    if (static_cast<std::size_t>(f.size()) != d)
      throw Error(ErrorKind::Dimension, "frame vector has wrong dimension");
  for (const Vec& p : loop)
    if (p.size() != n) throw Error(ErrorKind::Dimension, "loop point has wrong dimension");
  detail::require_in_domain(action, x0);
  if ((loop.front() - x0).norm() > 1e-12)
    throw Error(ErrorKind::InvalidPath, "loop must start at x0");
  if (!opt.allow_open && (loop.back() - x0).norm() > 1e-12)
    throw Error(ErrorKind::InvalidPath, "loop is not closed");
  const std::size_t rank = orbit_dim(action, x0);
  if (frame.size() != rank)
    throw Error(ErrorKind::IllConditioned, "frame size " + std::to_string(frame.size()) +
                                               " differs from the orbit dimension " +
                                               std::to_string(rank));

  // 5-point Gauss-Legendre on [0, 1].
  static constexpr std::array<double, 5> kNodes{
      0.046910077030668004, 0.23076534494715845, 0.5, 0.76923465505284155, 0.953089922969332};
  static constexpr std::array<double, 5> kWeights{
      0.11846344252809454, 0.23931433524968324, 0.28444444444444444, 0.23931433524968324,
      0.11846344252809454};

  const auto k = static_cast<Eigen::Index>(frame.size());
  auto algebra_velocity = [&](const Vec& c, const Vec& cdot) -> Vec {
    if (!action.contains(c)) throw Error(ErrorKind::OutsideDomain, "loop leaves the domain");
    Mat basis(n, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      Vec z;
      action.zeta_into(frame[static_cast<std::size_t>(j)], as_span(c), z);
      basis.col(j) = z;
    }
    Eigen::JacobiSVD<Mat> svd(basis, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec sv = svd.singularValues();
    if (!(sv[k - 1] > 0.0) || sv[0] / sv[k - 1] > opt.max_condition)
      throw Error(ErrorKind::IllConditioned, "frame fields are not independent along the loop");
    Vec f = svd.solve(cdot);
    double resid = (basis * f - cdot).norm();
    if (resid > opt.residual_tol * cdot.norm() + 1e-15)
      throw Error(ErrorKind::LeavesOrbit, "loop velocity is not tangent to the orbit");
    Vec x = Vec::Zero(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < k; ++j) x += f[j] * frame[static_cast<std::size_t>(j)];
    return x;
  };

  std::vector<PathSegment> segments;
  for (std::size_t p = 0; p + 1 < loop.size(); ++p) {
    const Vec cdot = loop[p + 1] - loop[p];
    if (cdot.isZero(0.0)) continue;
    if (!detail::chord_in_domain(action, loop[p], loop[p + 1]))
      throw Error(ErrorKind::OutsideDomain, "loop piece " + std::to_string(p) + " leaves the domain");
    const double du = 1.0 / static_cast<double>(opt.subdivisions);
    for (std::size_t s = 0; s < opt.subdivisions; ++s) {
      Vec omega = Vec::Zero(static_cast<Eigen::Index>(d));
      for (std::size_t q = 0; q < kNodes.size(); ++q) {
        double u = (static_cast<double>(s) + kNodes[q]) * du;
        omega += kWeights[q] * du * algebra_velocity(loop[p] + u * cdot, cdot);
      }
      segments.push_back({SegmentKind::Exp, omega, du});
    }
  }

  HolonomyElement out;
  out.loop = loop;
  out.group_curve = GPath(group.identity(), segments);
  out.h = out.group_curve.end(group);
  LiftResult relift = lift_path(action, out.group_curve, x0, cfg);
  if (relift.status == FlowStatus::Complete)
    out.round_trip_residual = (relift.endpoint_m - loop.back()).norm();
  return out;
}

}  // namespace liecomp

#pragma once

// The g-manifold M: a single coordinate patch with excluded sets, and the
// action map X -> zeta_X into vector fields on it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "liecomp/algebra.hpp"
#include "liecomp/expr.hpp"
#include "liecomp/rng.hpp"

namespace liecomp {

/// Open interval bound for one coordinate; infinite ends are allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// x is in M iff every exclusion margin m_j(x) > 0 and x lies inside the box.
class Domain {
 public:
  Domain() = default;

  Domain(std::vector<std::string> coords, std::vector<Interval> box, std::vector<Expr> exclusions,
         std::vector<Interval> sample_box = {})
      : coords_(std::move(coords)),
        box_(std::move(box)),
        exclusions_(std::move(exclusions)),
        sample_box_(std::move(sample_box)) {
    if (coords_.empty()) throw Error(ErrorKind::Validation, "manifold must have dimension >= 1");
    if (box_.empty()) box_.assign(coords_.size(), Interval{});
    if (box_.size() != coords_.size())
      throw Error(ErrorKind::Dimension, "box needs one interval per coordinate");
    for (const Interval& b : box_)
      if (!(b.lo < b.hi)) throw Error(ErrorKind::Validation, "box interval is empty");
    if (sample_box_.empty()) {
      for (const Interval& b : box_)
        sample_box_.push_back({std::isfinite(b.lo) ? b.lo : -2.0, std::isfinite(b.hi) ? b.hi : 2.0});
    }
    if (sample_box_.size() != coords_.size())
      throw Error(ErrorKind::Dimension, "sample box needs one interval per coordinate");
    for (const Interval& b : sample_box_)
      if (!(b.lo < b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi))
        throw Error(ErrorKind::Validation, "sample box must be finite and non-empty");
    constrained_.assign(coords_.size(), true);  // refined by bind()
  }

  std::size_t dim() const { return coords_.size(); }
  const std::vector<std::string>& coords() const { return coords_; }
  const std::vector<Interval>& box() const { return box_; }
  const std::vector<Expr>& exclusions() const { return exclusions_; }
  const std::vector<Interval>& sample_box() const { return sample_box_; }

  void bind(const Env& params) {
    compiled_.clear();
    gradients_.clear();
    constrained_.assign(coords_.size(), false);
    for (std::size_t i = 0; i < box_.size(); ++i)
      constrained_[i] = std::isfinite(box_[i].lo) || std::isfinite(box_[i].hi);
    for (const Expr& e : exclusions_) {
      compiled_.emplace_back(e, coords_, params);
      std::vector<CompiledExpr> grad;
      for (std::size_t i = 0; i < coords_.size(); ++i) {
        Expr d = e.diff(coords_[i]);
        if (!d.is_zero()) constrained_[i] = true;
        grad.emplace_back(d, coords_, params);
      }
      gradients_.push_back(std::move(grad));
    }
  }

  /// Coordinates that some box bound or exclusion depends on. Motion in the
  /// other coordinates cannot bring a point closer to the boundary.
  const std::vector<bool>& constrained() const { return constrained_; }

  /// min over exclusion margins and box distances; -inf where a margin
  /// cannot be evaluated.
  double margin(std::span<const double> x) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < box_.size(); ++i) {
      if (!std::isfinite(x[i])) return -std::numeric_limits<double>::infinity();
      m = std::min({m, x[i] - box_[i].lo, box_[i].hi - x[i]});
    }
    for (const CompiledExpr& c : compiled_) {
      try {
        m = std::min(m, c.eval(x));
      } catch (const Error&) {
        return -std::numeric_limits<double>::infinity();
      }
    }
    return m;
  }

  bool contains(std::span<const double> x) const { return x.size() == dim() && margin(x) > 0.0; }

  /// First-order estimate of the distance to the boundary: box distances and
  /// m_j / |grad m_j|. Zero where a margin cannot be evaluated.
  double distance_estimate(std::span<const double> x) const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < box_.size(); ++i) d = std::min({d, x[i] - box_[i].lo, box_[i].hi - x[i]});
    for (std::size_t j = 0; j < compiled_.size(); ++j) {
      try {
        double m = compiled_[j].eval(x);
        double g2 = 0.0;
        for (const CompiledExpr& g : gradients_[j]) {
          double v = g.eval(x);
          g2 += v * v;
        }
        if (g2 > 0.0) d = std::min(d, m / std::sqrt(g2));
      } catch (const Error&) {
        return 0.0;
      }
    }
    return std::max(d, 0.0);
  }

 private:
  std::vector<std::string> coords_;
  std::vector<Interval> box_;
  std::vector<Expr> exclusions_;
  std::vector<Interval> sample_box_;
  std::vector<CompiledExpr> compiled_;
  std::vector<bool> constrained_;
  std::vector<std::vector<CompiledExpr>> gradients_;
};

inline std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// A g-manifold: d vector fields on the domain, one per basis element of g.
class GAction {
 public:
  GAction() = default;

  GAction(LieAlgebra algebra, GroupModel group, Domain domain,
          std::vector<std::vector<Expr>> fields, Env params, std::optional<Expr> angle = {})
      : algebra_(std::move(algebra)),
        group_(std::move(group)),
        domain_(std::move(domain)),
        fields_(std::move(fields)),
        params_(std::move(params)),
        angle_(std::move(angle)) {
    const std::size_t d = algebra_.dim();
    const std::size_t n = domain_.dim();
    if (group_.dim() != d) throw Error(ErrorKind::Dimension, "group and algebra dimensions differ");
    group_.validate(algebra_);
    if (fields_.size() != d)
      throw Error(ErrorKind::Dimension, "need one vector field per basis element");
    std::set<std::string> allowed(domain_.coords().begin(), domain_.coords().end());
    for (const auto& [name, value] : params_) {
      if (allowed.count(name))
        throw Error(ErrorKind::Validation, "parameter '" + name + "' shadows a coordinate");
      if (!std::isfinite(value))
        throw Error(ErrorKind::Validation, "parameter '" + name + "' is not finite");
      allowed.insert(name);
    }
    auto check_names = [&](const Expr& e) {
      for (const std::string& name : e.free_names())
        if (!allowed.count(name))
          throw Error(ErrorKind::Validation, "unknown name '" + name + "' in expression '" +
                                                 e.to_string() + "'");
    };
    for (const auto& f : fields_) {
      if (f.size() != n)
        throw Error(ErrorKind::Dimension, "vector field needs one component per coordinate");
      for (const Expr& e : f) check_names(e);
    }
    for (const Expr& e : domain_.exclusions()) check_names(e);
    if (angle_) check_names(*angle_);

    domain_.bind(params_);
    const auto& coords = domain_.coords();
    compiled_.resize(d);
    partials_.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t k = 0; k < n; ++k) {
        compiled_[i].emplace_back(fields_[i][k], coords, params_);
        for (std::size_t j = 0; j < n; ++j)
          partials_[i].emplace_back(fields_[i][k].diff(coords[j]), coords, params_);
      }
    }
    if (angle_) compiled_angle_ = CompiledExpr(*angle_, coords, params_);
  }

  const LieAlgebra& algebra() const { return algebra_; }
  const GroupModel& group() const { return group_; }
  const Domain& domain() const { return domain_; }
  const std::vector<std::vector<Expr>>& fields() const { return fields_; }
  const Env& params() const { return params_; }
  std::size_t dim_algebra() const { return algebra_.dim(); }
  std::size_t dim_manifold() const { return domain_.dim(); }
  bool has_angle() const { return angle_.has_value(); }
  const std::optional<Expr>& angle_expr() const { return angle_; }

  double margin(std::span<const double> p) const { return domain_.margin(p); }
  double margin(const Vec& p) const { return domain_.margin(as_span(p)); }
  bool contains(const Vec& p) const {
    return static_cast<std::size_t>(p.size()) == dim_manifold() && margin(p) > 0.0;
  }

  /// Scenario-supplied angle observable used for winding diagnostics.
  double angle(std::span<const double> p) const { return compiled_angle_.eval(p); }

  /// zeta_{X_i}(p) without the domain check.
  Vec field(std::size_t i, std::span<const double> p) const {
    const std::size_t n = dim_manifold();
    Vec out(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) out[static_cast<Eigen::Index>(k)] = compiled_[i][k].eval(p);
    return out;
  }

  /// sum_i X_i zeta_{X_i}(p) without the domain check; expression domain
  /// errors propagate.
  void zeta_into(const Vec& x, std::span<const double> p, Vec& out) const {
    const std::size_t n = dim_manifold();
    out.setZero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < algebra_.dim(); ++i) {
      double xi = x[static_cast<Eigen::Index>(i)];
      if (xi == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k)
        out[static_cast<Eigen::Index>(k)] += xi * compiled_[i][k].eval(p);
    }
  }

  Vec zeta(const Vec& x, const Vec& p) const {
    if (static_cast<std::size_t>(x.size()) != dim_algebra())
      throw Error(ErrorKind::Dimension, "algebra vector has wrong dimension");
    if (!contains(p)) throw Error(ErrorKind::OutsideDomain, "point is outside the domain");
    Vec out;
    zeta_into(x, as_span(p), out);
    return out;
  }

  /// Jacobian of field i: J(k, j) = d zeta_i^k / d x_j.
  Mat jacobian(std::size_t i, std::span<const double> p) const {
    const std::size_t n = dim_manifold();
    Mat jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j)
        jac(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
            partials_[i][k * n + j].eval(p);
    return jac;
  }

  /// Vector-field bracket [V, W] = DW.V - DV.W of two basis fields.
  Vec field_bracket(std::size_t i, std::size_t j, std::span<const double> p) const {
    Vec vi = field(i, p);
    Vec vj = field(j, p);
    return jacobian(j, p) * vi - jacobian(i, p) * vj;
  }

  /// max over basis pairs of |[zeta_i, zeta_j](p) - zeta_{[X_i, X_j]}(p)|.
  double homomorphism_residual_at(const Vec& p) const {
    if (!contains(p)) throw Error(ErrorKind::OutsideDomain, "point is outside the domain");
    const std::size_t d = dim_algebra();
    const auto d_index = static_cast<Eigen::Index>(d);
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        Vec br = algebra_.bracket(Vec::Unit(d_index, static_cast<Eigen::Index>(i)),
                                  Vec::Unit(d_index, static_cast<Eigen::Index>(j)));
        Vec expected;
        zeta_into(br, as_span(p), expected);
        worst = std::max(worst, (field_bracket(i, j, as_span(p)) - expected).norm());
      }
    return worst;
  }

 private:
  LieAlgebra algebra_;
  GroupModel group_;
  Domain domain_;
  std::vector<std::vector<Expr>> fields_;
  Env params_;
  std::optional<Expr> angle_;
  std::vector<std::vector<CompiledExpr>> compiled_;
  std::vector<std::vector<CompiledExpr>> partials_;  // [field][k * n + j]
  CompiledExpr compiled_angle_;
};

/// Rejection-samples points of the domain with margin above `min_margin`.
/// Fails when fewer than 1% of draws are accepted.
inline std::vector<Vec> sample_domain(const GAction& action, std::size_t count, std::uint64_t seed,
                                      double min_margin = 0.1) {
  Rng rng(seed);
  const auto& box = action.domain().sample_box();
  const std::size_t n = action.dim_manifold();
  std::vector<Vec> out;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (attempts >= 100 * count)
      throw Error(ErrorKind::Sampling, "domain sampling acceptance below 1%");
    ++attempts;
    Vec p(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) p[static_cast<Eigen::Index>(k)] = rng.uniform(box[k].lo, box[k].hi);
    if (action.margin(p) > min_margin) out.push_back(p);
  }
  return out;
}

/// Max homomorphism residual over `sample_count` sampled domain points.
inline double check_homomorphism(const GAction& action, std::size_t sample_count,
                                 std::uint64_t seed) {
  if (sample_count == 0) throw Error(ErrorKind::BadParameter, "sample_count must be positive");
  double worst = 0.0;
  for (const Vec& p : sample_domain(action, sample_count, seed))
    worst = std::max(worst, action.homomorphism_residual_at(p));
  return worst;
}

}  // namespace liecomp

#pragma once

// Lie algebra by structure constants, and the two group models used to
// realize a connected group G with that algebra.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "liecomp/error.hpp"

namespace liecomp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// [X_i, X_j] = sum_k c(i, j, k) X_k.
class LieAlgebra {
 public:
  LieAlgebra() = default;

  /// `constants` is indexed c[(i*d + j)*d + k]. Antisymmetry is checked
  /// exactly; the Jacobi identity to 1e-12.
  LieAlgebra(std::vector<std::string> names, std::vector<double> constants)
      : names_(std::move(names)), c_(std::move(constants)) {
    const std::size_t d = names_.size();
    if (d == 0) throw Error(ErrorKind::Validation, "Lie algebra must have positive dimension");
    if (c_.size() != d * d * d)
      throw Error(ErrorKind::Dimension, "structure constants must have d^3 entries");
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = 0; k < d; ++k)
          if (at(i, j, k) != -at(j, i, k))
            throw Error(ErrorKind::Validation, "structure constants are not antisymmetric");
    double jr = jacobi_residual();
    if (!(jr < 1e-12))
      throw Error(ErrorKind::Validation,
                  "structure constants violate the Jacobi identity (residual " +
                      std::to_string(jr) + ")");
  }

  static LieAlgebra abelian(std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < d; ++i) names.push_back("X" + std::to_string(i + 1));
    return LieAlgebra(std::move(names), std::vector<double>(d * d * d, 0.0));
  }

  std::size_t dim() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  double c(std::size_t i, std::size_t j, std::size_t k) const { return at(i, j, k); }

  bool is_abelian() const {
    for (double v : c_)
      if (v != 0.0) return false;
    return true;
  }

  Vec bracket(const Vec& u, const Vec& v) const {
    const std::size_t d = dim();
    if (static_cast<std::size_t>(u.size()) != d || static_cast<std::size_t>(v.size()) != d)
      throw Error(ErrorKind::Dimension, "bracket: vector dimension does not match algebra");
    Vec out = Vec::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      if (u[i] == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        double w = u[i] * v[j];
        if (w == 0.0) continue;
        for (std::size_t k = 0; k < d; ++k) out[k] += w * at(i, j, k);
      }
    }
    return out;
  }

  /// Max over index triples of |[[X_i,X_j],X_l] + [[X_j,X_l],X_i] + [[X_l,X_i],X_j]|.
  double jacobi_residual() const {
    const std::size_t d = dim();
    double worst = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        for (std::size_t l = 0; l < d; ++l)
          for (std::size_t k = 0; k < d; ++k) {
            double s = 0.0;
            for (std::size_t m = 0; m < d; ++m)
              s += at(i, j, m) * at(m, l, k) + at(j, l, m) * at(m, i, k) +
                   at(l, i, m) * at(m, j, k);
            worst = std::max(worst, std::fabs(s));
          }
    return worst;
  }

 private:
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    const std::size_t d = names_.size();
    return c_[(i * d + j) * d + k];
  }

  std::vector<std::string> names_;
  std::vector<double> c_;
};

/// Element of G. In the abelian model `value` is a d x 1 column of
/// coordinates; in the matrix model an invertible n x n matrix.
struct GroupElement {
  Mat value;
};

enum class GroupKind { Abelian, Matrix };

/// e^A by scaling and squaring with a diagonal [8/8] Pade approximant.
inline Mat matrix_exp(const Mat& a) {
  constexpr int kDegree = 8;
  const Eigen::Index n = a.rows();
  double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  Mat scaled = a / std::ldexp(1.0, squarings);

  // c_k = (2m-k)! m! / ((2m)! k! (m-k)!) via the recurrence c_k = c_{k-1} (m-k+1) / (k (2m-k+1)).
  Mat num = Mat::Identity(n, n);
  Mat den = Mat::Identity(n, n);
  Mat power = Mat::Identity(n, n);
  double coeff = 1.0;
  for (int k = 1; k <= kDegree; ++k) {
    coeff *= static_cast<double>(kDegree - k + 1) / (k * (2.0 * kDegree - k + 1));
    power = power * scaled;
    num += coeff * power;
    den += ((k % 2 == 0) ? coeff : -coeff) * power;
  }
  Mat result = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

class GroupModel {
 public:
  GroupModel() = default;

  static GroupModel abelian(std::size_t d) {
    GroupModel g;
    g.kind_ = GroupKind::Abelian;
    g.dim_ = d;
    return g;
  }

  static GroupModel matrix(std::vector<Mat> basis) {
    if (basis.empty()) throw Error(ErrorKind::Validation, "matrix group needs a basis");
    const Eigen::Index n = basis.front().rows();
    for (const Mat& b : basis)
      if (b.rows() != n || b.cols() != n)
        throw Error(ErrorKind::Dimension, "matrix basis elements must be square of equal size");
    GroupModel g;
    g.kind_ = GroupKind::Matrix;
    g.dim_ = basis.size();
    g.basis_ = std::move(basis);
    return g;
  }

  GroupKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const std::vector<Mat>& basis() const { return basis_; }
  Eigen::Index matrix_size() const { return basis_.empty() ? 0 : basis_.front().rows(); }

  /// Max deviation of [B_i, B_j] from sum_k c(i,j,k) B_k.
  double commutator_residual(const LieAlgebra& alg) const {
    if (alg.dim() != dim_) throw Error(ErrorKind::Dimension, "group and algebra dimensions differ");
    if (kind_ == GroupKind::Abelian) return alg.is_abelian() ? 0.0 : 1.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) {
        Mat comm = basis_[i] * basis_[j] - basis_[j] * basis_[i];
        for (std::size_t k = 0; k < dim_; ++k) comm -= alg.c(i, j, k) * basis_[k];
        worst = std::max(worst, comm.cwiseAbs().maxCoeff());
      }
    return worst;
  }

  void validate(const LieAlgebra& alg) const {
    double r = commutator_residual(alg);
    if (!(r < 1e-10)) {
      throw Error(ErrorKind::Validation,
                  kind_ == GroupKind::Abelian
                      ? std::string("abelian group model requires an abelian algebra")
                      : "basis commutators do not reproduce the structure constants (residual " +
                            std::to_string(r) + ")");
    }
  }

  GroupElement identity() const {
    if (kind_ == GroupKind::Abelian) return {Mat::Zero(static_cast<Eigen::Index>(dim_), 1)};
    return {Mat::Identity(matrix_size(), matrix_size())};
  }

  GroupElement mul(const GroupElement& a, const GroupElement& b) const {
    check(a);
    check(b);
    if (kind_ == GroupKind::Abelian) return {a.value + b.value};
    return {a.value * b.value};
  }

  GroupElement inv(const GroupElement& a) const {
    check(a);
    if (kind_ == GroupKind::Abelian) return {-a.value};
    Eigen::FullPivLU<Mat> lu(a.value);
    if (!(std::fabs(lu.determinant()) > 1e-12))
      throw Error(ErrorKind::Singular, "group element is singular");
    return {lu.inverse()};
  }

  /// sum_i X_i B_i in the matrix model; the coordinate vector itself otherwise.
  Mat algebra_matrix(const Vec& x) const {
    check_algebra(x);
    if (kind_ == GroupKind::Abelian) return x;
    Mat m = Mat::Zero(matrix_size(), matrix_size());
    for (std::size_t i = 0; i < dim_; ++i) m += x[static_cast<Eigen::Index>(i)] * basis_[i];
    return m;
  }

  GroupElement exp_segment(const Vec& x, double t) const {
    check_algebra(x);
    if (kind_ == GroupKind::Abelian) return {t * x};
    return {matrix_exp(t * algebra_matrix(x))};
  }

  double distance(const GroupElement& a, const GroupElement& b) const {
    check(a);
    check(b);
    return (a.value - b.value).norm();
  }

  /// Flattened coordinates, row-major for matrices.
  std::vector<double> coordinates(const GroupElement& a) const {
    check(a);
    std::vector<double> out;
    for (Eigen::Index r = 0; r < a.value.rows(); ++r)
      for (Eigen::Index c = 0; c < a.value.cols(); ++c) out.push_back(a.value(r, c));
    return out;
  }

  std::size_t coordinate_count() const {
    if (kind_ == GroupKind::Abelian) return dim_;
    auto n = static_cast<std::size_t>(matrix_size());
    return n * n;
  }

  GroupElement from_coordinates(const std::vector<double>& v) const {
    if (v.size() != coordinate_count())
      throw Error(ErrorKind::Dimension, "wrong number of group coordinates");
    if (kind_ == GroupKind::Abelian) {
      Mat m(static_cast<Eigen::Index>(dim_), 1);
      for (std::size_t i = 0; i < dim_; ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
      return {m};
    }
    const Eigen::Index n = matrix_size();
    Mat m(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c) m(r, c) = v[static_cast<std::size_t>(r * n + c)];
    if (!(std::fabs(m.determinant()) > 1e-12))
      throw Error(ErrorKind::Singular, "group element is singular");
    return {m};
  }

 private:
  void check(const GroupElement& a) const {
    if (kind_ == GroupKind::Abelian) {
      if (a.value.rows() != static_cast<Eigen::Index>(dim_) || a.value.cols() != 1)
        throw Error(ErrorKind::Dimension, "abelian group element has wrong shape");
    } else if (a.value.rows() != matrix_size() || a.value.cols() != matrix_size()) {
      throw Error(ErrorKind::Dimension, "matrix group element has wrong shape");
    }
  }

  void check_algebra(const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != dim_)
      throw Error(ErrorKind::Dimension, "algebra vector has wrong dimension");
  }

  GroupKind kind_ = GroupKind::Abelian;
  std::size_t dim_ = 0;
  std::vector<Mat> basis_;
};

}  // namespace liecomp

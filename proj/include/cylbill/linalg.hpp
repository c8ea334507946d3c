#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cylbill {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntVec = Eigen::Matrix<long long, Eigen::Dynamic, 1>;
using IntMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

namespace tol {
/// Orthonormality of stored bases.
inline constexpr double ortho = 1e-12;
/// Residual below which orthonormalize() drops a vector.
inline constexpr double drop = 1e-10;
/// Relative singular-value cutoff for exactly computed matrices.
inline constexpr double rank_rel = 1e-8;
/// Relative singular-value cutoff for finite-difference matrices.
inline constexpr double fd_rank_rel = 1e-6;
/// Subspace containment / non-orthogonality decisions.
inline constexpr double containment = 1e-9;
}  // namespace tol

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A linear subspace of R^d stored by an orthonormal basis (columns).
class Subspace {
 public:
  Subspace() = default;
  explicit Subspace(int ambient_dim);

  static Subspace zero(int ambient_dim) { return Subspace(ambient_dim); }
  static Subspace full(int ambient_dim);
  /// Wraps columns that are already orthonormal; throws if the Gram matrix
  /// deviates from the identity by more than 1e-10.
  static Subspace from_orthonormal(Mat basis);

  int ambient_dim() const { return ambient_dim_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }

  Vec project(const Vec& v) const;
  Mat projector() const { return basis_ * basis_.transpose(); }
  /// Coordinates of the projection of v in this basis.
  Vec coordinates(const Vec& v) const { return basis_.transpose() * v; }
  /// ||v - P v||.
  double residual(const Vec& v) const;
  /// Largest residual of other's basis vectors; 0 when other ⊆ this.
  double containment_residual(const Subspace& other) const;
  bool contains(const Subspace& other, double tol = tol::containment) const {
    return containment_residual(other) < tol;
  }
  /// Max deviation of the basis Gram matrix from the identity.
  double orthonormality_defect() const;

 private:
  int ambient_dim_ = 0;
  Mat basis_;
};

/// Repeated-projection Gram–Schmidt with a re-orthogonalization pass.
Subspace orthonormalize(std::span<const Vec> vectors, int ambient_dim = -1);
Subspace orthonormalize(const Mat& columns);

Vec project(const Subspace& s, const Vec& v);
Subspace complement(const Subspace& s);
/// ambient_dim is only needed when parts is empty.
Subspace span_of(std::span<const Subspace> parts, int ambient_dim = -1);
Subspace intersect(std::span<const Subspace> parts, int ambient_dim = -1);

/// Number of singular values >= rel_tol * s_max.
int numerical_rank(const Mat& m, double rel_tol = tol::rank_rel);
Subspace column_space(const Mat& m, double rel_tol = tol::rank_rel);
Subspace null_space(const Mat& m, double rel_tol = tol::rank_rel);

/// Largest absolute entry of P_a - P_b.
double projector_distance(const Subspace& a, const Subspace& b);
/// Operator norm of P_a P_b, i.e. the cosine of the smallest principal angle.
double max_cosine(const Subspace& a, const Subspace& b);
bool orthogonal(const Subspace& a, const Subspace& b, double tol = tol::containment);

}  // namespace cylbill

#pragma once

#include "cylbill/linalg.hpp"

#include <optional>

namespace cylbill {

/// Result of reducing a (possibly dependent) generating set of a discrete
/// subgroup: basis == generators * transform, columns LLL-reduced.
struct GeneratorReduction {
  Mat basis;
  IntMat transform;
  /// False when the reduction did not converge or the generators could not
  /// be re-expressed as integer combinations of the basis (the set is not
  /// discrete to working precision).
  bool ok = false;
};

/// LLL reduction of a generating set with removal of dependent vectors.
/// Vectors shorter than rel_tol * (longest generator) count as zero.
GeneratorReduction reduce_generators(const Mat& generators, double rel_tol = 1e-9,
                                     double delta = 0.75);

/// Full-rank lattice in R^d given by a generating basis (columns).
class Lattice {
 public:
  Lattice() = default;
  explicit Lattice(Mat basis);

  static Lattice integer(int d) { return Lattice(Mat::Identity(d, d)); }

  int dim() const { return static_cast<int>(basis_.rows()); }
  const Mat& basis() const { return basis_; }
  const Mat& inverse() const { return inverse_; }
  /// LLL-reduced basis; reduced_basis() == basis() * reduction_transform().
  const Mat& reduced_basis() const { return reduced_; }
  const IntMat& reduction_transform() const { return reduction_transform_; }
  double determinant() const { return det_; }

  Vec coordinates(const Vec& x) const { return inverse_ * x; }
  Vec point(const Vec& coords) const { return basis_ * coords; }
  Vec point(const IntVec& n) const { return basis_ * n.cast<double>(); }
  /// x minus the lattice vector B floor(B^-1 x); *shift receives floor(B^-1 x).
  Vec wrap(const Vec& x, IntVec* shift = nullptr) const;
  /// Integer coordinates of x when x is a lattice vector to within tol
  /// (measured in coordinate space).
  std::optional<IntVec> integer_coordinates(const Vec& x, double tol = 1e-7) const;
  /// Largest distance between two points of the fundamental parallelepiped.
  double fundamental_domain_diameter() const { return diameter_; }

 private:
  Mat basis_;
  Mat inverse_;
  Mat reduced_;
  IntMat reduction_transform_;
  double det_ = 0.0;
  double diameter_ = 0.0;
};

/// Sorted norms of all nonzero lattice vectors with norm <= radius; an
/// isometry invariant used to compare lattices given in different frames.
std::vector<double> short_vector_norms(const Mat& basis, double radius);

}  // namespace cylbill

#pragma once

#include "cylbill/lattice.hpp"
#include "cylbill/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cylbill {

/// One spherical cylinder C_i = { x : dist(x - t_i, A_i) < r_i } in the torus.
struct CylinderSpec {
  /// Generators of A_i as integer coordinates over the lattice basis; this
  /// makes A_i a lattice subspace by construction.
  std::vector<IntVec> generator_coeffs;
  /// Real spanning vectors (columns) for factor systems whose generator has
  /// no integer form; when set, generator_coeffs must be empty.
  std::optional<Mat> generator_real;
  double radius = 0.0;
  /// Lattice coordinates of t_i; canonicalised into [0,1)^d.
  Vec translation;
  std::string provenance;
};

/// Static model of a cylindric billiard: lattice plus cylinders. Derived
/// generator/base subspaces are computed once at construction.
class CylindricBilliardSystem {
 public:
  CylindricBilliardSystem() = default;
  CylindricBilliardSystem(Lattice lattice, std::vector<CylinderSpec> cylinders,
                          bool interior_connected_asserted = false);

  int dim() const { return lattice_.dim(); }
  int size() const { return static_cast<int>(cylinders_.size()); }
  const Lattice& lattice() const { return lattice_; }
  const std::vector<CylinderSpec>& cylinders() const { return cylinders_; }
  const CylinderSpec& cylinder(int i) const;
  bool interior_connected_asserted() const { return interior_connected_asserted_; }

  /// A_i.
  const Subspace& generator_space(int i) const;
  /// L_i = A_i^⊥.
  const Subspace& base_space(int i) const;
  std::vector<Subspace> base_spaces() const { return bases_; }
  double radius(int i) const { return cylinder(i).radius; }
  /// t_i as an ambient vector.
  Vec translation_vector(int i) const;
  double max_radius() const;

 private:
  Lattice lattice_;
  std::vector<CylinderSpec> cylinders_;
  bool interior_connected_asserted_ = false;
  std::vector<Subspace> generators_;
  std::vector<Subspace> bases_;
};

struct Violation {
  int cylinder = -1;  // -1: system-level
  std::string what;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate(const CylindricBilliardSystem& system);

inline const Subspace& base_space(const CylindricBilliardSystem& s, int i) { return s.base_space(i); }
inline const Subspace& generator_space(const CylindricBilliardSystem& s, int i) {
  return s.generator_space(i);
}

}  // namespace cylbill

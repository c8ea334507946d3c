#pragma once

#include "cylbill/exec.hpp"
#include "cylbill/linalg.hpp"
#include "cylbill/system.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace cylbill {

/// Non-trivial orthogonal splitting R^d = B1 ⊕ B2 with every assigned base
/// space inside one part (assignment value 1 or 2).
struct SplittingWitness {
  Subspace b1;
  Subspace b2;
  std::map<int, int> assignment;
  /// Set for the free-flight case (no collisions at all).
  bool degenerate = false;
};

/// Throws std::logic_error when the witness violates its invariants
/// against the given base spaces.
void check_witness(const SplittingWitness& w, std::span<const Subspace> bases);

/// Undirected graph on base-space indices, edge iff ||P_i P_j|| > 1e-9.
struct Graph {
  int vertices = 0;
  std::vector<std::vector<int>> adjacency;
  std::vector<std::pair<int, int>> edges() const;
  /// Connected components, each sorted, ordered by smallest member.
  std::vector<std::vector<int>> components() const;
  bool connected() const { return vertices <= 1 || components().size() == 1; }
};

Graph non_orthogonality_graph(std::span<const Subspace> bases);

struct TransitivityResult {
  bool transitive = false;
  std::optional<SplittingWitness> witness;
};

/// Graph-connectivity plus full-span test. bases may be empty only when
/// ambient_dim is supplied.
TransitivityResult is_transitive(std::span<const Subspace> bases, int ambient_dim = -1);

/// Dimension of the symmetric matrices commuting with so(L_i) for all i;
/// equals 1 exactly for irreducible (transitive) systems.
int commutant_dimension(std::span<const Subspace> bases);

struct TransverseResult {
  bool transverse = false;
  /// Lexicographically smallest violating index set when not transverse.
  std::optional<std::vector<int>> counterexample;
  /// Number of distinct E+ spans examined.
  std::size_t distinct_spans = 0;
};

class EnumerationGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kTransverseEnumerationGuard = 24;

/// Subset enumeration over all non-empty I. Throws EnumerationGuardError
/// when the system has more than 24 cylinders.
TransverseResult is_transverse(const CylindricBilliardSystem& system, Exec exec = Exec::parallel);
TransverseResult is_transverse(std::span<const Subspace> bases, Exec exec = Exec::parallel);

/// Labels of a symbolic sequence with duplicates removed, sorted.
std::vector<int> distinct_labels(std::span<const int> labels);

bool is_transitive_sequence(std::span<const int> labels, const CylindricBilliardSystem& system);

/// Greedy left-to-right count of consecutive minimal transitive blocks.
int count_transitive_blocks(std::span<const int> labels, const CylindricBilliardSystem& system);

/// Throws std::invalid_argument when (b1, b2) is not an orthogonal
/// decomposition of the ambient space.
bool splits_according_to(std::span<const int> collided, const Subspace& b1, const Subspace& b2,
                         const CylindricBilliardSystem& system);

/// Orthogonal decomposition R^d = E_1 ⊕ ... ⊕ E_p ⊕ E_0 induced by the
/// non-orthogonality components of the given labels.
struct OrthogonalDecomposition {
  std::vector<std::vector<int>> groups;  // labels per component
  std::vector<Subspace> parts;           // E_j
  Subspace e0;
};

OrthogonalDecomposition orthogonal_decomposition(std::span<const int> labels,
                                                 const CylindricBilliardSystem& system);

}  // namespace cylbill

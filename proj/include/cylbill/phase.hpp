#pragma once

#include "cylbill/linalg.hpp"

namespace cylbill {

/// x = (q, v) in M = Q × S^{d-1}: q in the lattice fundamental domain,
/// v a unit vector.
struct PhasePoint {
  Vec q;
  Vec v;
};

}  // namespace cylbill

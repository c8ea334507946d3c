#pragma once

#include "cylbill/euclid_paths.hpp"
#include "cylbill/phase.hpp"
#include "cylbill/system.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace cylbill {

struct FlowOptions {
  /// Collision search horizon; <= 0 selects 10 x fundamental-domain diameter.
  double horizon = 0.0;
  double disc_tol = 1e-12;
  double t_min_gap = 1e-9;
  /// Abort when more events than this fall into one unit time interval.
  long long cascade_cap = 1000000;
  /// Lattice coordinates of the cell holding the initial point; zero when unset.
  std::optional<IntVec> initial_unwrap;
};

struct CollisionEvent {
  double time = 0.0;
  int cylinder = -1;
  /// Integer lattice coordinates of a lattice vector λ whose translate
  /// t_i + λ + A_i is the axis that was hit (absolute, in the unfolded space).
  IntVec lattice_image;
  /// Outward unit normal, in L_i.
  Vec normal;
  /// Collision point in the fundamental domain.
  Vec position;
  /// Lattice coordinates of the cell holding position.
  IntVec cell;
  Vec v_before;
  Vec v_after;
};

enum class Termination { max_collisions, max_time, no_collision, tangential, simultaneous, start_inside, cascade_capped };

const char* to_string(Termination t);

struct TrajectoryRecord {
  PhasePoint initial;
  IntVec initial_unwrap;
  std::vector<CollisionEvent> events;
  SymbolicSequence symbolic;
  /// State at the stopping time.
  PhasePoint final_state;
  IntVec final_unwrap;
  double final_time = 0.0;
  Termination termination = Termination::max_collisions;
  bool tangential_encountered = false;
  bool simultaneous_encountered = false;
  bool start_inside = false;
  bool cascade_capped = false;

  /// True when the run stopped at a singular or degenerate configuration.
  bool degenerate() const {
    return tangential_encountered || simultaneous_encountered || start_inside || cascade_capped;
  }
};

/// Per-cylinder data for image enumeration: the projected lattice
/// Λ_i = P_{L_i}(L) in base coordinates, reduced.
class FlowGeometry {
 public:
  explicit FlowGeometry(const CylindricBilliardSystem& system);

  struct Cylinder {
    Mat lb;        // d x ν orthonormal basis of L_i
    Vec t;         // ambient translation
    double r = 0;
    Mat bi;        // ν x ν reduced basis of Λ_i
    Mat bi_inv;
    Vec row_norms; // row norms of bi_inv
    IntMat ti;     // d x ν: bi = lb^T B ti
    IntMat si;     // ν x d: lb^T B = bi si
  };

  const CylindricBilliardSystem& system() const { return *system_; }
  const Lattice& lattice() const { return system_->lattice(); }
  const std::vector<Cylinder>& cylinders() const { return cylinders_; }
  double default_horizon() const { return 10.0 * lattice().fundamental_domain_diameter(); }
  /// Chunk length of the segment search.
  double chunk() const { return chunk_; }

  /// min_i (dist(q, images of axis i) - r_i); negative inside a scatterer.
  double clearance(const Vec& q) const;
  /// Absolute image index of the nearest axis image of cylinder i to the
  /// unfolded point x.
  IntVec nearest_image(int i, const Vec& x) const;

 private:
  const CylindricBilliardSystem* system_;
  std::vector<Cylinder> cylinders_;
  double chunk_ = 1.0;
};

enum class NextStatus { collision, none, tangential, simultaneous, start_inside };

struct NextCollision {
  NextStatus status = NextStatus::none;
  /// Time is relative to the query phase; position is not wrapped.
  CollisionEvent event;
};

/// Earliest collision before `horizon` of the ray q + s v. `unwrap` (lattice
/// coordinates of the current cell) makes event images absolute.
NextCollision next_collision(const FlowGeometry& geom, const PhasePoint& phase, double horizon,
                             const FlowOptions& opt = {}, const IntVec* unwrap = nullptr);

struct FlowStop {
  long long max_collisions = -1;  // < 0: unlimited
  double max_time = std::numeric_limits<double>::infinity();
};

TrajectoryRecord flow(const FlowGeometry& geom, const PhasePoint& phase, const FlowStop& stop,
                      const FlowOptions& opt = {});
TrajectoryRecord flow(const CylindricBilliardSystem& system, const PhasePoint& phase, const FlowStop& stop,
                      const FlowOptions& opt = {});

/// The record as a Euclidean path: labels, and a spec with γ(0) at the
/// unfolded initial point and offsets at the hit axis images.
struct UnfoldedPath {
  SymbolicSequence sigma;
  EuclideanPathSpec spec;
};

UnfoldedPath unfold(const FlowGeometry& geom, const TrajectoryRecord& record);

/// State obtained by stopping between collisions n and n+1 and flipping the
/// velocity; the returned unwrap belongs to that state.
struct ReversedStart {
  PhasePoint phase;
  IntVec unwrap;
  double time = 0.0;
};

ReversedStart reversal_point(const TrajectoryRecord& record, const Lattice& lattice, std::size_t n);

}  // namespace cylbill

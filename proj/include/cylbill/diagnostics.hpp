#pragma once

#include "cylbill/builders.hpp"
#include "cylbill/classifier.hpp"
#include "cylbill/exec.hpp"
#include "cylbill/torus_flow.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace cylbill {

// ---------------------------------------------------------------------------
// Splitting and richness

/// Witness (E_1, E_1^⊥) built from the first non-orthogonality component of
/// the collided labels; none when the collided set is transitive. An empty
/// collided set yields the degenerate first-axis witness.
std::optional<SplittingWitness> detect_splitting(std::span<const int> collided, const CylindricBilliardSystem& system);
std::optional<SplittingWitness> detect_splitting(const TrajectoryRecord& record, const CylindricBilliardSystem& system);

struct RichnessCertificate {
  bool certified = false;
  int block_count = 0;
};

/// certified == (transitive block count >= c); c must be >= 1.
RichnessCertificate richness_certificate(const TrajectoryRecord& record, const CylindricBilliardSystem& system,
                                         int c);

// ---------------------------------------------------------------------------
// Lyapunov exponent

struct LyapunovOptions {
  double total_time = 1e4;
  double renorm_dt = 1.0;
  double d0 = 1e-9;
  std::uint64_t seed = 1;
  /// Windows whose separation exceeds this are discarded (the two points
  /// ended on different sides of a collision).
  double discard_separation = 1e-3;
  double unreliable_fraction = 0.2;
  FlowOptions flow;
};

struct LyapunovResult {
  double estimate = 0.0;
  /// Standard error of the mean window rate.
  double std_error = 0.0;
  /// log(sep / d0) / renorm_dt per window; NaN for discarded windows.
  std::vector<double> window_rates;
  int accepted = 0;
  int discarded = 0;
  bool unreliable = false;
  /// Set when the reference trajectory itself stopped at a degenerate event.
  bool reference_failed = false;
  double simulated_time = 0.0;
};

/// Two-trajectory estimate of the largest exponent.
LyapunovResult lyapunov_max(const CylindricBilliardSystem& system, const PhasePoint& phase,
                            const LyapunovOptions& opt = {});

// ---------------------------------------------------------------------------
// Ensembles

using Rng = std::mt19937_64;

/// q uniform in the fundamental domain outside all scatterers, v uniform on
/// the sphere. Throws std::runtime_error when 10000 draws all land inside.
PhasePoint random_phase(const FlowGeometry& geom, Rng& rng);

/// Balls 0 and 1 on the row y = 1/4 moving head-on along x, the remaining
/// balls at rest on the row y = 3/4; every coordinate perturbed by a
/// Gaussian of log-uniform scale in [1e-8, 1e-4]. Needs nu == 2.
PhasePoint near_splitting_hard_ball_phase(const HardBallBuild& build, Rng& rng);

using PhaseSampler = std::function<PhasePoint(Rng&)>;

struct ScanOptions {
  int orbits = 100;
  /// Collision counts at which the collided set is tested.
  std::vector<long long> checkpoints{20, 200};
  std::uint64_t seed = 1;
  Exec exec = Exec::parallel;
  FlowOptions flow;
};

struct ScanResult {
  std::vector<long long> checkpoints;
  /// Orbits admitting a splitting witness, per checkpoint.
  std::vector<int> split;
  /// Orbits entering the statistics (degenerate stops excluded).
  int valid = 0;
  int degenerate = 0;
  std::vector<double> fractions() const;
};

ScanResult splitting_scan(const CylindricBilliardSystem& system, const PhaseSampler& sampler,
                          const ScanOptions& opt = {});

}  // namespace cylbill

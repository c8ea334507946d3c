#pragma once

#include "cylbill/exec.hpp"
#include "cylbill/linalg.hpp"
#include "cylbill/system.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cylbill {

using SymbolicSequence = std::vector<int>;

/// Initial velocity plus one cylinder offset per collision. The path starts
/// at the origin; offset j is stored in coordinates of the orthonormal basis
/// of L_{σ(j)}.
struct EuclideanPathSpec {
  Vec v0;
  std::vector<Vec> offsets;
};

struct PathOptions {
  /// Tangency threshold on r^2 - (closest approach)^2, relative to r^2.
  double disc_tol = 1e-12;
  double t_min_gap = 1e-9;
  double fd_step = 1e-6;
  /// Largest accepted output change h |f'| of one difference step; larger
  /// changes shrink the step, down to fd_min_step. Roundoff in the traced
  /// path grows with its expansion, so the step is kept as large as the
  /// linear regime allows.
  double fd_max_change = 1e-2;
  double fd_min_step = 1e-12;
  /// Richardson extrapolation of the central differences (Ridders' tableau
  /// with error control).
  bool richardson = true;
  double fd_rank_rel = tol::fd_rank_rel;
};

enum class TraceStatus { ok, no_real_root, tangential, non_advancing, invalid_spec };

const char* to_string(TraceStatus s);

struct EuclideanPathResult {
  TraceStatus status = TraceStatus::ok;
  /// Index j (0-based) of the collision that failed; -1 on success.
  int failed_at = -1;
  std::vector<double> times;
  /// γ(t_j).
  std::vector<Vec> points;
  /// V_0 .. V_m.
  std::vector<Vec> velocities;
  /// Outward unit normals n_j in L_{σ(j)}.
  std::vector<Vec> normals;

  bool ok() const { return status == TraceStatus::ok; }
  const Vec& final_velocity() const { return velocities.back(); }
};

/// Thrown by the derivative operations when a perturbed path fails to trace.
class PathError : public std::runtime_error {
 public:
  PathError(TraceStatus status, const std::string& what) : std::runtime_error(what), status(status) {}
  TraceStatus status;
};

/// Offset j as an ambient vector.
Vec offset_vector(const CylindricBilliardSystem& system, std::span<const int> sigma,
                  const EuclideanPathSpec& spec, int j);

/// Checks label range, offset dimensions and ||V0|| = 1; returns an empty
/// string when the spec is usable.
std::string check_spec(const CylindricBilliardSystem& system, std::span<const int> sigma,
                       const EuclideanPathSpec& spec);

EuclideanPathResult trace(const CylindricBilliardSystem& system, std::span<const int> sigma,
                          const EuclideanPathSpec& spec, const PathOptions& opt = {});

/// a_j <- a_j + P_{σ(j)}(a).
EuclideanPathSpec translate_all(const CylindricBilliardSystem& system, std::span<const int> sigma,
                                const EuclideanPathSpec& spec, const Vec& a);

/// a_j <- a_j + b_j with b_j ambient vectors in L_{σ(j)}; throws
/// std::invalid_argument when some b_j leaves its base space by > 1e-10.
EuclideanPathSpec translate_each(const CylindricBilliardSystem& system, std::span<const int> sigma,
                                 const EuclideanPathSpec& spec, std::span<const Vec> b);

/// V0 h_1 ... h_m, reflections applied left to right.
Vec phi_map(const Vec& v0, std::span<const Vec> normals);

/// Columns: ∂V_m / ∂e_i under translate_all.
Mat dVm_matrix(const CylindricBilliardSystem& system, std::span<const int> sigma, const EuclideanPathSpec& spec,
               const PathOptions& opt = {});

/// Columns: ∂V_m / ∂(offset j, base direction k) for every j, k.
Mat dVm_each_matrix(const CylindricBilliardSystem& system, std::span<const int> sigma,
                    const EuclideanPathSpec& spec, const PathOptions& opt = {});

Subspace w_plus(const CylindricBilliardSystem& system, std::span<const int> sigma, const EuclideanPathSpec& spec,
                const PathOptions& opt = {});
Subspace w_plus_tilde(const CylindricBilliardSystem& system, std::span<const int> sigma,
                      const EuclideanPathSpec& spec, const PathOptions& opt = {});

struct NeutralSpace {
  /// Kernel of M(γ).
  Subspace kernel;
  /// (W+)^⊥ pulled back through h_m, ..., h_1.
  Subspace pulled_back;
  Subspace w_plus;
  /// max |<n h_1..h_m, w>| over unit kernel vectors n and W+ basis vectors w.
  double orthogonality_residual = 0.0;
  /// projector_distance(kernel, pulled_back).
  double projector_gap = 0.0;
};

NeutralSpace neutral_space(const CylindricBilliardSystem& system, std::span<const int> sigma,
                           const EuclideanPathSpec& spec, const PathOptions& opt = {});

struct ThetaRank {
  int rank = 0;
  /// (d - 1) + Σ (ν_j - 1).
  int expected = 0;
  bool surjective() const { return rank == expected; }
};

/// FD rank of spec -> (V0; n_1, ..., n_m).
ThetaRank theta_rank(const CylindricBilliardSystem& system, std::span<const int> sigma,
                     const EuclideanPathSpec& spec, const PathOptions& opt = {});

/// dim ∩_j A_{σ(j)}; the full space for an empty sequence.
int common_generator_dim(const CylindricBilliardSystem& system, std::span<const int> sigma);

// ---------------------------------------------------------------------------
// Typical dimensions by sampling

enum class SamplingMeasure {
  /// Offset j uniform in a cube of L_{σ(j)} centred at the projection of γ(t_{j-1}).
  box,
  /// Offset j placed at a uniform flight time and a uniform impact point on the disc of radius r.
  constructive,
};

struct SamplingOptions {
  SamplingMeasure measure = SamplingMeasure::box;
  /// Half-width of the offset cube; <= 0 selects 3 * max radius.
  double box_half_width = 0.0;
  /// Flight-time range for the constructive measure.
  double min_flight = 0.05;
  double max_flight = 2.0;
  /// Redraws of a single offset before the partial path is abandoned.
  int offset_retries = 64;
  /// Fresh paths tried per sample before the sample counts as failed.
  int path_retries = 16;
  PathOptions path;
  Exec exec = Exec::parallel;
};

/// Name of the seeded generator; changes whenever the sampling stream does.
inline constexpr const char* kSamplerName = "splitmix64-mt19937_64/v1";

/// Seed of sample `index` under master seed `seed`.
std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index);

class NoValidPath : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DeltaResult {
  int delta = -1;
  int samples = 0;
  /// Samples that produced a traced path and a W+ dimension.
  int successes = 0;
  /// Discarded trace attempts (misses, tangencies, non-advancing roots).
  long long trace_failures = 0;
  int d_minus_one = 0;
  /// d - 1 - dim ∩ A_{σ(j)}.
  int neutral_bound = 0;
  /// 2d - 1 - dim ∩ A_{σ(j)}, reported only.
  int constrained_manifold_dim = 0;
  /// Per-sample W+ dimension (-1 for failed samples), in sample order.
  std::vector<int> per_sample;
};

/// One random path with sequence Σ, or nullopt-like failure encoded as an
/// empty offsets list together with ok == false.
struct SampledPath {
  EuclideanPathSpec spec;
  bool ok = false;
  long long failures = 0;
};

SampledPath sample_path(const CylindricBilliardSystem& system, std::span<const int> sigma, std::uint64_t seed,
                        const SamplingOptions& opt = {});

/// max dim W+ over n_samples sampled paths. Throws NoValidPath when every sample fails.
DeltaResult delta_sigma(const CylindricBilliardSystem& system, std::span<const int> sigma, int n_samples,
                        std::uint64_t seed, const SamplingOptions& opt = {});

/// max dim W+ over Γ(Σ, ā): V0 and translate_all perturbations of base_spec
/// (the base spec itself is sample 0).
DeltaResult delta_sigma_constrained(const CylindricBilliardSystem& system, std::span<const int> sigma,
                                    const EuclideanPathSpec& base_spec, int n_samples, std::uint64_t seed,
                                    const SamplingOptions& opt = {});

bool is_rich(const CylindricBilliardSystem& system, std::span<const int> sigma, int n_samples, std::uint64_t seed,
             const SamplingOptions& opt = {});

}  // namespace cylbill

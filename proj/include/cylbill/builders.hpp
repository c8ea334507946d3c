#pragma once

#include "cylbill/classifier.hpp"
#include "cylbill/phase.hpp"
#include "cylbill/system.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cylbill {

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Sub-billiards (factor systems)

/// The factor billiard of the cylinders in `indices`, living in
/// E+ = span{L_i : i in indices} with lattice P_{E+}(L).
struct SubBilliard {
  CylindricBilliardSystem system;
  /// Original label of each retained cylinder, in order.
  std::vector<int> indices;
  Subspace e_plus;
  Subspace e0;
  /// d x d' orthonormal frame of E+; new coordinates are frame^T x.
  Mat frame;
  /// rank(E0 ∩ L) recovered from the reduction; equals dim E0 on success.
  int e0_lattice_rank = 0;
  std::vector<std::string> notes;
};

/// Throws BuildError when E0 fails the lattice-subspace verification.
SubBilliard sub_billiard(const CylindricBilliardSystem& system, std::span<const int> indices);

// ---------------------------------------------------------------------------
// Hard balls

struct HardBallParams {
  int n = 2;                   // number of balls
  int nu = 2;                  // torus dimension
  std::vector<double> masses;  // n positive masses
  double r = 0.1;              // ball radius
};

void check_params(const HardBallParams& p);

/// 2r sqrt(m_i m_j / (m_i + m_j)).
double hard_ball_pair_radius(double r, double mi, double mj);

/// The unreduced system in the mass-rescaled torus R^{νN} / ⊕ √m_i Z^ν.
CylindricBilliardSystem hard_ball_unreduced(const HardBallParams& p);

struct HardBallBuild {
  CylindricBilliardSystem system;
  HardBallParams params;
  /// Ball pair (i, j), i < j, of each cylinder.
  std::vector<std::pair<int, int>> pairs;
  /// νN x ν(N-1) orthonormal frame of the reduced space Z in rescaled coordinates.
  Mat frame;
  std::vector<std::string> notes;
};

/// Reduced system on Z = { Σ m_i v_i = 0 }, dimension ν(N-1).
HardBallBuild hard_ball_system(const HardBallParams& p);

/// Maps ball positions / velocities (rows: balls, columns: coordinates) to a
/// phase point of the reduced system; the velocity is normalised to unit speed.
PhasePoint hard_ball_phase(const HardBallBuild& build, const Mat& positions, const Mat& velocities);

// ---------------------------------------------------------------------------
// Direct sums

struct DirectSumBuild {
  CylindricBilliardSystem system;
  Graph graph;
};

/// bases must form a linear direct sum of R^d. The lattice is generated by
/// orthonormal bases of K_i = ∩_{j≠i} A_j, so every A_i is a lattice subspace.
/// translations are ambient vectors (empty means the origin).
DirectSumBuild direct_sum_system(const std::vector<int>& block_dims, const std::vector<Subspace>& bases,
                                 const std::vector<double>& radii, const std::vector<Vec>& translations);

}  // namespace cylbill

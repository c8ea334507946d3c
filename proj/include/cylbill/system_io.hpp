#pragma once

#include "cylbill/euclid_paths.hpp"
#include "cylbill/phase.hpp"
#include "cylbill/system.hpp"
#include "cylbill/torus_flow.hpp"

#include <stdexcept>
#include <string>

namespace cylbill {

/// Parse or schema failure; what() starts with "source:line:column:".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, int column, const std::string& message);
  int line = 0;
  int column = 0;
};

// System files:
//   dim: d
//   lattice_basis: d rows of d reals (row-major; columns are the generators)
//   interior_connected_asserted: bool
//   cylinders:
//     - generator_coeffs: list of integer d-vectors   (or generator_real: list of real d-vectors)
//       radius: r
//       translation: lattice coordinates of t_i
//       provenance: optional string
CylindricBilliardSystem parse_system(const std::string& text, const std::string& source = "<system>");
CylindricBilliardSystem read_system(const std::string& path);
std::string format_system(const CylindricBilliardSystem& system);

// Sequence files: labels: [0-based cylinder indices]
SymbolicSequence parse_sigma(const std::string& text, const std::string& source = "<sigma>");
SymbolicSequence read_sigma(const std::string& path);
std::string format_sigma(const SymbolicSequence& sigma);

// Spec files: v0: [d reals]; offsets: one list of base coordinates per collision
EuclideanPathSpec parse_spec(const std::string& text, const std::string& source = "<spec>");
EuclideanPathSpec read_spec(const std::string& path);
std::string format_spec(const EuclideanPathSpec& spec);

// Phase files: q: [d reals]; v: [d reals] (v is normalised on read)
PhasePoint parse_phase(const std::string& text, const std::string& source = "<phase>");
PhasePoint read_phase(const std::string& path);

/// Path result with times, points, velocities and normals.
std::string format_path_result(std::span<const int> sigma, const EuclideanPathResult& result);

/// Structured trajectory export (initial state, flags, events).
std::string format_trajectory(const TrajectoryRecord& record);
/// One event per row: index,time,cylinder,image...,normal...,position...,velocity...
std::string format_trajectory_csv(const TrajectoryRecord& record);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace cylbill

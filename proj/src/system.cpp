#include "cylbill/system.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cylbill {

namespace {

Mat generator_columns(const CylinderSpec& c, const Lattice& lattice) {
  const int d = lattice.dim();
  if (c.generator_real) {
    if (c.generator_real->rows() != d) throw DimensionError("cylinder: real generator has wrong dimension");
    return *c.generator_real;
  }
  Mat cols(d, static_cast<long>(c.generator_coeffs.size()));
  for (std::size_t j = 0; j < c.generator_coeffs.size(); ++j) {
    if (c.generator_coeffs[j].size() != d)
      throw DimensionError("cylinder: generator coefficient vector has wrong length");
    cols.col(static_cast<long>(j)) = lattice.point(c.generator_coeffs[j]);
  }
  return cols;
}

}  // namespace

CylindricBilliardSystem::CylindricBilliardSystem(Lattice lattice, std::vector<CylinderSpec> cylinders,
                                                 bool interior_connected_asserted)
    : lattice_(std::move(lattice)),
      cylinders_(std::move(cylinders)),
      interior_connected_asserted_(interior_connected_asserted) {
  const int d = lattice_.dim();
  for (auto& c : cylinders_) {
    if (c.translation.size() == 0) c.translation = Vec::Zero(d);
    if (c.translation.size() != d) throw DimensionError("cylinder: translation has wrong dimension");
    for (long i = 0; i < d; ++i) {
      c.translation(i) -= std::floor(c.translation(i));
      if (c.translation(i) >= 1.0) c.translation(i) = 0.0;
    }
    Subspace a = orthonormalize(generator_columns(c, lattice_));
    bases_.push_back(complement(a));
    generators_.push_back(std::move(a));
  }
}

const CylinderSpec& CylindricBilliardSystem::cylinder(int i) const {
  if (i < 0 || i >= size()) throw std::out_of_range("cylinder index " + std::to_string(i) + " out of range");
  return cylinders_[static_cast<std::size_t>(i)];
}

const Subspace& CylindricBilliardSystem::generator_space(int i) const {
  cylinder(i);
  return generators_[static_cast<std::size_t>(i)];
}

const Subspace& CylindricBilliardSystem::base_space(int i) const {
  cylinder(i);
  return bases_[static_cast<std::size_t>(i)];
}

Vec CylindricBilliardSystem::translation_vector(int i) const { return lattice_.point(cylinder(i).translation); }

double CylindricBilliardSystem::max_radius() const {
  double r = 0.0;
  for (const auto& c : cylinders_) r = std::max(r, c.radius);
  return r;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    if (v.cylinder >= 0) os << "cylinder " << v.cylinder << ": ";
    os << v.what << '\n';
  }
  return os.str();
}

ValidationReport validate(const CylindricBilliardSystem& system) {
  ValidationReport report;
  const int d = system.dim();
  if (d < 2) report.violations.push_back({-1, "dimension must be at least 2"});
  for (int i = 0; i < system.size(); ++i) {
    const CylinderSpec& c = system.cylinder(i);
    if (!(c.radius > 0.0) || !std::isfinite(c.radius))
      report.violations.push_back({i, "radius must be positive"});
    if (c.generator_real && !c.generator_coeffs.empty())
      report.violations.push_back({i, "both integer and real generators given"});
    const long declared = c.generator_real ? c.generator_real->cols()
                                           : static_cast<long>(c.generator_coeffs.size());
    if (system.generator_space(i).dim() != declared)
      report.violations.push_back({i, "generator coefficients are not of full column rank"});
    const int dim_l = system.base_space(i).dim();
    if (dim_l < 2)
      report.violations.push_back({i, "dim L = " + std::to_string(dim_l) + " < 2"});
  }
  return report;
}

}  // namespace cylbill

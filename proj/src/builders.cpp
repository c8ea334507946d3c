#include "cylbill/builders.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cylbill {

namespace {

Mat generator_vectors(const CylindricBilliardSystem& s, int i) {
  const CylinderSpec& c = s.cylinder(i);
  if (c.generator_real) return *c.generator_real;
  Mat cols(s.dim(), static_cast<long>(c.generator_coeffs.size()));
  for (std::size_t j = 0; j < c.generator_coeffs.size(); ++j)
    cols.col(static_cast<long>(j)) = s.lattice().point(c.generator_coeffs[j]);
  return cols;
}

Vec fractional(const Vec& coords) {
  Vec out = coords;
  for (long i = 0; i < out.size(); ++i) {
    out(i) -= std::floor(out(i));
    if (out(i) >= 1.0) out(i) = 0.0;
  }
  return out;
}

}  // namespace

SubBilliard sub_billiard(const CylindricBilliardSystem& system, std::span<const int> indices) {
  if (indices.empty()) throw BuildError("sub_billiard: index set is empty");
  const int d = system.dim();
  SubBilliard out;
  out.indices = distinct_labels(indices);
  std::vector<Subspace> bases;
  for (int i : out.indices) bases.push_back(system.base_space(i));
  out.e_plus = span_of(bases, d);
  out.e0 = complement(out.e_plus);
  const int dp = out.e_plus.dim();
  out.frame = dp == d ? Mat(Mat::Identity(d, d)) : out.e_plus.basis();

  // P_{E+}(L) is a lattice exactly when E0 is a lattice subspace.
  const Mat projected = out.frame.transpose() * system.lattice().basis();
  GeneratorReduction red = reduce_generators(projected);
  if (!red.ok || red.basis.cols() != dp) {
    throw BuildError("sub_billiard: E0 = ∩ A_i failed the lattice-subspace check (projected lattice is not "
                     "discrete to working precision)");
  }
  out.e0_lattice_rank = d - dp;
  Mat reduced = red.basis;
  const double scale = reduced.cwiseAbs().maxCoeff();
  reduced = reduced.unaryExpr([scale](double x) { return std::abs(x) < 1e-14 * scale ? 0.0 : x; });
  Lattice lattice(reduced);

  std::vector<CylinderSpec> cylinders;
  for (int i : out.indices) {
    CylinderSpec c;
    c.radius = system.radius(i);
    c.translation = fractional(lattice.coordinates(out.frame.transpose() * system.translation_vector(i)));
    const Mat gens = out.frame.transpose() * generator_vectors(system, i);
    const int target = system.generator_space(i).dim() - (d - dp);
    bool integral = target == 0;
    if (!integral && !system.cylinder(i).generator_real) {
      GeneratorReduction g = reduce_generators(gens);
      if (g.ok && g.basis.cols() == target) {
        integral = true;
        for (long j = 0; j < g.basis.cols() && integral; ++j) {
          auto coeffs = lattice.integer_coordinates(g.basis.col(j));
          if (!coeffs) {
            integral = false;
            break;
          }
          c.generator_coeffs.push_back(*coeffs);
        }
      }
    }
    if (!integral) {
      c.generator_coeffs.clear();
      c.generator_real = orthonormalize(gens).basis();
      c.provenance = "projected generator P_E+(A_" + std::to_string(i) + "), real basis";
    } else {
      c.provenance = "projected generator P_E+(A_" + std::to_string(i) + ")";
    }
    cylinders.push_back(std::move(c));
  }
  out.system = CylindricBilliardSystem(std::move(lattice), std::move(cylinders),
                                       system.interior_connected_asserted());
  if (dp < d) {
    out.notes.push_back("factor torus R^d/(L+E0) represented as E+/P_E+(L); translations are taken "
                        "in the component through 0, a finite covering may separate the two");
  }
  return out;
}

void check_params(const HardBallParams& p) {
  if (p.n < 2) throw BuildError("hard balls: need N >= 2");
  if (p.nu < 2) throw BuildError("hard balls: need nu >= 2");
  if (static_cast<int>(p.masses.size()) != p.n) throw BuildError("hard balls: need one mass per ball");
  for (double m : p.masses)
    if (!(m > 0.0)) throw BuildError("hard balls: masses must be positive");
  if (!(p.r > 0.0)) throw BuildError("hard balls: radius must be positive");
}

double hard_ball_pair_radius(double r, double mi, double mj) { return 2.0 * r * std::sqrt(mi * mj / (mi + mj)); }

CylindricBilliardSystem hard_ball_unreduced(const HardBallParams& p) {
  check_params(p);
  const int d = p.nu * p.n;
  Mat basis = Mat::Zero(d, d);
  for (int ball = 0; ball < p.n; ++ball)
    for (int c = 0; c < p.nu; ++c)
      basis(ball * p.nu + c, ball * p.nu + c) = std::sqrt(p.masses[static_cast<std::size_t>(ball)]);

  std::vector<CylinderSpec> cylinders;
  for (int i = 0; i < p.n; ++i) {
    for (int j = i + 1; j < p.n; ++j) {
      CylinderSpec cyl;
      // Integer basis of A_ij ∩ Z^{νN}: e_i + e_j and e_k (k ≠ i, j) per coordinate.
      for (int c = 0; c < p.nu; ++c) {
        IntVec v = IntVec::Zero(d);
        v(i * p.nu + c) = 1;
        v(j * p.nu + c) = 1;
        cyl.generator_coeffs.push_back(v);
        for (int k = 0; k < p.n; ++k) {
          if (k == i || k == j) continue;
          IntVec e = IntVec::Zero(d);
          e(k * p.nu + c) = 1;
          cyl.generator_coeffs.push_back(e);
        }
      }
      cyl.radius = hard_ball_pair_radius(p.r, p.masses[static_cast<std::size_t>(i)],
                                         p.masses[static_cast<std::size_t>(j)]);
      cyl.translation = Vec::Zero(d);
      cyl.provenance = "hard balls " + std::to_string(i) + "-" + std::to_string(j);
      cylinders.push_back(std::move(cyl));
    }
  }
  return CylindricBilliardSystem(Lattice(basis), std::move(cylinders));
}

HardBallBuild hard_ball_system(const HardBallParams& p) {
  HardBallBuild out;
  out.params = p;
  const CylindricBilliardSystem full = hard_ball_unreduced(p);
  std::vector<int> all(static_cast<std::size_t>(full.size()));
  for (int i = 0; i < full.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < p.n; ++i)
    for (int j = i + 1; j < p.n; ++j) out.pairs.emplace_back(i, j);
  SubBilliard reduced = sub_billiard(full, all);
  out.frame = reduced.frame;
  out.system = std::move(reduced.system);
  out.notes = std::move(reduced.notes);
  out.notes.push_back("coordinates x_i = sqrt(m_i) q_i; reduced space Z = {sum m_i v_i = 0}");
  return out;
}

PhasePoint hard_ball_phase(const HardBallBuild& build, const Mat& positions, const Mat& velocities) {
  const auto& p = build.params;
  if (positions.rows() != p.n || positions.cols() != p.nu || velocities.rows() != p.n ||
      velocities.cols() != p.nu)
    throw DimensionError("hard_ball_phase: expected N x nu position and velocity arrays");
  Vec x(p.n * p.nu), w(p.n * p.nu);
  for (int b = 0; b < p.n; ++b) {
    const double s = std::sqrt(p.masses[static_cast<std::size_t>(b)]);
    for (int c = 0; c < p.nu; ++c) {
      x(b * p.nu + c) = s * positions(b, c);
      w(b * p.nu + c) = s * velocities(b, c);
    }
  }
  PhasePoint out;
  out.q = build.system.lattice().wrap(build.frame.transpose() * x);
  out.v = build.frame.transpose() * w;
  const double speed = out.v.norm();
  if (!(speed > 0.0)) throw std::invalid_argument("hard_ball_phase: zero relative velocity");
  out.v /= speed;
  return out;
}

DirectSumBuild direct_sum_system(const std::vector<int>& block_dims, const std::vector<Subspace>& bases,
                                 const std::vector<double>& radii, const std::vector<Vec>& translations) {
  if (bases.empty()) throw BuildError("direct sum: no blocks");
  const int d = bases.front().ambient_dim();
  const std::size_t k = bases.size();
  if (radii.size() != k) throw BuildError("direct sum: need one radius per block");
  if (!translations.empty() && translations.size() != k)
    throw BuildError("direct sum: need one translation per block");
  if (!block_dims.empty() && block_dims.size() != k) throw BuildError("direct sum: block_dims length mismatch");
  int total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (bases[i].ambient_dim() != d) throw BuildError("direct sum: blocks in different ambient spaces");
    if (!block_dims.empty() && block_dims[i] != bases[i].dim())
      throw BuildError("direct sum: block " + std::to_string(i) + " has dimension " +
                       std::to_string(bases[i].dim()) + ", declared " + std::to_string(block_dims[i]));
    total += bases[i].dim();
  }
  if (total != d || span_of(bases, d).dim() != d)
    throw BuildError("direct sum: base spaces do not form a direct sum of R^" + std::to_string(d));

  // K_i = ∩_{j≠i} A_j; then R^d = ⊕ K_i and A_i = ⊕_{j≠i} K_j.
  Mat lattice_basis(d, d);
  std::vector<std::pair<long, long>> ranges;
  long at = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<Subspace> others;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) others.push_back(bases[j]);
    const Subspace ki = complement(span_of(others, d));
    if (ki.dim() != bases[i].dim()) throw BuildError("direct sum: dual block has the wrong dimension");
    lattice_basis.middleCols(at, ki.dim()) = ki.basis();
    ranges.emplace_back(at, ki.dim());
    at += ki.dim();
  }
  Lattice lattice(lattice_basis);
  std::vector<CylinderSpec> cylinders;
  for (std::size_t i = 0; i < k; ++i) {
    CylinderSpec c;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      for (long col = 0; col < ranges[j].second; ++col) {
        IntVec e = IntVec::Zero(d);
        e(ranges[j].first + col) = 1;
        c.generator_coeffs.push_back(e);
      }
    }
    c.radius = radii[i];
    c.translation = translations.empty() ? Vec(Vec::Zero(d)) : lattice.coordinates(translations[i]);
    c.provenance = "direct-sum block " + std::to_string(i);
    cylinders.push_back(std::move(c));
  }
  DirectSumBuild out{CylindricBilliardSystem(std::move(lattice), std::move(cylinders)), {}};
  for (std::size_t i = 0; i < k; ++i) {
    if (projector_distance(out.system.base_space(static_cast<int>(i)), bases[i]) > 1e-9)
      throw std::logic_error("direct sum: derived base space differs from the supplied one");
  }
  out.graph = non_orthogonality_graph(bases);
  return out;
}

}  // namespace cylbill

#pragma once

// Random instance generators and independent oracles shared by the tests.

#include "cylbill/builders.hpp"
#include "cylbill/euclid_paths.hpp"
#include "cylbill/system.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace testing {

using namespace cylbill;
using Rng = std::mt19937_64;

inline Vec gaussian(Rng& rng, long n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (long i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

inline Vec unit(Rng& rng, long n) {
  Vec v = gaussian(rng, n);
  return v / v.norm();
}

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Rank by Gaussian elimination with partial pivoting on the rows; an
/// oracle independent of the SVD used by the library.
inline int row_reduction_rank(Mat m, double tol = 1e-9) {
  int rank = 0;
  const long rows = m.rows(), cols = m.cols();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (long c = 0; c < cols && rank < rows; ++c) {
    long piv = rank;
    for (long r = rank + 1; r < rows; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (std::abs(m(piv, c)) <= tol * scale) continue;
    m.row(piv).swap(m.row(rank));
    for (long r = rank + 1; r < rows; ++r) m.row(r) -= (m(r, c) / m(rank, c)) * m.row(rank);
    ++rank;
  }
  return rank;
}

/// Random subspace of the given dimension.
inline Subspace random_subspace(Rng& rng, int d, int k) {
  std::vector<Vec> vs;
  for (int i = 0; i < k; ++i) vs.push_back(gaussian(rng, d));
  return orthonormalize(vs, d);
}

/// Random integer matrix d x k of full column rank, entries in [-2, 2].
inline std::vector<IntVec> random_integer_generators(Rng& rng, int d, int k) {
  for (;;) {
    std::vector<IntVec> out;
    Mat m(d, k);
    for (int j = 0; j < k; ++j) {
      IntVec v(d);
      for (int i = 0; i < d; ++i) v(i) = uniform_int(rng, -2, 2);
      out.push_back(v);
      m.col(j) = v.cast<double>();
    }
    if (k == 0 || row_reduction_rank(m) == k) return out;
  }
}

/// Random valid system on Z^d (or a random unimodular-ish lattice when
/// skew) with k cylinders; generator dimension in [0, d-2].
inline CylindricBilliardSystem random_system(Rng& rng, int d, int k, bool skew = false, double rmin = 0.05,
                                             double rmax = 0.2) {
  Mat basis = Mat::Identity(d, d);
  if (skew)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j) basis(i, j) = uniform(rng, -0.3, 0.3);
  std::vector<CylinderSpec> cyls;
  for (int c = 0; c < k; ++c) {
    CylinderSpec s;
    s.generator_coeffs = random_integer_generators(rng, d, uniform_int(rng, 0, d - 2));
    s.radius = uniform(rng, rmin, rmax);
    s.translation = Vec(d);
    for (int i = 0; i < d; ++i) s.translation(i) = uniform(rng, 0.0, 1.0);
    cyls.push_back(std::move(s));
  }
  return CylindricBilliardSystem(Lattice(basis), std::move(cyls));
}

/// Random label sequence of length m over k cylinders.
inline SymbolicSequence random_sigma(Rng& rng, int k, int m) {
  SymbolicSequence s;
  for (int j = 0; j < m; ++j) s.push_back(uniform_int(rng, 0, k - 1));
  return s;
}

/// A random path spec for Σ that traces, built with the constructive
/// sampler. Returns nullopt after many failures.
inline std::optional<EuclideanPathSpec> random_spec(const CylindricBilliardSystem& system,
                                                    const SymbolicSequence& sigma, Rng& rng) {
  SamplingOptions opt;
  opt.measure = SamplingMeasure::constructive;
  opt.min_flight = 0.3;
  opt.max_flight = 1.5;
  for (int attempt = 0; attempt < 20; ++attempt) {
    auto s = sample_path(system, sigma, rng(), opt);
    if (s.ok) return s.spec;
  }
  return std::nullopt;
}

/// Time of first entry of the ray p + s v into the cylinder
/// {x : |P_L(x - a)| < r}: stepping on a grid of `dt`, then bisection.
inline std::optional<double> first_entry_by_stepping(const Mat& lb, double r, const Vec& p, const Vec& v,
                                                     const Vec& a, double s_max, double dt = 1e-6) {
  auto f = [&](double s) { return (lb.transpose() * (p + s * v - a)).norm() - r; };
  double prev = 0.0;
  // skip the departure instant
  for (double s = dt; s <= s_max; s += dt) {
    if (f(s) < 0.0) {
      double lo = prev, hi = s;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = s;
  }
  return std::nullopt;
}

/// Two orthogonal 2-dim spherical blocks in R^4 on Z^4.
inline CylindricBilliardSystem orthogonal_pair(double r = 0.2) {
  std::vector<CylinderSpec> cyls(2);
  // Block 1 base = span(e1, e2) => generator span(e3, e4), and vice versa.
  cyls[0].generator_coeffs = {IntVec::Unit(4, 2), IntVec::Unit(4, 3)};
  cyls[1].generator_coeffs = {IntVec::Unit(4, 0), IntVec::Unit(4, 1)};
  cyls[0].radius = r;
  cyls[1].radius = r;
  cyls[0].translation = Vec::Constant(4, 0.5);
  cyls[1].translation = Vec::Constant(4, 0.5);
  return CylindricBilliardSystem(Lattice::integer(4), std::move(cyls));
}

/// Sinai billiard: Z^2, one disc of radius r at (1/2, 1/2).
inline CylindricBilliardSystem sinai(double r = 0.3) {
  std::vector<CylinderSpec> cyls(1);
  cyls[0].radius = r;
  cyls[0].translation = Vec::Constant(2, 0.5);
  return CylindricBilliardSystem(Lattice::integer(2), std::move(cyls));
}

/// One spherical scatterer in R^d on Z^d.
inline CylindricBilliardSystem single_sphere(int d, double r = 0.3) {
  std::vector<CylinderSpec> cyls(1);
  cyls[0].radius = r;
  cyls[0].translation = Vec::Constant(d, 0.5);
  return CylindricBilliardSystem(Lattice::integer(d), std::move(cyls));
}

struct Triple {
  CylindricBilliardSystem system;
  SymbolicSequence sigma;
  EuclideanPathSpec spec;
};

// Random (system, Σ, traced spec) triples.
inline std::vector<Triple> random_triples(Rng& rng, int count, int dmin = 2, int dmax = 4, int mmax = 4) {
  std::vector<Triple> out;
  while (static_cast<int>(out.size()) < count) {
    const int d = uniform_int(rng, dmin, dmax);
    auto sys = random_system(rng, d, uniform_int(rng, 1, 3), true);
    auto sigma = random_sigma(rng, sys.size(), uniform_int(rng, 1, mmax));
    auto spec = random_spec(sys, sigma, rng);
    if (spec) out.push_back({std::move(sys), std::move(sigma), std::move(*spec)});
  }
  return out;
}

// Subspace accuracy of an FD matrix: relative error 1e-8 amplified by the
// conditioning of its numerically nonzero part.
inline double fd_tol(const Mat& m, double floor = 1e-8) {
  const Vec sv = Eigen::JacobiSVD<Mat>(m).singularValues();
  if (sv.size() == 0 || sv(0) < 1e-7) return floor;
  double smallest = sv(0);
  for (long i = 0; i < sv.size(); ++i)
    if (sv(i) > tol::fd_rank_rel * sv(0)) smallest = sv(i);
  return std::max(floor, 1e-8 * sv(0) / smallest);
}

inline double containment_residual(const Mat& cols, const Subspace& s) {
  double worst = 0.0;
  for (long j = 0; j < cols.cols(); ++j) worst = std::max(worst, (cols.col(j) - s.project(Vec(cols.col(j)))).norm());
  return worst;
}

}  // namespace testing

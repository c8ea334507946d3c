#include "cylbill/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace cylbill {

namespace {

constexpr int kMaxReductionSteps = 200000;

// Gram–Schmidt data for the first `count` vectors. Vectors whose GS
// component is numerically zero get bstar = 0 and mu(., j) = 0.
struct GramSchmidt {
  Mat bstar;
  Vec norms2;
  Mat mu;
};

GramSchmidt gram_schmidt(const std::vector<Vec>& b, int count, double zero2) {
  const long d = count > 0 ? b[0].size() : 0;
  GramSchmidt gs{Mat::Zero(d, count), Vec::Zero(count), Mat::Identity(count, count)};
  for (int i = 0; i < count; ++i) {
    Vec w = b[i];
    for (int j = 0; j < i; ++j) {
      if (gs.norms2(j) <= zero2) {
        gs.mu(i, j) = 0.0;
        continue;
      }
      gs.mu(i, j) = b[i].dot(gs.bstar.col(j)) / gs.norms2(j);
      w -= gs.mu(i, j) * gs.bstar.col(j);
    }
    const double n2 = w.squaredNorm();
    if (n2 <= zero2) {
      gs.norms2(i) = 0.0;
    } else {
      gs.norms2(i) = n2;
      gs.bstar.col(i) = w;
    }
  }
  return gs;
}

}  // namespace

GeneratorReduction reduce_generators(const Mat& generators, double rel_tol, double delta) {
  GeneratorReduction out;
  const long d = generators.rows();
  const long n = generators.cols();
  double scale = 0.0;
  for (long j = 0; j < n; ++j) scale = std::max(scale, generators.col(j).norm());
  if (n == 0 || scale == 0.0) {
    out.basis = Mat(d, 0);
    out.transform = IntMat(n, 0);
    out.ok = true;
    return out;
  }
  const double eps = rel_tol * scale;
  const double zero2 = eps * eps;

  std::vector<IntVec> t;
  std::vector<Vec> b;
  for (long j = 0; j < n; ++j) {
    if (generators.col(j).norm() < eps) continue;
    IntVec e = IntVec::Zero(n);
    e(j) = 1;
    t.push_back(e);
    b.push_back(generators.col(j));
  }
  auto refresh = [&](int k) { b[k] = generators * t[k].cast<double>(); };

  int k = 1;
  int steps = 0;
  bool converged = true;
  while (k < static_cast<int>(b.size())) {
    if (++steps > kMaxReductionSteps) {
      converged = false;
      break;
    }
    GramSchmidt gs = gram_schmidt(b, k + 1, zero2);
    for (int j = k - 1; j >= 0; --j) {
      if (gs.norms2(j) <= zero2) continue;
      const double q = std::round(gs.mu(k, j));
      if (q == 0.0) continue;
      t[k] -= static_cast<long long>(q) * t[j];
      refresh(k);
      for (int l = 0; l <= j; ++l) gs.mu(k, l) -= q * gs.mu(j, l);
    }
    if (b[k].norm() < eps) {
      b.erase(b.begin() + k);
      t.erase(t.begin() + k);
      continue;
    }
    gs = gram_schmidt(b, k + 1, zero2);
    const double mu = gs.mu(k, k - 1);
    if (gs.norms2(k) < (delta - mu * mu) * gs.norms2(k - 1)) {
      std::swap(b[k], b[k - 1]);
      std::swap(t[k], t[k - 1]);
      k = std::max(k - 1, 1);
    } else {
      ++k;
    }
  }
  // A single surviving vector may still be dependent only when it is zero.
  if (b.size() == 1 && b[0].norm() < eps) {
    b.clear();
    t.clear();
  }

  out.basis = Mat(d, static_cast<long>(b.size()));
  out.transform = IntMat(n, static_cast<long>(t.size()));
  for (std::size_t i = 0; i < b.size(); ++i) {
    out.basis.col(static_cast<long>(i)) = b[i];
    out.transform.col(static_cast<long>(i)) = t[i];
  }
  if (!converged) return out;

  // Verify: independent basis and every generator an integer combination.
  const int rank = numerical_rank(generators, 1e-9);
  if (out.basis.cols() != rank) return out;
  if (rank == 0) {
    out.ok = true;
    return out;
  }
  Eigen::ColPivHouseholderQR<Mat> qr(out.basis);
  for (long j = 0; j < n; ++j) {
    const Vec c = qr.solve(Vec(generators.col(j)));
    const Vec rounded = c.array().round();
    if ((c - rounded).cwiseAbs().maxCoeff() > 1e-6) return out;
    if ((out.basis * rounded - generators.col(j)).norm() > 1e-7 * scale) return out;
  }
  out.ok = true;
  return out;
}

Lattice::Lattice(Mat basis) : basis_(std::move(basis)) {
  if (basis_.rows() != basis_.cols() || basis_.rows() < 1) {
    throw DimensionError("Lattice: basis must be a non-empty square matrix");
  }
  det_ = basis_.determinant();
  if (!(std::abs(det_) > 1e-12)) throw std::invalid_argument("Lattice: basis is singular");
  inverse_ = basis_.inverse();
  GeneratorReduction red = reduce_generators(basis_);
  if (!red.ok || red.basis.cols() != basis_.cols()) {
    reduced_ = basis_;
    reduction_transform_ = IntMat::Identity(dim(), dim());
  } else {
    reduced_ = red.basis;
    reduction_transform_ = red.transform;
  }
  // Diameter of the parallelepiped: max over sign vectors of ||B s||.
  const int d = dim();
  if (d <= 16) {
    double best = 0.0;
    const unsigned long combos = 1ul << (d - 1);
    for (unsigned long mask = 0; mask < combos; ++mask) {
      Vec s(d);
      for (int i = 0; i < d; ++i) s(i) = ((mask >> i) & 1ul) ? -1.0 : 1.0;
      best = std::max(best, (basis_ * s).norm());
    }
    diameter_ = best;
  } else {
    diameter_ = 0.0;
    for (int i = 0; i < d; ++i) diameter_ += basis_.col(i).norm();
  }
}

Vec Lattice::wrap(const Vec& x, IntVec* shift) const {
  const Vec c = inverse_ * x;
  IntVec k(c.size());
  for (long i = 0; i < c.size(); ++i) k(i) = static_cast<long long>(std::floor(c(i)));
  if (shift) *shift = k;
  return x - basis_ * k.cast<double>();
}

std::optional<IntVec> Lattice::integer_coordinates(const Vec& x, double tol) const {
  const Vec c = inverse_ * x;
  IntVec k(c.size());
  for (long i = 0; i < c.size(); ++i) {
    const double r = std::round(c(i));
    if (std::abs(c(i) - r) > tol) return std::nullopt;
    k(i) = static_cast<long long>(r);
  }
  return k;
}

std::vector<double> short_vector_norms(const Mat& basis, double radius) {
  const long k = basis.cols();
  std::vector<double> out;
  if (k == 0) return out;
  GeneratorReduction red = reduce_generators(basis);
  const Mat b = red.ok ? red.basis : basis;
  // Coefficient box from ||x|| <= radius: |c_i| <= radius * ||row_i(B^+)||.
  const Mat pinv = b.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<long long> bound(k);
  for (long i = 0; i < k; ++i)
    bound[i] = static_cast<long long>(std::floor(radius * pinv.row(i).norm() + 1e-9));
  IntVec c = IntVec::Zero(k);
  std::function<void(long)> rec = [&](long i) {
    if (i == k) {
      if (c.isZero()) return;
      const double n = (b * c.cast<double>()).norm();
      if (n <= radius) out.push_back(n);
      return;
    }
    for (long long v = -bound[i]; v <= bound[i]; ++v) {
      c(i) = v;
      rec(i + 1);
    }
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cylbill

#include "cylbill/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace cylbill {

namespace {

void require_dim(int expected, long actual, const char* what) {
  if (expected != actual) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(actual) +
                         " does not match " + std::to_string(expected));
  }
}

}  // namespace

Subspace::Subspace(int ambient_dim) : ambient_dim_(ambient_dim), basis_(ambient_dim, 0) {
  if (ambient_dim < 1) throw DimensionError("Subspace: ambient dimension must be positive");
}

Subspace Subspace::full(int ambient_dim) {
  Subspace s(ambient_dim);
  s.basis_ = Mat::Identity(ambient_dim, ambient_dim);
  return s;
}

Subspace Subspace::from_orthonormal(Mat basis) {
  Subspace s(static_cast<int>(basis.rows()));
  if (basis.cols() > basis.rows()) throw DimensionError("Subspace: more basis vectors than dimensions");
  s.basis_ = std::move(basis);
  if (s.orthonormality_defect() > 1e-10) {
    throw std::invalid_argument("Subspace: basis is not orthonormal");
  }
  return s;
}

Vec Subspace::project(const Vec& v) const {
  require_dim(ambient_dim_, v.size(), "project");
  return basis_ * (basis_.transpose() * v);
}

double Subspace::residual(const Vec& v) const { return (v - project(v)).norm(); }

double Subspace::containment_residual(const Subspace& other) const {
  require_dim(ambient_dim_, other.ambient_dim(), "containment");
  double worst = 0.0;
  for (int j = 0; j < other.dim(); ++j) worst = std::max(worst, residual(other.basis().col(j)));
  return worst;
}

double Subspace::orthonormality_defect() const {
  if (dim() == 0) return 0.0;
  const Mat gram = basis_.transpose() * basis_;
  return (gram - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff();
}

Subspace orthonormalize(std::span<const Vec> vectors, int ambient_dim) {
  if (vectors.empty()) {
    if (ambient_dim < 1) throw DimensionError("orthonormalize: empty input needs an ambient dimension");
    return Subspace(ambient_dim);
  }
  const int d = static_cast<int>(vectors.front().size());
  if (ambient_dim >= 1) require_dim(ambient_dim, d, "orthonormalize");
  Mat cols(d, static_cast<long>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    require_dim(d, vectors[i].size(), "orthonormalize");
    cols.col(static_cast<long>(i)) = vectors[i];
  }
  return orthonormalize(cols);
}

Subspace orthonormalize(const Mat& columns) {
  const int d = static_cast<int>(columns.rows());
  Mat q(d, std::min<long>(d, columns.cols()));
  int k = 0;
  for (long j = 0; j < columns.cols() && k < d; ++j) {
    Vec w = columns.col(j);
    // Two projection passes ("twice is enough").
    for (int pass = 0; pass < 2; ++pass) {
      if (k > 0) w -= q.leftCols(k) * (q.leftCols(k).transpose() * w);
    }
    const double n = w.norm();
    if (n < tol::drop) continue;
    q.col(k++) = w / n;
  }
  return Subspace::from_orthonormal(q.leftCols(k));
}

Vec project(const Subspace& s, const Vec& v) { return s.project(v); }

Subspace complement(const Subspace& s) {
  const int d = s.ambient_dim();
  if (s.dim() == 0) return Subspace::full(d);
  if (s.dim() == d) return Subspace::zero(d);
  Eigen::HouseholderQR<Mat> qr(s.basis());
  Mat full_q = qr.householderQ() * Mat::Identity(d, d);
  return Subspace::from_orthonormal(full_q.rightCols(d - s.dim()));
}

Subspace span_of(std::span<const Subspace> parts, int ambient_dim) {
  if (parts.empty()) {
    if (ambient_dim < 1) throw DimensionError("span_of: empty input needs an ambient dimension");
    return Subspace(ambient_dim);
  }
  const int d = parts.front().ambient_dim();
  if (ambient_dim >= 1) require_dim(ambient_dim, d, "span_of");
  long total = 0;
  for (const auto& p : parts) {
    require_dim(d, p.ambient_dim(), "span_of");
    total += p.dim();
  }
  Mat cols(d, total);
  long at = 0;
  for (const auto& p : parts) {
    cols.middleCols(at, p.dim()) = p.basis();
    at += p.dim();
  }
  return orthonormalize(cols);
}

Subspace intersect(std::span<const Subspace> parts, int ambient_dim) {
  if (parts.empty()) {
    if (ambient_dim < 1) throw DimensionError("intersect: empty input needs an ambient dimension");
    return Subspace::full(ambient_dim);
  }
  std::vector<Subspace> comps;
  comps.reserve(parts.size());
  for (const auto& p : parts) comps.push_back(complement(p));
  return complement(span_of(comps, ambient_dim));
}

int numerical_rank(const Mat& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (long i = 0; i < s.size(); ++i)
    if (s(i) >= rel_tol * s(0)) ++r;
  return r;
}

Subspace column_space(const Mat& m, double rel_tol) {
  const int d = static_cast<int>(m.rows());
  if (m.cols() == 0) return Subspace(d);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int r = 0;
  if (s(0) > 0.0)
    for (long i = 0; i < s.size(); ++i)
      if (s(i) >= rel_tol * s(0)) ++r;
  return orthonormalize(Mat(svd.matrixU().leftCols(r)));
}

Subspace null_space(const Mat& m, double rel_tol) {
  const int n = static_cast<int>(m.cols());
  if (m.rows() == 0) return Subspace::full(n);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int r = 0;
  if (s.size() > 0 && s(0) > 0.0)
    for (long i = 0; i < s.size(); ++i)
      if (s(i) >= rel_tol * s(0)) ++r;
  return orthonormalize(Mat(svd.matrixV().rightCols(n - r)));
}

double projector_distance(const Subspace& a, const Subspace& b) {
  require_dim(a.ambient_dim(), b.ambient_dim(), "projector_distance");
  return (a.projector() - b.projector()).cwiseAbs().maxCoeff();
}

double max_cosine(const Subspace& a, const Subspace& b) {
  require_dim(a.ambient_dim(), b.ambient_dim(), "max_cosine");
  if (a.dim() == 0 || b.dim() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a.basis().transpose() * b.basis());
  return svd.singularValues()(0);
}

bool orthogonal(const Subspace& a, const Subspace& b, double tol) {
  return max_cosine(a, b) <= tol;
}

}  // namespace cylbill

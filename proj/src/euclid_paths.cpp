#include "cylbill/euclid_paths.hpp"

#include "cylbill/classifier.hpp"
#include "path_step.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace cylbill {

const char* to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::ok: return "ok";
    case TraceStatus::no_real_root: return "no-real-root";
    case TraceStatus::tangential: return "tangential";
    case TraceStatus::non_advancing: return "non-advancing";
    case TraceStatus::invalid_spec: return "invalid-spec";
  }
  return "unknown";
}

namespace detail {

StepResult step_to_cylinder(const Mat& lb, double r, const Vec& p, const Vec& v, const Vec& a,
                            const PathOptions& opt) {
  StepResult out;
  const Vec w = lb.transpose() * (p - a);
  const Vec u = lb.transpose() * v;
  const double qa = u.squaredNorm();
  const double qb = w.dot(u);
  const double qc = w.squaredNorm() - r * r;
  if (qa < 1e-28) {
    out.status = TraceStatus::no_real_root;
    return out;
  }
  const double disc = qb * qb - qa * qc;
  // r^2 minus the squared closest approach of the line to the axis.
  const double h2 = disc / qa;
  if (h2 < -opt.disc_tol * r * r) {
    out.status = TraceStatus::no_real_root;
    return out;
  }
  if (h2 <= opt.disc_tol * r * r) {
    out.status = TraceStatus::tangential;
    return out;
  }
  const double sq = std::sqrt(disc);
  const double q = -(qb + std::copysign(sq, qb));
  double s1 = q / qa;
  double s2 = q != 0.0 ? qc / q : s1;
  if (s2 < s1) std::swap(s1, s2);
  out.larger_root = s2;
  if (s1 <= opt.t_min_gap) {
    out.status = TraceStatus::non_advancing;
    return out;
  }
  out.s = s1;
  out.point = p + s1 * v;
  Vec n = lb * (w + s1 * u);
  n /= n.norm();
  out.normal = n;
  out.velocity = v - 2.0 * v.dot(n) * n;
  return out;
}

}  // namespace detail

Vec offset_vector(const CylindricBilliardSystem& system, std::span<const int> sigma,
                  const EuclideanPathSpec& spec, int j) {
  return system.base_space(sigma[static_cast<std::size_t>(j)]).basis() * spec.offsets[static_cast<std::size_t>(j)];
}

std::string check_spec(const CylindricBilliardSystem& system, std::span<const int> sigma,
                       const EuclideanPathSpec& spec) {
  const int d = system.dim();
  if (spec.v0.size() != d) return "V0 has dimension " + std::to_string(spec.v0.size()) + ", expected " +
                                  std::to_string(d);
  if (std::abs(spec.v0.norm() - 1.0) > 1e-12) return "V0 is not a unit vector";
  if (spec.offsets.size() != sigma.size())
    return "expected " + std::to_string(sigma.size()) + " offsets, got " + std::to_string(spec.offsets.size());
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (sigma[j] < 0 || sigma[j] >= system.size()) return "label " + std::to_string(sigma[j]) + " out of range";
    const int nu = system.base_space(sigma[j]).dim();
    if (spec.offsets[j].size() != nu)
      return "offset " + std::to_string(j) + " has " + std::to_string(spec.offsets[j].size()) +
             " base coordinates, expected " + std::to_string(nu);
  }
  return {};
}

EuclideanPathResult trace(const CylindricBilliardSystem& system, std::span<const int> sigma,
                          const EuclideanPathSpec& spec, const PathOptions& opt) {
  EuclideanPathResult out;
  if (!check_spec(system, sigma, spec).empty()) {
    out.status = TraceStatus::invalid_spec;
    return out;
  }
  Vec p = Vec::Zero(system.dim());
  Vec v = spec.v0;
  double t = 0.0;
  out.velocities.push_back(v);
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    const int c = sigma[j];
    const Mat& lb = system.base_space(c).basis();
    const auto step = detail::step_to_cylinder(lb, system.radius(c), p, v, lb * spec.offsets[j], opt);
    if (step.status != TraceStatus::ok) {
      out.status = step.status;
      out.failed_at = static_cast<int>(j);
      return out;
    }
    t += step.s;
    p = step.point;
    v = step.velocity;
    out.times.push_back(t);
    out.points.push_back(p);
    out.normals.push_back(step.normal);
    out.velocities.push_back(v);
  }
  return out;
}

EuclideanPathSpec translate_all(const CylindricBilliardSystem& system, std::span<const int> sigma,
                                const EuclideanPathSpec& spec, const Vec& a) {
  EuclideanPathSpec out = spec;
  for (std::size_t j = 0; j < sigma.size(); ++j)
    out.offsets[j] += system.base_space(sigma[j]).coordinates(a);
  return out;
}

EuclideanPathSpec translate_each(const CylindricBilliardSystem& system, std::span<const int> sigma,
                                 const EuclideanPathSpec& spec, std::span<const Vec> b) {
  if (b.size() != sigma.size()) throw std::invalid_argument("translate_each: one vector per collision expected");
  EuclideanPathSpec out = spec;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    const Subspace& l = system.base_space(sigma[j]);
    if (l.residual(b[j]) > 1e-10)
      throw std::invalid_argument("translate_each: b_" + std::to_string(j) + " is not in its base space");
    out.offsets[j] += l.coordinates(b[j]);
  }
  return out;
}

Vec phi_map(const Vec& v0, std::span<const Vec> normals) {
  Vec v = v0;
  for (const Vec& n : normals) v -= 2.0 * v.dot(n) * n;
  return v;
}

namespace {

// Derivative of f at 0 by central differences. The starting step shrinks
// until h |f'| <= fd_max_change, so strongly expanding paths stay in the
// linear regime, and when a perturbed path fails to trace. With richardson
// set, Ridders' extrapolation tableau refines the estimate and keeps the
// entry with the smallest error estimate.
Vec central(const std::function<Vec(double)>& f, const PathOptions& opt) {
  auto diff = [&](double h) { return Vec((f(h) - f(-h)) / (2.0 * h)); };
  double h = opt.fd_step;
  Vec d1;
  for (;;) {
    try {
      d1 = diff(h);
      break;
    } catch (const PathError&) {
      if (h * 1e-2 < opt.fd_min_step) throw;
      h *= 1e-2;
    }
  }
  for (int it = 0; it < 8; ++it) {
    const double change = h * d1.norm();
    if (!(change > opt.fd_max_change) || h <= opt.fd_min_step) break;
    h = std::max(opt.fd_min_step, 0.5 * h * opt.fd_max_change / change);
    d1 = diff(h);
  }
  if (!opt.richardson) return d1;

  constexpr int kLevels = 8;
  constexpr double kShrink = 1.4, kShrink2 = kShrink * kShrink, kSafe = 2.0;
  std::vector<std::vector<Vec>> a(kLevels, std::vector<Vec>(kLevels));
  a[0][0] = d1;
  Vec best = d1;
  double err = std::numeric_limits<double>::infinity();
  for (int i = 1; i < kLevels; ++i) {
    h /= kShrink;
    try {
      a[0][i] = diff(h);
    } catch (const PathError&) {
      break;
    }
    double fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const double e = std::max((a[j][i] - a[j - 1][i]).norm(), (a[j][i] - a[j - 1][i - 1]).norm());
      if (e <= err) {
        err = e;
        best = a[j][i];
      }
    }
    if ((a[i][i] - a[i - 1][i - 1]).norm() >= kSafe * err) break;
  }
  return best;
}

Vec traced_final_velocity(const CylindricBilliardSystem& system, std::span<const int> sigma,
                          const EuclideanPathSpec& spec, const PathOptions& opt) {
  const auto res = trace(system, sigma, spec, opt);
  if (!res.ok())
    throw PathError(res.status, std::string("perturbed path failed to trace: ") + to_string(res.status) +
                                    " at collision " + std::to_string(res.failed_at));
  return res.final_velocity();
}

// Column space of an FD matrix; a matrix at FD noise level has none.
Subspace fd_column_space(const Mat& m, const PathOptions& opt) {
  if (m.cols() == 0 || m.cwiseAbs().maxCoeff() < 1e-7) return Subspace(static_cast<int>(m.rows()));
  return column_space(m, opt.fd_rank_rel);
}

Subspace fd_null_space(const Mat& m, const PathOptions& opt) {
  if (m.cols() == 0 || m.cwiseAbs().maxCoeff() < 1e-7) return Subspace::full(static_cast<int>(m.cols()));
  return null_space(m, opt.fd_rank_rel);
}

void require_traced(const CylindricBilliardSystem& system, std::span<const int> sigma,
                    const EuclideanPathSpec& spec, const PathOptions& opt) {
  const auto res = trace(system, sigma, spec, opt);
  if (!res.ok())
    throw PathError(res.status, std::string("path failed to trace: ") + to_string(res.status) +
                                    " at collision " + std::to_string(res.failed_at));
}

}  // namespace

Mat dVm_matrix(const CylindricBilliardSystem& system, std::span<const int> sigma, const EuclideanPathSpec& spec,
               const PathOptions& opt) {
  require_traced(system, sigma, spec, opt);
  const int d = system.dim();
  Mat m(d, d);
  for (int i = 0; i < d; ++i) {
    const Vec e = Vec::Unit(d, i);
    m.col(i) = central(
        [&](double s) { return traced_final_velocity(system, sigma, translate_all(system, sigma, spec, s * e), opt); },
        opt);
  }
  return m;
}

Mat dVm_each_matrix(const CylindricBilliardSystem& system, std::span<const int> sigma,
                    const EuclideanPathSpec& spec, const PathOptions& opt) {
  require_traced(system, sigma, spec, opt);
  long cols = 0;
  for (const auto& o : spec.offsets) cols += o.size();
  Mat m(system.dim(), cols);
  long at = 0;
  for (std::size_t j = 0; j < spec.offsets.size(); ++j) {
    for (long k = 0; k < spec.offsets[j].size(); ++k, ++at) {
      m.col(at) = central(
          [&](double s) {
            EuclideanPathSpec moved = spec;
            moved.offsets[j](k) += s;
            return traced_final_velocity(system, sigma, moved, opt);
          },
          opt);
    }
  }
  return m;
}

Subspace w_plus(const CylindricBilliardSystem& system, std::span<const int> sigma, const EuclideanPathSpec& spec,
                const PathOptions& opt) {
  return fd_column_space(dVm_matrix(system, sigma, spec, opt), opt);
}

Subspace w_plus_tilde(const CylindricBilliardSystem& system, std::span<const int> sigma,
                      const EuclideanPathSpec& spec, const PathOptions& opt) {
  return fd_column_space(dVm_each_matrix(system, sigma, spec, opt), opt);
}

NeutralSpace neutral_space(const CylindricBilliardSystem& system, std::span<const int> sigma,
                           const EuclideanPathSpec& spec, const PathOptions& opt) {
  const Mat m = dVm_matrix(system, sigma, spec, opt);
  const auto res = trace(system, sigma, spec, opt);
  NeutralSpace out;
  out.w_plus = fd_column_space(m, opt);
  out.kernel = fd_null_space(m, opt);
  // Reflections are involutions, so pulling back applies h_m first.
  std::vector<Vec> reversed(res.normals.rbegin(), res.normals.rend());
  const Subspace perp = complement(out.w_plus);
  std::vector<Vec> back;
  for (int k = 0; k < perp.dim(); ++k) back.push_back(phi_map(perp.basis().col(k), reversed));
  out.pulled_back = orthonormalize(back, system.dim());
  for (int k = 0; k < out.kernel.dim(); ++k) {
    const Vec pushed = phi_map(out.kernel.basis().col(k), res.normals);
    for (int i = 0; i < out.w_plus.dim(); ++i)
      out.orthogonality_residual = std::max(out.orthogonality_residual, std::abs(pushed.dot(out.w_plus.basis().col(i))));
  }
  out.projector_gap = projector_distance(out.kernel, out.pulled_back);
  return out;
}

ThetaRank theta_rank(const CylindricBilliardSystem& system, std::span<const int> sigma,
                     const EuclideanPathSpec& spec, const PathOptions& opt) {
  require_traced(system, sigma, spec, opt);
  const int d = system.dim();
  ThetaRank out;
  out.expected = d - 1;
  long rows = d;
  for (int c : sigma) {
    const int nu = system.base_space(c).dim();
    out.expected += nu - 1;
    rows += nu;
  }
  auto image = [&](const EuclideanPathSpec& s) {
    const auto res = trace(system, sigma, s, opt);
    if (!res.ok())
      throw PathError(res.status, std::string("perturbed path failed to trace: ") + to_string(res.status));
    Vec y(rows);
    y.head(d) = s.v0;
    long at = d;
    for (std::size_t j = 0; j < sigma.size(); ++j) {
      const Subspace& l = system.base_space(sigma[j]);
      y.segment(at, l.dim()) = l.coordinates(res.normals[j]);
      at += l.dim();
    }
    return y;
  };
  Vec v0dir(d);
  v0dir = spec.v0;
  const Subspace tangent = complement(orthonormalize(std::vector<Vec>{v0dir}, d));
  long params = tangent.dim();
  for (const auto& o : spec.offsets) params += o.size();
  Mat jac(rows, params);
  long at = 0;
  for (int k = 0; k < tangent.dim(); ++k, ++at) {
    const Vec dir = tangent.basis().col(k);
    jac.col(at) = central(
        [&](double s) {
          EuclideanPathSpec moved = spec;
          moved.v0 = (spec.v0 + s * dir).normalized();
          return image(moved);
        },
        opt);
  }
  for (std::size_t j = 0; j < spec.offsets.size(); ++j) {
    for (long k = 0; k < spec.offsets[j].size(); ++k, ++at) {
      jac.col(at) = central(
          [&](double s) {
            EuclideanPathSpec moved = spec;
            moved.offsets[j](k) += s;
            return image(moved);
          },
          opt);
    }
  }
  out.rank = jac.cols() == 0 ? 0 : numerical_rank(jac, opt.fd_rank_rel);
  return out;
}

int common_generator_dim(const CylindricBilliardSystem& system, std::span<const int> sigma) {
  std::vector<Subspace> gens;
  for (int c : distinct_labels(sigma)) gens.push_back(system.generator_space(c));
  if (gens.empty()) return system.dim();
  return intersect(gens, system.dim()).dim();
}

}  // namespace cylbill

#include "cylbill/torus_flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cylbill {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::max_collisions: return "max-collisions";
    case Termination::max_time: return "max-time";
    case Termination::no_collision: return "no-collision-within-horizon";
    case Termination::tangential: return "tangential";
    case Termination::simultaneous: return "simultaneous";
    case Termination::start_inside: return "start-inside";
    case Termination::cascade_capped: return "cascade-capped";
  }
  return "unknown";
}

FlowGeometry::FlowGeometry(const CylindricBilliardSystem& system) : system_(&system) {
  const Mat& b = system.lattice().basis();
  for (int i = 0; i < system.size(); ++i) {
    Cylinder c;
    c.lb = system.base_space(i).basis();
    c.t = system.translation_vector(i);
    c.r = system.radius(i);
    const Mat projected = c.lb.transpose() * b;
    GeneratorReduction red = reduce_generators(projected);
    if (!red.ok || red.basis.cols() != c.lb.cols())
      throw std::runtime_error("cylinder " + std::to_string(i) +
                               ": projected lattice is not discrete; A_i is not a lattice subspace");
    c.bi = red.basis;
    c.ti = red.transform;
    c.bi_inv = c.bi.inverse();
    c.row_norms = c.bi_inv.rowwise().norm();
    const Mat s = c.bi_inv * projected;
    c.si = s.array().round().cast<long long>().matrix();
    if ((s - c.si.cast<double>()).cwiseAbs().maxCoeff() > 1e-6)
      throw std::runtime_error("cylinder " + std::to_string(i) + ": projected lattice coordinates not integral");
    cylinders_.push_back(std::move(c));
  }
  chunk_ = std::max(system.lattice().fundamental_domain_diameter(), 1e-6);
}

namespace {

// Calls f(m) for every integer m with |(bi_inv c)_k - m_k| <= row_norm_k * radius.
template <typename F>
void enumerate_box(const FlowGeometry::Cylinder& c, const Vec& center, double radius, F&& f) {
  const long nu = c.bi.cols();
  const Vec mc = c.bi_inv * center;
  IntVec lo(nu), hi(nu), m(nu);
  for (long k = 0; k < nu; ++k) {
    const double hw = c.row_norms(k) * radius;
    lo(k) = static_cast<long long>(std::ceil(mc(k) - hw));
    hi(k) = static_cast<long long>(std::floor(mc(k) + hw));
    if (lo(k) > hi(k)) return;
  }
  m = lo;
  for (;;) {
    f(m);
    long k = 0;
    while (k < nu) {
      if (++m(k) <= hi(k)) break;
      m(k) = lo(k);
      ++k;
    }
    if (k == nu) return;
  }
}

}  // namespace

double FlowGeometry::clearance(const Vec& q) const {
  double best = std::numeric_limits<double>::infinity();
  const double reach = lattice().fundamental_domain_diameter();
  for (const auto& c : cylinders_) {
    const Vec y = c.lb.transpose() * (q - c.t);
    enumerate_box(c, y, reach + c.r, [&](const IntVec& m) {
      best = std::min(best, (y - c.bi * m.cast<double>()).norm() - c.r);
    });
  }
  return best;
}

IntVec FlowGeometry::nearest_image(int i, const Vec& x) const {
  const auto& c = cylinders_.at(static_cast<std::size_t>(i));
  const Vec y = c.lb.transpose() * (x - c.t);
  IntVec best;
  double best_d = std::numeric_limits<double>::infinity();
  // The nearest point of Λ_i is within the covering radius, bounded by the
  // diameter of its reduced cell.
  const double reach = c.bi.colwise().norm().sum();
  enumerate_box(c, y, reach, [&](const IntVec& m) {
    const double dist = (y - c.bi * m.cast<double>()).norm();
    if (dist < best_d) {
      best_d = dist;
      best = m;
    }
  });
  return c.ti * best;
}

NextCollision next_collision(const FlowGeometry& geom, const PhasePoint& phase, double horizon,
                             const FlowOptions& opt, const IntVec* unwrap) {
  NextCollision out;
  const double gap = opt.t_min_gap;
  const double chunk = geom.chunk();
  const auto& cyls = geom.cylinders();
  std::vector<Vec> y0(cyls.size()), u(cyls.size());
  for (std::size_t i = 0; i < cyls.size(); ++i) {
    y0[i] = cyls[i].lb.transpose() * (phase.q - cyls[i].t);
    u[i] = cyls[i].lb.transpose() * phase.v;
  }
  for (double s0 = 0.0; s0 < horizon; s0 += chunk) {
    const double s1 = std::min(s0 + chunk, horizon);
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    int best_i = -1;
    IntVec best_m;
    bool best_tangential = false;
    for (std::size_t i = 0; i < cyls.size(); ++i) {
      const auto& c = cyls[i];
      const double qa = u[i].squaredNorm();
      if (qa < 1e-28) {
        // Motion along A_i: only a start inside can matter.
        if (s0 == 0.0) {
          enumerate_box(c, y0[i], c.r, [&](const IntVec& m) {
            if ((y0[i] - c.bi * m.cast<double>()).squaredNorm() < c.r * c.r * (1.0 - 1e-9))
              out.status = NextStatus::start_inside;
          });
          if (out.status == NextStatus::start_inside) return out;
        }
        continue;
      }
      const Vec center = y0[i] + 0.5 * (s0 + s1) * u[i];
      const double radius = 0.5 * (s1 - s0) * std::sqrt(qa) + c.r * (1.0 + 1e-9);
      bool inside = false;
      enumerate_box(c, center, radius, [&](const IntVec& m) {
        const Vec w = y0[i] - c.bi * m.cast<double>();
        const double qb = w.dot(u[i]);
        const double qc = w.squaredNorm() - c.r * c.r;
        const double disc = qb * qb - qa * qc;
        const double h2 = disc / qa;
        const double r2 = c.r * c.r;
        if (h2 < -opt.disc_tol * r2) return;
        double hit;
        bool tangential = false;
        if (h2 <= opt.disc_tol * r2) {
          hit = -qb / qa;
          tangential = true;
          if (hit <= gap) return;
        } else {
          const double sq = std::sqrt(disc);
          const double q = -(qb + std::copysign(sq, qb));
          double r1 = q / qa;
          double r2root = q != 0.0 ? qc / q : r1;
          if (r2root < r1) std::swap(r1, r2root);
          if (r1 <= gap) {
            if (r2root > gap) inside = true;
            return;
          }
          hit = r1;
        }
        if (hit > s1) return;
        if (hit < best) {
          second = best;
          best = hit;
          best_i = static_cast<int>(i);
          best_m = m;
          best_tangential = tangential;
        } else if (hit < second) {
          second = hit;
        }
      });
      if (inside) {
        out.status = NextStatus::start_inside;
        out.event.cylinder = static_cast<int>(i);
        return out;
      }
    }
    if (best_i < 0) continue;
    if (best > horizon) break;
    const auto& c = cyls[static_cast<std::size_t>(best_i)];
    auto& ev = out.event;
    ev.time = best;
    ev.cylinder = best_i;
    IntVec m_abs = best_m;
    if (unwrap) m_abs += c.si * *unwrap;
    ev.lattice_image = c.ti * m_abs;
    ev.position = phase.q + best * phase.v;
    Vec n = c.lb * (y0[static_cast<std::size_t>(best_i)] + best * u[static_cast<std::size_t>(best_i)] -
                    c.bi * best_m.cast<double>());
    ev.normal = n / n.norm();
    ev.v_before = phase.v;
    ev.v_after = phase.v - 2.0 * phase.v.dot(ev.normal) * ev.normal;
    if (best_tangential) {
      out.status = NextStatus::tangential;
    } else if (second - best < gap) {
      out.status = NextStatus::simultaneous;
    } else {
      out.status = NextStatus::collision;
    }
    return out;
  }
  out.status = NextStatus::none;
  return out;
}

TrajectoryRecord flow(const FlowGeometry& geom, const PhasePoint& phase, const FlowStop& stop,
                      const FlowOptions& opt) {
  const Lattice& lattice = geom.lattice();
  const int d = lattice.dim();
  TrajectoryRecord rec;
  rec.initial = phase;
  rec.initial_unwrap = opt.initial_unwrap ? *opt.initial_unwrap : IntVec(IntVec::Zero(d));
  if (phase.q.size() != d || phase.v.size() != d) throw DimensionError("flow: phase dimension mismatch");
  const double horizon = opt.horizon > 0.0 ? opt.horizon : geom.default_horizon();

  PhasePoint cur = phase;
  IntVec unwrap = rec.initial_unwrap;
  double t = 0.0;
  auto finish = [&](Termination term) {
    rec.termination = term;
    rec.final_state = cur;
    rec.final_unwrap = unwrap;
    rec.final_time = t;
    return rec;
  };
  auto advance = [&](double s) {
    IntVec shift;
    cur.q = lattice.wrap(cur.q + s * cur.v, &shift);
    unwrap += shift;
    t += s;
  };

  for (;;) {
    if (stop.max_collisions >= 0 && static_cast<long long>(rec.events.size()) >= stop.max_collisions)
      return finish(Termination::max_collisions);
    const double remaining = stop.max_time - t;
    if (remaining <= 0.0) return finish(Termination::max_time);
    const double h = std::min(horizon, remaining);
    const NextCollision nc = next_collision(geom, cur, h, opt, &unwrap);
    switch (nc.status) {
      case NextStatus::none:
        if (h >= remaining) {
          advance(remaining);
          return finish(Termination::max_time);
        }
        return finish(Termination::no_collision);
      case NextStatus::start_inside:
        rec.start_inside = true;
        return finish(Termination::start_inside);
      case NextStatus::tangential:
        rec.tangential_encountered = true;
        return finish(Termination::tangential);
      case NextStatus::simultaneous:
        rec.simultaneous_encountered = true;
        return finish(Termination::simultaneous);
      case NextStatus::collision:
        break;
    }
    CollisionEvent ev = nc.event;
    advance(ev.time);
    cur.v = ev.v_after;
    ev.time = t;
    ev.position = cur.q;
    ev.cell = unwrap;
    rec.symbolic.push_back(ev.cylinder);
    rec.events.push_back(std::move(ev));
    const auto n = static_cast<long long>(rec.events.size());
    if (n > opt.cascade_cap &&
        rec.events.back().time - rec.events[static_cast<std::size_t>(n - 1 - opt.cascade_cap)].time < 1.0) {
      rec.cascade_capped = true;
      return finish(Termination::cascade_capped);
    }
  }
}

TrajectoryRecord flow(const CylindricBilliardSystem& system, const PhasePoint& phase, const FlowStop& stop,
                      const FlowOptions& opt) {
  const FlowGeometry geom(system);
  return flow(geom, phase, stop, opt);
}

UnfoldedPath unfold(const FlowGeometry& geom, const TrajectoryRecord& record) {
  UnfoldedPath out;
  const Lattice& lattice = geom.lattice();
  const Vec x0 = record.initial.q + lattice.point(record.initial_unwrap);
  out.spec.v0 = record.initial.v;
  for (const auto& ev : record.events) {
    const auto& c = geom.cylinders()[static_cast<std::size_t>(ev.cylinder)];
    out.sigma.push_back(ev.cylinder);
    const Vec axis = c.t + lattice.point(ev.lattice_image);
    out.spec.offsets.push_back(c.lb.transpose() * (axis - x0));
  }
  return out;
}

ReversedStart reversal_point(const TrajectoryRecord& record, const Lattice& lattice, std::size_t n) {
  if (n == 0 || n > record.events.size()) throw std::out_of_range("reversal_point: need 1 <= n <= events");
  const auto& ev = record.events[n - 1];
  const double t_next = n < record.events.size() ? record.events[n].time : record.final_time;
  const double s = 0.5 * (t_next - ev.time);
  ReversedStart out;
  IntVec shift;
  out.phase.q = lattice.wrap(ev.position + s * ev.v_after, &shift);
  out.phase.v = -ev.v_after;
  out.unwrap = ev.cell + shift;
  out.time = ev.time + s;
  return out;
}

}  // namespace cylbill

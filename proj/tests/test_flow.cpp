#include "support.hpp"

#include "cylbill/torus_flow.hpp"

#include <doctest.h>

using namespace testing;

namespace {

// Brute-force signed distance from x to the nearest scatterer surface. An
// image λ of cylinder i can be moved along the integer generators without
// changing its projection, so images within distance r of x have a
// representative with ||Bλ|| <= ||x - t_i|| + r + Σ ||B c_k||; the box of
// lattice coordinates covering that ball is enumerated.
double brute_clearance(const CylindricBilliardSystem& s, const Vec& x) {
  const int d = s.dim();
  const Mat& b = s.lattice().basis();
  const Vec row_norms = b.inverse().rowwise().norm();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.size(); ++i) {
    const Vec y = x - s.translation_vector(i);
    double reach = y.norm() + s.radius(i);
    for (const auto& c : s.cylinder(i).generator_coeffs) reach += (b * c.cast<double>()).norm();
    IntVec lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      lo(k) = static_cast<long long>(std::floor(-row_norms(k) * reach));
      hi(k) = static_cast<long long>(std::ceil(row_norms(k) * reach));
    }
    IntVec k = lo;
    for (;;) {
      const Vec rel = y - b * k.cast<double>();
      best = std::min(best, s.base_space(i).project(rel).norm() - s.radius(i));
      int j = 0;
      while (j < d && ++k(j) > hi(j)) {
        k(j) = lo(j);
        ++j;
      }
      if (j == d) break;
    }
  }
  return best;
}

// First time the ray x + s v enters a scatterer: 1-Lipschitz marching on the
// brute-force clearance, then bisection.
std::optional<double> march(const CylindricBilliardSystem& s, const Vec& x, const Vec& v, double s_max) {
  double t = 0.0;
  while (t < s_max) {
    const double f = brute_clearance(s, x + t * v);
    if (f < 0.0) {
      double lo = t - 1e-6, hi = t;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (brute_clearance(s, x + mid * v) < 0.0 ? hi : lo) = mid;
      }
      return 0.5 * (lo + hi);
    }
    t += std::max(f, 1e-6);
  }
  return std::nullopt;
}

PhasePoint phase(std::initializer_list<double> q, std::initializer_list<double> v) {
  PhasePoint p;
  p.q = Eigen::Map<const Vec>(q.begin(), static_cast<long>(q.size()));
  p.v = Eigen::Map<const Vec>(v.begin(), static_cast<long>(v.size())).normalized();
  return p;
}

PhasePoint random_free_phase(const CylindricBilliardSystem& s, Rng& rng) {
  for (;;) {
    PhasePoint p;
    Vec c(s.dim());
    for (auto& x : c) x = uniform(rng, 0.0, 1.0);
    p.q = s.lattice().point(c);
    p.v = unit(rng, s.dim());
    if (brute_clearance(s, p.q) > 1e-3) return p;
  }
}

// Every test system has open corridors, so long runs need a long horizon.
FlowOptions long_horizon() {
  FlowOptions opt;
  opt.horizon = 1e4;
  return opt;
}

// Bound on the growth of a small perturbation across event k and the flight
// that follows it: the wavefront expansion 1 + 2τ / (r |<v, n>|) of a
// dispersing collision.
double expansion(const CylindricBilliardSystem& s, const TrajectoryRecord& rec, std::size_t k) {
  const auto& e = rec.events[k];
  const double next = k + 1 < rec.events.size() ? rec.events[k + 1].time : rec.final_time;
  const double c = std::max(std::abs(e.v_before.dot(e.normal)), 1e-12);
  return 1.0 + 2.0 * (next - e.time) / (s.radius(e.cylinder) * c);
}

// Roundoff amplified by the dynamics, floored at the pinned 1e-9.
double amplified_tol(double growth) { return std::max(1e-9, 1e-13 * growth); }

// Beyond this growth a retrace may legitimately follow another orbit.
constexpr double kMaxGrowth = 1e8;

FlowStop collisions(long long n) {
  FlowStop st;
  st.max_collisions = n;
  return st;
}

}  // namespace

TEST_CASE("next collision: head-on in the Sinai billiard") {
  const auto s = sinai(0.3);
  const FlowGeometry g(s);
  const auto nc = next_collision(g, phase({0, 0.5}, {1, 0}), g.default_horizon());
  REQUIRE(nc.status == NextStatus::collision);
  CHECK(std::abs(nc.event.time - 0.2) < 1e-14);
  CHECK(nc.event.lattice_image == IntVec::Zero(2));
  CHECK((nc.event.normal - Vec(Eigen::Vector2d(-1, 0))).norm() < 1e-14);
  CHECK(nc.event.cylinder == 0);
}

TEST_CASE("next collision: vertical flight at x = 0 misses every disc") {
  // The line x = 0 stays 0.5 > r away from every disc centre (1/2 + k, 1/2 + l).
  const auto s = sinai(0.3);
  const FlowGeometry g(s);
  const auto nc = next_collision(g, phase({0, 0.5}, {0, 1}), g.default_horizon());
  CHECK(nc.status == NextStatus::none);
  CHECK_FALSE(march(s, Vec(Eigen::Vector2d(0, 0.5)), Vec::Unit(2, 1), g.default_horizon()));
}

TEST_CASE("next collision: oblique flight agrees with the marching oracle") {
  const auto s = sinai(0.3);
  const FlowGeometry g(s);
  const auto p = phase({0, 0.5}, {0.6, 0.8});
  const auto nc = next_collision(g, p, g.default_horizon());
  REQUIRE(nc.status == NextStatus::collision);
  const auto t = march(s, p.q, p.v, 20.0);
  REQUIRE(t);
  CHECK(std::abs(nc.event.time - *t) < 1e-9);
  // Centre (1/2, 3/2) lies in the image one lattice step up.
  CHECK(nc.event.lattice_image == IntVec(Eigen::Vector2<long long>(0, 1)).cast<IntVec::Scalar>());
}

TEST_CASE("next collision agrees with the marching oracle on random systems") {
  Rng rng(41);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const int d = uniform_int(rng, 2, 3);
    const auto s = random_system(rng, d, uniform_int(rng, 1, 2), true, 0.1, 0.25);
    const FlowGeometry g(s);
    const auto p = random_free_phase(s, rng);
    const double horizon = 4.0;
    const auto nc = next_collision(g, p, horizon);
    const auto t = march(s, p.q, p.v, horizon);
    if (nc.status == NextStatus::collision) {
      REQUIRE(t);
      CHECK(std::abs(nc.event.time - *t) < 1e-9);
      ++checked;
    } else {
      CHECK(nc.status == NextStatus::none);
      CHECK_FALSE(t);
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("start inside a scatterer is reported") {
  const auto s = sinai(0.3);
  const auto rec = flow(s, phase({0.5, 0.5}, {1, 0}), collisions(5));
  CHECK(rec.termination == Termination::start_inside);
  CHECK(rec.start_inside);
  CHECK(rec.degenerate());
}

TEST_CASE("free flight ends without collisions") {
  const auto s = sinai(0.1);
  const auto rec = flow(s, phase({0, 0.1}, {1, 0}), collisions(5));
  CHECK(rec.events.empty());
  CHECK(rec.termination == Termination::no_collision);
  FlowStop t;
  t.max_time = 3.5;
  const auto timed = flow(s, phase({0, 0.1}, {1, 0}), t);
  CHECK(timed.termination == Termination::max_time);
  CHECK(std::abs(timed.final_time - 3.5) < 1e-12);
  CHECK(std::abs(timed.final_state.q(0) - 0.5) < 1e-12);
}

TEST_CASE("energy, specularity and non-penetration in the Sinai billiard") {
  const auto s = sinai(0.3);
  const auto rec = flow(s, phase({0.05, 0.1}, {0.6, 0.8}), collisions(1000), long_horizon());
  REQUIRE(rec.events.size() == 1000);
  CHECK(rec.termination == Termination::max_collisions);
  CHECK(std::abs(rec.final_state.v.norm() - 1.0) < 1e-10);
  double prev = 0.0;
  for (const auto& e : rec.events) {
    CHECK(e.time > prev);
    prev = e.time;
    CHECK(std::abs(e.v_after.norm() - 1.0) < 1e-12);
    CHECK(std::abs(e.v_after.dot(e.normal) + e.v_before.dot(e.normal)) < 1e-12);
    CHECK(std::abs(brute_clearance(s, e.position)) < 1e-9);
  }
  CHECK(rec.symbolic.size() == rec.events.size());

  // Sample times between events.
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t j = static_cast<std::size_t>(uniform_int(rng, 0, 998));
    const auto& e = rec.events[j];
    const double dt = uniform(rng, 0.0, rec.events[j + 1].time - e.time);
    CHECK(brute_clearance(s, Vec(e.position + dt * e.v_after)) >= -1e-9);
  }
}

TEST_CASE("long runs conserve energy") {
  HardBallParams p;
  p.n = 3;
  p.masses = {1, 2, 3};
  p.r = 0.08;
  const auto hb = hard_ball_system(p).system;
  Rng rng(6);
  const auto start = random_free_phase(hb, rng);
  const auto rec = flow(hb, start, collisions(10000), long_horizon());
  REQUIRE(rec.events.size() == 10000);
  CHECK(std::abs(rec.final_state.v.norm() - 1.0) < 1e-9);
  for (const auto& e : rec.events) {
    const Vec dv = e.v_after - e.v_before;
    CHECK(hb.generator_space(e.cylinder).project(dv).norm() < 1e-10);
    CHECK(hb.generator_space(e.cylinder).project(e.normal).norm() < 1e-10);
  }
}

TEST_CASE("time reversal retraces the events") {
  // Roundoff grows by the expansion factor of every collision, so event k of
  // the reversed run is compared at 1e-9 or at the roundoff amplified by the
  // events between it and the reversal point, whichever is larger.
  Rng rng(7);
  HardBallParams p;
  p.n = 3;
  p.masses = {1, 1, 1};
  const std::vector<CylindricBilliardSystem> systems{sinai(0.3), single_sphere(3, 0.3), hard_ball_system(p).system};
  const std::size_t n = 10;
  int strict = 0;
  for (const auto& s : systems) {
    const FlowGeometry g(s);
    for (int trial = 0; trial < 20; ++trial) {
      const auto rec = flow(g, random_free_phase(s, rng), collisions(static_cast<long long>(n + 1)), long_horizon());
      REQUIRE(rec.events.size() == n + 1);
      const auto rs = reversal_point(rec, s.lattice(), n);
      FlowOptions opt = long_horizon();
      opt.initial_unwrap = rs.unwrap;
      const auto back = flow(g, rs.phase, collisions(static_cast<long long>(n)), opt);
      double growth = 1.0;
      for (std::size_t k = 0; k < back.events.size(); ++k) {
        const std::size_t j = n - 1 - k;
        // The reversed flight into event j is the forward flight out of it.
        growth *= j + 1 < n ? expansion(s, rec, j + 1) : 1.0;
        if (growth > kMaxGrowth) break;
        const auto& fwd = rec.events[j];
        const auto& rev = back.events[k];
        CHECK(fwd.cylinder == rev.cylinder);
        CHECK(fwd.lattice_image == rev.lattice_image);
        const double err = std::abs((rs.time - fwd.time) - rev.time);
        CHECK(err < amplified_tol(growth));
        if (err < 1e-9) ++strict;
      }
    }
  }
  // The short windows meet the pinned tolerance outright.
  CHECK(strict > 300);
}

TEST_CASE("an orthogonal product keeps to one block") {
  const auto s = orthogonal_pair(0.2);
  // Velocity inside block 1 (base of cylinder 0); block-2 coordinates stay
  // at distance sqrt(1/2) > r from cylinder 1's axis.
  FlowOptions opt;
  opt.horizon = 100.0;
  const auto rec = flow(s, phase({0.1, 0.2, 0, 0}, {0.6, 0.8, 0, 0}), collisions(50), opt);
  REQUIRE(rec.events.size() == 50);
  for (int c : rec.symbolic) CHECK(c == 0);

  // The factor billiard of block 1 sees the same collision times.
  const std::vector<int> first{0};
  const auto sub = sub_billiard(s, first);
  PhasePoint fp;
  fp.q = sub.system.lattice().wrap(sub.frame.transpose() * Vec(Eigen::Vector4d(0.1, 0.2, 0, 0)));
  fp.v = (sub.frame.transpose() * Vec(Eigen::Vector4d(0.6, 0.8, 0, 0))).normalized();
  const auto frec = flow(sub.system, fp, collisions(50), opt);
  REQUIRE(frec.events.size() == 50);
  for (std::size_t k = 0; k < 50; ++k) CHECK(std::abs(frec.events[k].time - rec.events[k].time) < 1e-9 * (1.0 + rec.events[k].time));
}

TEST_CASE("unfolded records retrace as Euclidean paths") {
  // Retracing restarts from the initial state; event j is compared at 1e-9
  // or at the roundoff amplified by the events before it.
  Rng rng(9);
  HardBallParams p;
  p.n = 3;
  p.masses = {1, 2, 1};
  std::vector<CylindricBilliardSystem> systems{sinai(0.25), hard_ball_system(p).system,
                                               random_system(rng, 3, 2, true, 0.1, 0.25)};
  int strict = 0;
  for (const auto& s : systems) {
    const FlowGeometry g(s);
    for (int trial = 0; trial < 8; ++trial) {
      const auto rec = flow(g, random_free_phase(s, rng), collisions(15), long_horizon());
      if (rec.events.empty()) continue;
      const auto up = unfold(g, rec);
      CHECK(up.sigma == rec.symbolic);
      // Trace only the prefix that the amplified tolerance can resolve.
      double growth = 1.0;
      std::size_t m = 0;
      while (m < rec.events.size() && growth * expansion(s, rec, m) <= kMaxGrowth) growth *= expansion(s, rec, m++);
      m = std::max<std::size_t>(m, 1);
      const SymbolicSequence prefix(up.sigma.begin(), up.sigma.begin() + static_cast<long>(m));
      EuclideanPathSpec spec{up.spec.v0, {up.spec.offsets.begin(), up.spec.offsets.begin() + static_cast<long>(m)}};
      const auto r = trace(s, prefix, spec);
      REQUIRE(r.ok());
      growth = 1.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double tol = amplified_tol(growth);
        const double dt = std::abs(r.times[j] - rec.events[j].time);
        CHECK(dt < tol);
        CHECK((r.velocities[j + 1] - rec.events[j].v_after).norm() < tol);
        if (dt < 1e-9) ++strict;
        growth *= expansion(s, rec, j);
      }
    }
  }
  CHECK(strict > 100);
}

TEST_CASE("trajectory exports") {
  const auto s = sinai(0.3);
  const auto rec = flow(s, phase({0.05, 0.1}, {0.6, 0.8}), collisions(3));
  CHECK(to_string(rec.termination) == std::string("max-collisions"));
}

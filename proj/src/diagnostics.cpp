#include "cylbill/diagnostics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cylbill {

std::optional<SplittingWitness> detect_splitting(std::span<const int> collided, const CylindricBilliardSystem& system) {
  const int d = system.dim();
  const auto labels = distinct_labels(collided);
  if (labels.empty()) {
    SplittingWitness w;
    Mat e = Mat::Zero(d, 1);
    e(0, 0) = 1.0;
    w.b1 = Subspace::from_orthonormal(e);
    w.b2 = complement(w.b1);
    w.degenerate = true;
    return w;
  }
  const auto dec = orthogonal_decomposition(labels, system);
  if (dec.groups.size() == 1 && dec.e0.dim() == 0) return std::nullopt;
  SplittingWitness w;
  w.b1 = dec.parts.front();
  w.b2 = complement(w.b1);
  for (std::size_t g = 0; g < dec.groups.size(); ++g)
    for (int i : dec.groups[g]) w.assignment[i] = g == 0 ? 1 : 2;
  std::vector<Subspace> all = system.base_spaces();
  check_witness(w, all);
  return w;
}

std::optional<SplittingWitness> detect_splitting(const TrajectoryRecord& record, const CylindricBilliardSystem& system) {
  return detect_splitting(record.symbolic, system);
}

RichnessCertificate richness_certificate(const TrajectoryRecord& record, const CylindricBilliardSystem& system,
                                         int c) {
  if (c < 1) throw std::invalid_argument("richness_certificate: C must be >= 1");
  RichnessCertificate out;
  out.block_count = count_transitive_blocks(record.symbolic, system);
  out.certified = out.block_count >= c;
  return out;
}

namespace {

Vec gaussian(Rng& rng, long n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (long i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

struct Tracked {
  PhasePoint x;
  IntVec cell;
};

// Shadow at distance d0 from ref along the phase-space direction (dq, dv).
Tracked displaced(const Lattice& lattice, const Tracked& ref, const Vec& dq, const Vec& dv, double d0) {
  const double norm = std::sqrt(dq.squaredNorm() + dv.squaredNorm());
  Tracked s;
  IntVec shift;
  s.x.q = lattice.wrap(ref.x.q + (d0 / norm) * dq, &shift);
  s.cell = ref.cell + shift;
  s.x.v = (ref.x.v + (d0 / norm) * dv).normalized();
  return s;
}

bool advance(const FlowGeometry& geom, Tracked& t, double dt, const FlowOptions& base) {
  FlowOptions opt = base;
  opt.initial_unwrap = t.cell;
  FlowStop stop;
  stop.max_time = dt;
  const auto rec = flow(geom, t.x, stop, opt);
  if (rec.termination != Termination::max_time) return false;
  t.x = rec.final_state;
  t.cell = rec.final_unwrap;
  return true;
}

}  // namespace

LyapunovResult lyapunov_max(const CylindricBilliardSystem& system, const PhasePoint& phase,
                            const LyapunovOptions& opt) {
  if (!(opt.total_time > 0.0) || !(opt.renorm_dt > 0.0)) throw std::invalid_argument("lyapunov: times must be positive");
  if (!(opt.d0 > 0.0) || opt.d0 > 1e-8) throw std::invalid_argument("lyapunov: need 0 < d0 <= 1e-8");
  const FlowGeometry geom(system);
  const Lattice& lattice = geom.lattice();
  const int d = system.dim();
  Rng rng(opt.seed);

  auto fresh_direction = [&](const Vec& v) {
    for (;;) {
      Vec g = gaussian(rng, d);
      g -= g.dot(v) * v;
      if (g.norm() > 1e-6) return g;
    }
  };

  LyapunovResult out;
  Tracked ref{phase, opt.flow.initial_unwrap ? *opt.flow.initial_unwrap : IntVec(IntVec::Zero(d))};
  Tracked shadow = displaced(lattice, ref, fresh_direction(ref.x.v), Vec::Zero(d), opt.d0);
  const long windows = std::max(1L, std::lround(opt.total_time / opt.renorm_dt));
  double sum = 0.0, sum_sq = 0.0;
  for (long k = 0; k < windows; ++k) {
    if (!advance(geom, ref, opt.renorm_dt, opt.flow)) {
      out.reference_failed = true;
      out.discarded += static_cast<int>(windows - k);
      out.window_rates.resize(static_cast<std::size_t>(windows), std::numeric_limits<double>::quiet_NaN());
      break;
    }
    out.simulated_time += opt.renorm_dt;
    const bool shadow_ok = advance(geom, shadow, opt.renorm_dt, opt.flow);
    Vec dq, dv;
    double sep = std::numeric_limits<double>::infinity();
    if (shadow_ok) {
      dq = (shadow.x.q + lattice.point(shadow.cell)) - (ref.x.q + lattice.point(ref.cell));
      dv = shadow.x.v - ref.x.v;
      sep = std::sqrt(dq.squaredNorm() + dv.squaredNorm());
    }
    if (!shadow_ok || !(sep <= opt.discard_separation) || !(sep > 0.0)) {
      ++out.discarded;
      out.window_rates.push_back(std::numeric_limits<double>::quiet_NaN());
      shadow = displaced(lattice, ref, fresh_direction(ref.x.v), Vec::Zero(d), opt.d0);
      continue;
    }
    const double rate = std::log(sep / opt.d0) / opt.renorm_dt;
    out.window_rates.push_back(rate);
    ++out.accepted;
    sum += rate;
    sum_sq += rate * rate;
    shadow = displaced(lattice, ref, dq, dv, opt.d0);
  }
  if (out.accepted > 0) {
    const double n = out.accepted;
    out.estimate = sum / n;
    const double var = out.accepted > 1 ? std::max(0.0, (sum_sq - n * out.estimate * out.estimate) / (n - 1)) : 0.0;
    out.std_error = std::sqrt(var / n);
  }
  out.unreliable = out.reference_failed ||
                   static_cast<double>(out.discarded) > opt.unreliable_fraction * static_cast<double>(windows);
  return out;
}

PhasePoint random_phase(const FlowGeometry& geom, Rng& rng) {
  const int d = geom.lattice().dim();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vec c(d);
    for (int i = 0; i < d; ++i) c(i) = unif(rng);
    PhasePoint p;
    p.q = geom.lattice().point(c);
    if (geom.clearance(p.q) <= 1e-9) continue;
    for (;;) {
      p.v = gaussian(rng, d);
      const double n = p.v.norm();
      if (n > 1e-12) {
        p.v /= n;
        break;
      }
    }
    return p;
  }
  throw std::runtime_error("random_phase: no point outside the scatterers after 10000 draws");
}

PhasePoint near_splitting_hard_ball_phase(const HardBallBuild& build, Rng& rng) {
  const auto& p = build.params;
  if (p.nu != 2) throw std::invalid_argument("near-splitting ensemble needs nu == 2");
  std::uniform_real_distribution<double> expo(-8.0, -4.0);
  const double eps = std::pow(10.0, expo(rng));
  Mat pos = Mat::Zero(p.n, 2), vel = Mat::Zero(p.n, 2);
  pos.row(0) << 0.25, 0.25;
  pos.row(1) << 0.75, 0.25;
  vel.row(0) << 1.0, 0.0;
  vel.row(1) << -1.0, 0.0;
  for (int k = 2; k < p.n; ++k) pos.row(k) << (k - 1.5) / static_cast<double>(p.n - 1), 0.75;
  pos += eps * Mat(gaussian(rng, 2 * p.n).reshaped(p.n, 2));
  vel += eps * Mat(gaussian(rng, 2 * p.n).reshaped(p.n, 2));
  return hard_ball_phase(build, pos, vel);
}

std::vector<double> ScanResult::fractions() const {
  std::vector<double> out;
  for (int s : split) out.push_back(valid > 0 ? static_cast<double>(s) / valid : 0.0);
  return out;
}

ScanResult splitting_scan(const CylindricBilliardSystem& system, const PhaseSampler& sampler, const ScanOptions& opt) {
  if (opt.orbits < 1) throw std::invalid_argument("splitting_scan: need at least one orbit");
  if (opt.checkpoints.empty()) throw std::invalid_argument("splitting_scan: no checkpoints");
  const FlowGeometry geom(system);
  const long long horizon = *std::max_element(opt.checkpoints.begin(), opt.checkpoints.end());
  const std::size_t nc = opt.checkpoints.size();
  // Per orbit: -1 degenerate, else bitmask of split checkpoints.
  std::vector<std::vector<char>> split(static_cast<std::size_t>(opt.orbits), std::vector<char>(nc, 0));
  std::vector<char> degenerate(static_cast<std::size_t>(opt.orbits), 0);
  auto body = [&](int i) {
    Rng rng(sample_seed(opt.seed, static_cast<std::uint64_t>(i)));
    const PhasePoint start = sampler(rng);
    FlowStop stop;
    stop.max_collisions = horizon;
    const auto rec = flow(geom, start, stop, opt.flow);
    if (rec.degenerate()) {
      degenerate[static_cast<std::size_t>(i)] = 1;
      return;
    }
    for (std::size_t c = 0; c < nc; ++c) {
      const auto n = std::min<std::size_t>(rec.symbolic.size(), static_cast<std::size_t>(opt.checkpoints[c]));
      const std::span<const int> prefix(rec.symbolic.data(), n);
      split[static_cast<std::size_t>(i)][c] = detect_splitting(prefix, system).has_value() ? 1 : 0;
    }
  };
  if (opt.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(thread_budget())
    for (int i = 0; i < opt.orbits; ++i) body(i);
  } else {
    for (int i = 0; i < opt.orbits; ++i) body(i);
  }
  ScanResult out;
  out.checkpoints = opt.checkpoints;
  out.split.assign(nc, 0);
  for (int i = 0; i < opt.orbits; ++i) {
    if (degenerate[static_cast<std::size_t>(i)]) {
      ++out.degenerate;
      continue;
    }
    ++out.valid;
    for (std::size_t c = 0; c < nc; ++c) out.split[c] += split[static_cast<std::size_t>(i)][c];
  }
  return out;
}

}  // namespace cylbill

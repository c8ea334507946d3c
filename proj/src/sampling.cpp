#include "cylbill/classifier.hpp"
#include "cylbill/euclid_paths.hpp"
#include "path_step.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace cylbill {

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

using Rng = std::mt19937_64;

Vec gaussian(Rng& rng, long n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(n);
  for (long i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

Vec unit_vector(Rng& rng, long n) {
  for (;;) {
    Vec v = gaussian(rng, n);
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

double box_half_width(const CylindricBilliardSystem& system, const SamplingOptions& opt) {
  return opt.box_half_width > 0.0 ? opt.box_half_width : 3.0 * system.max_radius();
}

// One attempt at a full path; offsets are drawn collision by collision.
bool try_path(const CylindricBilliardSystem& system, std::span<const int> sigma, Rng& rng,
              const SamplingOptions& opt, EuclideanPathSpec& spec, long long& failures) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> flight(opt.min_flight, opt.max_flight);
  const double w = box_half_width(system, opt);
  spec.v0 = unit_vector(rng, system.dim());
  spec.offsets.assign(sigma.size(), Vec());
  Vec p = Vec::Zero(system.dim());
  Vec v = spec.v0;
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    const Subspace& l = system.base_space(sigma[j]);
    const double r = system.radius(sigma[j]);
    bool placed = false;
    for (int attempt = 0; attempt < opt.offset_retries && !placed; ++attempt) {
      Vec c;
      if (opt.measure == SamplingMeasure::box) {
        c = l.coordinates(p);
        for (long k = 0; k < c.size(); ++k) c(k) += w * unif(rng);
      } else {
        // Axis within distance r of the point reached after a uniform flight time.
        const Vec target = l.coordinates(p + flight(rng) * v);
        const double rho = r * std::pow(std::uniform_real_distribution<double>(0.0, 1.0)(rng),
                                        1.0 / static_cast<double>(std::max(1, l.dim())));
        c = target + rho * unit_vector(rng, l.dim());
      }
      const auto step = detail::step_to_cylinder(l.basis(), r, p, v, l.basis() * c, opt.path);
      if (step.status != TraceStatus::ok) {
        ++failures;
        continue;
      }
      spec.offsets[j] = c;
      p = step.point;
      v = step.velocity;
      placed = true;
    }
    if (!placed) return false;
  }
  return true;
}

int rank_or_fail(const CylindricBilliardSystem& system, std::span<const int> sigma, const EuclideanPathSpec& spec,
                 const PathOptions& opt) {
  try {
    return w_plus(system, sigma, spec, opt).dim();
  } catch (const PathError&) {
    return -1;
  }
}

DeltaResult summary(const CylindricBilliardSystem& system, std::span<const int> sigma, std::vector<int> per_sample,
                    const std::vector<long long>& failures) {
  DeltaResult out;
  const int d = system.dim();
  const int common = common_generator_dim(system, sigma);
  out.samples = static_cast<int>(per_sample.size());
  out.d_minus_one = d - 1;
  out.neutral_bound = d - 1 - common;
  out.constrained_manifold_dim = 2 * d - 1 - common;
  for (std::size_t i = 0; i < per_sample.size(); ++i) {
    out.trace_failures += failures[i];
    if (per_sample[i] >= 0) {
      ++out.successes;
      out.delta = std::max(out.delta, per_sample[i]);
    }
  }
  out.per_sample = std::move(per_sample);
  return out;
}

template <typename Body>
void for_samples(int n, Exec exec, Body&& body) {
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(thread_budget())
    for (int i = 0; i < n; ++i) body(i);
  } else {
    for (int i = 0; i < n; ++i) body(i);
  }
}

}  // namespace

SampledPath sample_path(const CylindricBilliardSystem& system, std::span<const int> sigma, std::uint64_t seed,
                        const SamplingOptions& opt) {
  Rng rng(seed);
  SampledPath out;
  for (int attempt = 0; attempt < opt.path_retries; ++attempt) {
    if (try_path(system, sigma, rng, opt, out.spec, out.failures)) {
      out.ok = true;
      return out;
    }
  }
  out.spec.offsets.clear();
  return out;
}

DeltaResult delta_sigma(const CylindricBilliardSystem& system, std::span<const int> sigma, int n_samples,
                        std::uint64_t seed, const SamplingOptions& opt) {
  if (n_samples < 1) throw std::invalid_argument("delta_sigma: n_samples must be >= 1");
  for (int c : sigma)
    if (c < 0 || c >= system.size()) throw std::out_of_range("delta_sigma: label out of range");
  std::vector<int> per(static_cast<std::size_t>(n_samples), -1);
  std::vector<long long> failures(per.size(), 0);
  for_samples(n_samples, opt.exec, [&](int i) {
    Rng rng(sample_seed(seed, static_cast<std::uint64_t>(i)));
    EuclideanPathSpec spec;
    long long fails = 0;
    int rank = -1;
    for (int attempt = 0; attempt < opt.path_retries && rank < 0; ++attempt) {
      if (!try_path(system, sigma, rng, opt, spec, fails)) continue;
      rank = rank_or_fail(system, sigma, spec, opt.path);
      if (rank < 0) ++fails;
    }
    per[static_cast<std::size_t>(i)] = rank;
    failures[static_cast<std::size_t>(i)] = fails;
  });
  DeltaResult out = summary(system, sigma, std::move(per), failures);
  if (out.successes == 0)
    throw NoValidPath("no sampled path traced the sequence (" + std::to_string(out.trace_failures) +
                      " failed attempts)");
  return out;
}

DeltaResult delta_sigma_constrained(const CylindricBilliardSystem& system, std::span<const int> sigma,
                                    const EuclideanPathSpec& base_spec, int n_samples, std::uint64_t seed,
                                    const SamplingOptions& opt) {
  if (n_samples < 1) throw std::invalid_argument("delta_sigma_constrained: n_samples must be >= 1");
  if (!trace(system, sigma, base_spec, opt.path).ok())
    throw NoValidPath("delta_sigma_constrained: the base path does not trace");
  const int d = system.dim();
  const double scale = std::max(system.max_radius(), 1e-3);
  std::vector<int> per(static_cast<std::size_t>(n_samples), -1);
  std::vector<long long> failures(per.size(), 0);
  for_samples(n_samples, opt.exec, [&](int i) {
    long long fails = 0;
    int rank = -1;
    if (i == 0) {
      rank = rank_or_fail(system, sigma, base_spec, opt.path);
      if (rank < 0) ++fails;
    } else {
      Rng rng(sample_seed(seed, static_cast<std::uint64_t>(i)));
      double eps = 0.5;
      for (int attempt = 0; attempt < 4 * opt.path_retries && rank < 0; ++attempt, eps *= 0.5) {
        EuclideanPathSpec moved = base_spec;
        moved.v0 = (base_spec.v0 + eps * gaussian(rng, d)).normalized();
        moved = translate_all(system, sigma, moved, eps * scale * gaussian(rng, d));
        if (!trace(system, sigma, moved, opt.path).ok()) {
          ++fails;
          continue;
        }
        rank = rank_or_fail(system, sigma, moved, opt.path);
        if (rank < 0) ++fails;
      }
    }
    per[static_cast<std::size_t>(i)] = rank;
    failures[static_cast<std::size_t>(i)] = fails;
  });
  DeltaResult out = summary(system, sigma, std::move(per), failures);
  if (out.successes == 0) throw NoValidPath("delta_sigma_constrained: no perturbed path traced");
  return out;
}

bool is_rich(const CylindricBilliardSystem& system, std::span<const int> sigma, int n_samples, std::uint64_t seed,
             const SamplingOptions& opt) {
  return delta_sigma(system, sigma, n_samples, seed, opt).delta == system.dim() - 1;
}

}  // namespace cylbill

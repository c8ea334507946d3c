#include "support.hpp"

#include <doctest.h>

#include <set>

using namespace testing;

TEST_CASE("sample seeds are distinct and deterministic") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(sample_seed(42, i));
  CHECK(seen.size() == 1000);
  CHECK(sample_seed(42, 7) == sample_seed(42, 7));
  CHECK(sample_seed(42, 7) != sample_seed(43, 7));
}

TEST_CASE("sampled paths trace") {
  const auto hb = hard_ball_system(HardBallParams{3, 2, {1, 1, 1}, 0.1}).system;
  const SymbolicSequence sigma{0, 1, 2, 0};
  for (auto measure : {SamplingMeasure::box, SamplingMeasure::constructive}) {
    SamplingOptions opt;
    opt.measure = measure;
    int ok = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto p = sample_path(hb, sigma, s, opt);
      if (!p.ok) continue;
      ++ok;
      CHECK(trace(hb, sigma, p.spec).ok());
      CHECK(check_spec(hb, sigma, p.spec).empty());
    }
    CHECK(ok >= 18);
  }
}

TEST_CASE("one spherical collision is rich") {
  for (int d : {2, 3, 4}) {
    const auto sys = single_sphere(d);
    const SymbolicSequence sigma{0};
    const auto r = delta_sigma(sys, sigma, 20, 1);
    CHECK(r.delta == d - 1);
    CHECK(r.successes == 20);
    CHECK(is_rich(sys, sigma, 20, 1));
  }
}

TEST_CASE("a sequence confined to one block is not rich") {
  const auto blocks = orthogonal_pair();
  for (const SymbolicSequence& sigma : {SymbolicSequence{0}, SymbolicSequence{0, 0, 0}, SymbolicSequence{0, 0, 0, 0, 0}}) {
    const auto r = delta_sigma(blocks, sigma, 20, 3);
    CHECK(r.delta <= 1);
    CHECK(r.neutral_bound == 1);
    CHECK(r.constrained_manifold_dim == 5);
    CHECK_FALSE(is_rich(blocks, sigma, 20, 3));
  }
}

TEST_CASE("typical dimension respects the neutral bound") {
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = uniform_int(rng, 2, 5);
    const auto sys = random_system(rng, d, uniform_int(rng, 1, 3), true);
    const auto sigma = random_sigma(rng, sys.size(), uniform_int(rng, 1, 4));
    SamplingOptions opt;
    opt.measure = SamplingMeasure::constructive;
    try {
      const auto r = delta_sigma(sys, sigma, 8, rng(), opt);
      CHECK(r.delta <= r.neutral_bound);
      CHECK(r.neutral_bound == d - 1 - common_generator_dim(sys, sigma));
    } catch (const NoValidPath&) {
    }
  }
}

TEST_CASE("typical dimension is monotone in the sample count") {
  const auto hb = hard_ball_system(HardBallParams{3, 2, {1, 2, 3}, 0.08}).system;
  const SymbolicSequence sigma{0, 1};
  int last = -1;
  for (int n : {1, 2, 4, 8, 16}) {
    const auto r = delta_sigma(hb, sigma, n, 11);
    CHECK(r.delta >= last);
    last = r.delta;
    // Prefix property: the first samples do not depend on n.
    const auto longer = delta_sigma(hb, sigma, n + 3, 11);
    for (int i = 0; i < n; ++i) CHECK(longer.per_sample[static_cast<std::size_t>(i)] == r.per_sample[static_cast<std::size_t>(i)]);
  }
}

TEST_CASE("delta_sigma argument errors") {
  const auto sys = single_sphere(2);
  CHECK_THROWS_AS(delta_sigma(sys, SymbolicSequence{0}, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(delta_sigma(sys, SymbolicSequence{5}, 3, 1), std::out_of_range);
  // Every flight misses when the box excludes the cylinder and retries are tiny.
  SamplingOptions opt;
  opt.box_half_width = 1e-6;
  opt.offset_retries = 1;
  opt.path_retries = 1;
  const auto tiny = single_sphere(2, 1e-9);
  CHECK_THROWS_AS(delta_sigma(tiny, SymbolicSequence{0, 0}, 3, 1, opt), NoValidPath);
}

TEST_CASE("the constrained dimension equals the unconstrained one") {
  Rng rng(17);
  int pairs = 0;
  std::vector<CylindricBilliardSystem> systems;
  systems.push_back(hard_ball_system(HardBallParams{3, 2, {1, 1, 1}, 0.1}).system);
  systems.push_back(hard_ball_system(HardBallParams{3, 2, {1, 2, 3}, 0.08}).system);
  systems.push_back(single_sphere(3));
  systems.push_back(orthogonal_pair());
  systems.push_back(random_system(rng, 3, 2, true, 0.1, 0.2));
  systems.push_back(random_system(rng, 4, 3, true, 0.1, 0.2));
  for (const auto& sys : systems) {
    for (int k = 0; k < 6; ++k) {
      const auto sigma = random_sigma(rng, sys.size(), uniform_int(rng, 1, 4));
      const auto base = random_spec(sys, sigma, rng);
      if (!base) continue;
      const auto unconstrained = delta_sigma(sys, sigma, 16, rng());
      const auto constrained = delta_sigma_constrained(sys, sigma, *base, 16, rng());
      CHECK(constrained.delta <= unconstrained.delta);
      CHECK(constrained.delta == unconstrained.delta);
      if (sigma.size() == 1) CHECK(constrained.delta == sys.base_space(sigma[0]).dim() - 1);
      ++pairs;
    }
  }
  CHECK(pairs >= 30);
}

TEST_CASE("hard-ball sequences covering every pair are rich") {
  const auto hb = hard_ball_system(HardBallParams{3, 2, {1, 1, 1}, 0.1}).system;
  const SymbolicSequence sigma{0, 1, 2, 0, 1, 2};
  CHECK(is_rich(hb, sigma, 16, 5));
}

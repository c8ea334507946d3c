#include "support.hpp"

#include <doctest.h>

using namespace testing;

namespace {

HardBallParams balls(int n, std::vector<double> masses, double r = 0.1, int nu = 2) {
  HardBallParams p;
  p.n = n;
  p.nu = nu;
  p.masses = std::move(masses);
  p.r = r;
  return p;
}

Subspace span_cols(const Mat& m) {
  std::vector<Vec> vs;
  for (long j = 0; j < m.cols(); ++j) vs.push_back(m.col(j));
  return orthonormalize(vs, static_cast<int>(m.rows()));
}

bool same_norms(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-9) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

}  // namespace

TEST_CASE("hard-ball radii") {
  const auto two = hard_ball_system(balls(2, {1, 1}, 0.1));
  CHECK(two.system.dim() == 2);
  REQUIRE(two.system.size() == 1);
  CHECK(std::abs(two.system.radius(0) - 0.1 * std::sqrt(2.0)) < 1e-15);

  const auto heavy = hard_ball_system(balls(2, {1, 3}, 0.1));
  CHECK(std::abs(heavy.system.radius(0) - 0.1 * std::sqrt(3.0)) < 1e-15);
}

TEST_CASE("hard-ball structure for N=3") {
  const auto hb = hard_ball_system(balls(3, {1, 1, 1}, 0.1));
  CHECK(hb.system.dim() == 4);
  REQUIRE(hb.system.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(hb.system.base_space(i).dim() == 2);
  CHECK(validate(hb.system).ok());
  CHECK(is_transverse(hb.system).transverse);
}

TEST_CASE("hard-ball invariants over random parameters") {
  Rng rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = uniform_int(rng, 2, 4);
    const int nu = uniform_int(rng, 2, 3);
    std::vector<double> masses;
    for (int i = 0; i < n; ++i) masses.push_back(uniform(rng, 0.5, 4.0));
    const double r = uniform(rng, 0.02, 0.1);
    const auto hb = hard_ball_system(balls(n, masses, r, nu));
    CHECK(hb.system.dim() == nu * (n - 1));
    REQUIRE(hb.system.size() == n * (n - 1) / 2);
    for (int c = 0; c < hb.system.size(); ++c) {
      const auto [i, j] = hb.pairs[static_cast<std::size_t>(c)];
      const double mi = masses[static_cast<std::size_t>(i)], mj = masses[static_cast<std::size_t>(j)];
      CHECK(std::abs(hb.system.radius(c) - 2.0 * r * std::sqrt(mi * mj / (mi + mj))) < 1e-14);
      CHECK(hb.system.base_space(c).dim() == nu);
      CHECK(hb.system.generator_space(c).dim() == nu * (n - 2));
      // Base space in ambient rescaled coordinates: x_i/sqrt(m_i) = -x_j/sqrt(m_j)
      // scaled, i.e. spanned by sqrt(m_j) e_i^c - sqrt(m_i) e_j^c.
      std::vector<Vec> expected;
      for (int k = 0; k < nu; ++k) {
        Vec v = Vec::Zero(nu * n);
        v(i * nu + k) = std::sqrt(mj);
        v(j * nu + k) = -std::sqrt(mi);
        expected.push_back(hb.frame.transpose() * v);
      }
      CHECK(projector_distance(hb.system.base_space(c), orthonormalize(expected)) < 1e-10);
    }
    for (int a = 0; a < hb.system.size(); ++a)
      for (int b = a + 1; b < hb.system.size(); ++b) {
        const auto [i1, j1] = hb.pairs[static_cast<std::size_t>(a)];
        const auto [i2, j2] = hb.pairs[static_cast<std::size_t>(b)];
        if (i1 != i2 && i1 != j2 && j1 != i2 && j1 != j2)
          CHECK(max_cosine(hb.system.base_space(a), hb.system.base_space(b)) < 1e-10);
      }
    CHECK(validate(hb.system).ok());
  }
}

TEST_CASE("hard-ball parameter errors") {
  CHECK_THROWS_AS(hard_ball_system(balls(1, {1})), BuildError);
  CHECK_THROWS_AS(hard_ball_system(balls(2, {1, -1})), BuildError);
  CHECK_THROWS_AS(hard_ball_system(balls(2, {1})), BuildError);
  CHECK_THROWS_AS(hard_ball_system(balls(2, {1, 1}, 0.0)), BuildError);
  CHECK_THROWS_AS(hard_ball_system(balls(2, {1, 1}, 0.1, 1)), BuildError);
}

TEST_CASE("hard-ball phase lies in the reduced space") {
  const auto hb = hard_ball_system(balls(3, {1, 2, 3}, 0.05));
  Mat pos(3, 2), vel(3, 2);
  pos << 0.1, 0.2, 0.5, 0.5, 0.8, 0.1;
  vel << 1, 0, 0, 1, -1, -1;
  const PhasePoint ph = hard_ball_phase(hb, pos, vel);
  CHECK(std::abs(ph.v.norm() - 1.0) < 1e-14);
  // Relative velocity of balls 0 and 1 in rescaled form is the projection on L_01.
  Vec w(6);
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 2; ++c) w(b * 2 + c) = std::sqrt(hb.params.masses[static_cast<std::size_t>(b)]) * vel(b, c);
  const Vec z = hb.frame.transpose() * w;
  CHECK((ph.v - z / z.norm()).norm() < 1e-14);
}

TEST_CASE("sub-billiard of everything on a transitive system") {
  const auto hb = hard_ball_system(balls(3, {1, 1, 1}, 0.1)).system;
  const std::vector<int> all{0, 1, 2};
  const auto sub = sub_billiard(hb, all);
  CHECK(sub.e0.dim() == 0);
  CHECK(sub.system.dim() == hb.dim());
  CHECK(same_norms(short_vector_norms(sub.system.lattice().basis(), 2.0),
                   short_vector_norms(hb.lattice().basis(), 2.0)));
  for (int i = 0; i < 3; ++i) CHECK(sub.system.radius(i) == hb.radius(i));
}

TEST_CASE("sub-billiard of one hard-ball pair is the two-ball system") {
  for (const std::vector<double>& masses : {std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}}) {
    const auto hb3 = hard_ball_system(balls(3, masses, 0.07));
    const std::vector<int> pair{0};
    const auto sub = sub_billiard(hb3.system, pair);
    const auto hb2 = hard_ball_system(balls(2, {masses[0], masses[1]}, 0.07));
    CHECK(sub.system.dim() == 2);
    CHECK(sub.e0.dim() == 2);
    CHECK(sub.system.radius(0) == doctest::Approx(hb2.system.radius(0)).epsilon(1e-14));
    // Lattices agree up to isometry: compare short-vector spectra.
    CHECK(same_norms(short_vector_norms(sub.system.lattice().basis(), 2.9),
                     short_vector_norms(hb2.system.lattice().basis(), 2.9)));
    CHECK(validate(sub.system).ok());
  }
}

TEST_CASE("sub-billiard of one orthogonal block") {
  const auto blocks = orthogonal_pair(0.2);
  const std::vector<int> first{0};
  const auto sub = sub_billiard(blocks, first);
  CHECK(sub.system.dim() == 2);
  CHECK(sub.system.size() == 1);
  CHECK(sub.system.base_space(0).dim() == 2);
  CHECK(std::abs(std::abs(sub.system.lattice().determinant()) - 1.0) < 1e-12);
  CHECK(short_vector_norms(sub.system.lattice().basis(), 1.0).size() == 4);
  // Translation (1/2,1/2,1/2,1/2) projects to the block point (1/2,1/2).
  CHECK((sub.system.translation_vector(0).cwiseAbs() - Vec::Constant(2, 0.5)).norm() < 1e-12);
  CHECK_THROWS_AS(sub_billiard(blocks, std::vector<int>{}), BuildError);
}

TEST_CASE("direct sums") {
  const Subspace e12 = span_cols(Mat::Identity(4, 4).leftCols(2));
  const Subspace e34 = span_cols(Mat::Identity(4, 4).rightCols(2));
  const auto orth = direct_sum_system({2, 2}, {e12, e34}, {0.1, 0.1}, {});
  CHECK_FALSE(is_transitive(orth.system.base_spaces()).transitive);
  CHECK(orth.graph.edges().empty());

  Mat tilt = Mat::Identity(4, 4).rightCols(2);
  tilt(0, 0) = 0.4;
  tilt(1, 1) = 0.3;
  const Subspace tilted = span_cols(tilt);
  const auto joined = direct_sum_system({2, 2}, {e12, tilted}, {0.1, 0.1}, {});
  CHECK(joined.graph.connected());
  const auto bases = joined.system.base_spaces();
  CHECK(is_transitive(bases).transitive);
  CHECK(commutant_dimension(bases) == 1);
  CHECK(validate(joined.system).ok());

  CHECK_THROWS_AS(direct_sum_system({2, 2}, {e12, e12}, {0.1, 0.1}, {}), BuildError);
  CHECK_THROWS_AS(direct_sum_system({2, 3}, {e12, e34}, {0.1, 0.1}, {}), BuildError);
}

TEST_CASE("tree-coupled direct sums are transverse") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    // Path graph 0 - 1 - 2 of 2-dim blocks in R^6: block j lives in
    // coordinates 2j, 2j+1 plus a small tilt into the previous block.
    const int d = 6;
    std::vector<Subspace> bases;
    for (int j = 0; j < 3; ++j) {
      Mat m = Mat::Zero(d, 2);
      m(2 * j, 0) = 1;
      m(2 * j + 1, 1) = 1;
      if (j > 0) m(2 * j - 1, 0) = uniform(rng, 0.2, 0.6);
      bases.push_back(span_cols(m));
    }
    const auto ds = direct_sum_system({2, 2, 2}, bases, {0.05, 0.05, 0.05}, {});
    CHECK(ds.graph.edges().size() == 2);
    CHECK(ds.graph.connected());
    CHECK(is_transverse(ds.system).transverse);
    for (int i = 0; i < 3; ++i) CHECK(projector_distance(ds.system.base_space(i), bases[static_cast<std::size_t>(i)]) < 1e-9);
  }
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rdlens/prob.hpp"
#include "rdlens/rng.hpp"
#include "test_util.hpp"

using namespace rdlens;
using Catch::Approx;

TEST_CASE("entropy basics") {
  REQUIRE(entropy(FiniteDist::uniform(2)) == Approx(std::log(2.0)).epsilon(1e-12));
  REQUIRE(entropy(FiniteDist::point_mass(5, 2)) == 0.0);
  // -0.7 ln 0.7 - 0.3 ln 0.3, hand-evaluated
  REQUIRE(entropy(FiniteDist::bernoulli(0.3)) ==
          Approx(0.6108643020548935).epsilon(1e-12));
}

TEST_CASE("entropy is non-negative, zero only at a point mass") {
  Rng rng(11);
  for (int it = 0; it < 200; ++it) {
    FiniteDist p = test::random_dist(rng, 1 + it % 7);
    REQUIRE(entropy(p) >= 0.0);
    if (p.size() > 1) REQUIRE(entropy(p) > 0.0);
  }
}

TEST_CASE("kl identity, hand value, support violation") {
  Rng rng(12);
  for (int it = 0; it < 50; ++it) {
    FiniteDist p = test::random_dist(rng, 2 + it % 6);
    REQUIRE(kl(p, p) == 0.0);
  }
  REQUIRE(kl(FiniteDist::bernoulli(1.0), FiniteDist::bernoulli(0.5)) ==
          Approx(std::log(2.0)).epsilon(1e-12));
  REQUIRE_THROWS_AS(kl(FiniteDist::bernoulli(0.5), FiniteDist::bernoulli(1.0)),
                    AbsoluteContinuityViolation);
  REQUIRE_THROWS_AS(kl(FiniteDist::uniform(2), FiniteDist::uniform(3)), DimensionMismatch);
}

TEST_CASE("kl is non-negative, zero iff equal within tolerance") {
  Rng rng(13);
  for (int it = 0; it < 200; ++it) {
    FiniteDist p = test::random_dist(rng, 5);
    FiniteDist q = test::random_dist(rng, 5);
    double d = kl(p, q);
    REQUIRE(d >= -1e-15);
    bool equal = true;
    for (std::size_t i = 0; i < 5; ++i)
      if (std::abs(p[i] - q[i]) > 1e-12) equal = false;
    if (!equal) REQUIRE(d > 0.0);
  }
}

TEST_CASE("mutual information: independence, identity coupling") {
  Rng rng(14);
  FiniteDist p = test::random_dist(rng, 6);
  FiniteDist q = test::random_dist(rng, 4);
  std::vector<double> t(24);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t k = 0; k < 4; ++k) t[i * 4 + k] = p[i] * q[k];
  REQUIRE(mutual_information(JointDist(t, 6, 4)) == Approx(0.0).margin(1e-13));

  const std::size_t n = 7;
  std::vector<double> diag(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i * n + i] = 1.0 / n;
  REQUIRE(mutual_information(JointDist(diag, n, n)) ==
          Approx(std::log(double(n))).epsilon(1e-12));
}

TEST_CASE("mutual information bounded by marginal entropies") {
  Rng rng(15);
  for (int it = 0; it < 1000; ++it) {
    JointDist j = test::random_joint(rng, 2 + it % 5, 2 + (it / 5) % 5);
    double mi = mutual_information(j);
    REQUIRE(mi >= -1e-12);
    REQUIRE(mi <= entropy(marginalize(j, Axis::Row)) + 1e-12);
    REQUIRE(mi <= entropy(marginalize(j, Axis::Col)) + 1e-12);
  }
}

TEST_CASE("mutual information invariant under relabeling") {
  Rng rng(16);
  FiniteDist p = test::random_dist(rng, 5);
  CondDist c = test::random_cond(rng, 5, 4);
  double base = mutual_information(compose_joint(p, c));

  // permute the row alphabet
  std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  std::vector<double> pp(5);
  std::vector<FiniteDist> rows;
  for (std::size_t i = 0; i < 5; ++i) {
    pp[i] = p[perm[i]];
    rows.push_back(c.row(perm[i]));
  }
  double permuted = mutual_information(compose_joint(FiniteDist(pp), CondDist(rows)));
  REQUIRE(permuted == Approx(base).epsilon(1e-12));
}

TEST_CASE("compose_joint examples") {
  // point mass: joint concentrated on one row
  Rng rng(17);
  CondDist c = test::random_cond(rng, 3, 4);
  JointDist j = compose_joint(FiniteDist::point_mass(3, 1), c);
  for (std::size_t k = 0; k < 4; ++k) {
    REQUIRE(j(0, k) == 0.0);
    REQUIRE(j(1, k) == Approx(c(1, k)).epsilon(1e-12));
    REQUIRE(j(2, k) == 0.0);
  }

  // uniform(2) with identity cond: diagonal 0.5/0.5
  CondDist ident = CondDist::from_matrix({{1.0, 0.0}, {0.0, 1.0}});
  JointDist d = compose_joint(FiniteDist::uniform(2), ident);
  REQUIRE(d(0, 0) == Approx(0.5));
  REQUIRE(d(1, 1) == Approx(0.5));
  REQUIRE(d(0, 1) == 0.0);

  // Ber(0.7) with rows [0.9,0.1],[0.2,0.8]: four hand multiplications
  CondDist rows = CondDist::from_matrix({{0.9, 0.1}, {0.2, 0.8}});
  JointDist h = compose_joint(FiniteDist::bernoulli(0.3), rows);
  REQUIRE(h(0, 0) == Approx(0.63).epsilon(1e-12));
  REQUIRE(h(0, 1) == Approx(0.07).epsilon(1e-12));
  REQUIRE(h(1, 0) == Approx(0.06).epsilon(1e-12));
  REQUIRE(h(1, 1) == Approx(0.24).epsilon(1e-12));

  REQUIRE_THROWS_AS(compose_joint(FiniteDist::uniform(3), ident), DimensionMismatch);
}

TEST_CASE("marginalize and posterior") {
  const std::size_t n = 4;
  std::vector<double> diag(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i * n + i] = 1.0 / n;
  FiniteDist m = marginalize(JointDist(diag, n, n), Axis::Row);
  for (std::size_t i = 0; i < n; ++i) REQUIRE(m[i] == Approx(0.25).epsilon(1e-12));

  // posterior of a product joint: every row equals the other marginal
  Rng rng(18);
  FiniteDist p = test::random_dist(rng, 3);
  FiniteDist q = test::random_dist(rng, 5);
  std::vector<double> t(15);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 5; ++k) t[i * 5 + k] = p[i] * q[k];
  CondDist post = posterior(JointDist(t, 3, 5), Axis::Row);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 5; ++k) REQUIRE(post(i, k) == Approx(q[k]).epsilon(1e-10));

  // hand renormalization of the derived joint along z
  CondDist rows = CondDist::from_matrix({{0.9, 0.1}, {0.2, 0.8}});
  JointDist h = compose_joint(FiniteDist::bernoulli(0.3), rows);
  CondDist x_given_z = posterior(h, Axis::Col);
  REQUIRE(x_given_z(0, 0) == Approx(0.9130434782608695).epsilon(1e-12));
  REQUIRE(x_given_z(0, 1) == Approx(0.08695652173913043).epsilon(1e-12));
  REQUIRE(x_given_z(1, 0) == Approx(0.22580645161290322).epsilon(1e-12));
  REQUIRE(x_given_z(1, 1) == Approx(0.7741935483870968).epsilon(1e-12));
}

TEST_CASE("posterior flags zero-mass slices with a uniform row") {
  std::vector<double> t = {0.5, 0.5, 0.0, 0.0};  // second row empty
  std::vector<std::size_t> flagged;
  CondDist post = posterior(JointDist(t, 2, 2), Axis::Row, &flagged);
  REQUIRE(flagged == std::vector<std::size_t>{1});
  REQUIRE(post(1, 0) == Approx(0.5));
  REQUIRE(post(1, 1) == Approx(0.5));
}

TEST_CASE("marginalize/posterior round-trip reproduces the joint") {
  Rng rng(19);
  for (int it = 0; it < 100; ++it) {
    JointDist j = test::random_joint(rng, 3 + it % 4, 2 + it % 5);
    JointDist back = compose_joint(marginalize(j, Axis::Row), posterior(j, Axis::Row));
    REQUIRE(back.n_rows() == j.n_rows());
    for (std::size_t r = 0; r < j.n_rows(); ++r)
      for (std::size_t c = 0; c < j.n_cols(); ++c)
        REQUIRE(back(r, c) == Approx(j(r, c)).margin(1e-12));
  }
}

TEST_CASE("construction validation") {
  REQUIRE_THROWS_AS(FiniteDist({0.5, -0.1, 0.6}), InvalidDistribution);
  REQUIRE_THROWS_AS(FiniteDist({0.5, 0.6}), InvalidDistribution);  // sums to 1.1
  REQUIRE_THROWS_AS(FiniteDist(std::vector<double>{}), InvalidDistribution);

  // within the renormalization window: accepted and exactly renormalized
  FiniteDist p({0.5, 0.5 + 4e-10});
  double sum = p[0] + p[1];
  REQUIRE(std::abs(sum - 1.0) < 1e-12);

  REQUIRE_THROWS_AS(JointDist({0.5, 0.5, 0.5, 0.5}, 2, 2), InvalidDistribution);
  REQUIRE_THROWS_AS(JointDist({0.5, 0.5}, 2, 2), DimensionMismatch);
}

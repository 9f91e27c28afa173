#include <cvxreg/canonical_lp.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <random>

using namespace cvxreg;

TEST(CanonicalLp, MatchesSubsetEnumerationOnSmallInstances) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const Index d = 1 + trial % 2;
    const Index n = 4 + trial % 5;
    Matrix anchors(n, d);
    Vector values(n);
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < d; ++k) anchors(i, k) = unif(rng);
      values(i) = unif(rng);
    }
    for (int q = 0; q < 10; ++q) {
      Vector x(d);
      for (Index k = 0; k < d; ++k) x(k) = 1.2 * unif(rng);
      const auto lp = solve_canonical_lp(anchors, values, x);
      const auto brute = oracle::canonical_enumerate(anchors, values, x);
      ASSERT_EQ(lp.has_value(), brute.has_value()) << "trial " << trial << " query " << q;
      if (lp) {
        EXPECT_NEAR(*lp, *brute, 1e-8);
      }
    }
  }
}

TEST(CanonicalLp, DegenerateVertexQueries) {
  Matrix anchors(4, 2);
  anchors << 0, 0, 1, 0, 0, 1, 1, 1;
  Vector values(4);
  values << 0, 1, 1, 3;
  for (Index i = 0; i < 4; ++i) {
    const auto v = solve_canonical_lp(anchors, values, anchors.row(i).transpose());
    ASSERT_TRUE(v.has_value());
    EXPECT_NEAR(*v, values(i), 1e-12);
  }
  Vector centre(2);
  centre << 0.5, 0.5;
  EXPECT_NEAR(*solve_canonical_lp(anchors, values, centre), 1.0, 1e-12);
}

TEST(CanonicalLp, CollinearAnchorsInPlane) {
  Matrix anchors(3, 2);
  anchors << 0, 0, 1, 1, 2, 2;
  const Vector values = Vector::Zero(3);
  Vector on(2);
  on << 1.5, 1.5;
  EXPECT_TRUE(solve_canonical_lp(anchors, values, on).has_value());
  Vector off(2);
  off << 1.0, 0.0;
  EXPECT_FALSE(solve_canonical_lp(anchors, values, off).has_value());
}

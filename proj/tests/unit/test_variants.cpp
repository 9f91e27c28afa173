#include <cvxreg/error.hpp>
#include <cvxreg/solver.hpp>
#include <cvxreg/variants.hpp>

#include <gtest/gtest.h>

#include "instances.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace cvxreg;
using testing_support::random_instance;
using testing_support::tight_config;

namespace {

double ls_objective(const Matrix& a, const Vector& b, const Vector& xi) {
  return (a * xi - b).squaredNorm();
}

double qp_objective(const Matrix& q, const Vector& a, const Vector& u) {
  return u.dot(q * u) + a.dot(u);
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index k = 0; k < cols; ++k) m(i, k) = g(rng);
  }
  return m;
}

}  // namespace

TEST(BallLs, InactiveConstraint) {
  const LipschitzSubproblem sub = LipschitzSubproblem::from_matrix(Matrix::Constant(1, 1, 2.0), 5.0);
  const BallLsResult r = solve_ball_ls(sub, Vector::Constant(1, 3.0));
  EXPECT_NEAR(r.xi(0), 1.5, 1e-15);
  EXPECT_DOUBLE_EQ(r.lambda, 0.0);
}

TEST(BallLs, ScalarActiveConstraint) {
  const LipschitzSubproblem sub = LipschitzSubproblem::from_matrix(Matrix::Constant(1, 1, 1.0), 2.0);
  const BallLsResult r = solve_ball_ls(sub, Vector::Constant(1, 4.0));
  EXPECT_NEAR(r.lambda, 1.0, 1e-10);
  EXPECT_NEAR(r.xi(0), 2.0, 1e-10);
}

TEST(BallLs, SvdReconstruction) {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(30, 3, rng);
  const LipschitzSubproblem sub = LipschitzSubproblem::from_matrix(a, 1.0);
  const Matrix recon = sub.u * sub.gamma.asDiagonal() * sub.v.transpose();
  EXPECT_LE((a - recon).norm(), 1e-8 * a.norm());
  for (Index k = 1; k < 3; ++k) EXPECT_GE(sub.gamma(k - 1), sub.gamma(k));
  EXPECT_GE(sub.gamma.minCoeff(), 0.0);
}

TEST(BallLs, MatchesProjectedGradientOracle) {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(30, 3, rng);
    const Vector b = 3.0 * random_matrix(30, 1, rng).col(0);
    const double bound = 0.05 + 0.05 * trial;
    const LipschitzSubproblem sub = LipschitzSubproblem::from_matrix(a, bound);
    const BallLsResult r = solve_ball_ls(sub, b);
    const Vector ref = oracle::ball_ls_projected_gradient(a, b, bound, 100000);
    EXPECT_NEAR(ls_objective(a, b, r.xi), ls_objective(a, b, ref), 1e-6);
    EXPECT_LE(r.xi.norm(), bound * (1.0 + 1e-8));
    EXPECT_LE(std::abs(r.lambda * (r.xi.squaredNorm() - bound * bound)), 1e-6);
    if (r.lambda > 0.0) {
      EXPECT_NEAR(r.xi.norm(), bound, 1e-8 * bound);
    }
  }
}

TEST(BallLs, SecularFunctionDecreasesAlongPath) {
  std::mt19937_64 rng(8);
  const Matrix a = random_matrix(25, 4, rng);
  const Vector b = 5.0 * random_matrix(25, 1, rng).col(0);
  const LipschitzSubproblem sub = LipschitzSubproblem::from_matrix(a, 0.1);
  const Vector c = sub.u.transpose() * b;
  std::vector<double> path;
  const BallLsResult r = solve_ball_ls_spectral(sub.gamma, sub.v, c, 0.1, &path);
  ASSERT_GT(r.lambda, 0.0);
  ASSERT_GE(path.size(), 2u);
  auto g = [&](double lambda) {
    double s = 0.0;
    for (Index k = 0; k < 4; ++k) {
      const double gk = sub.gamma(k) * sub.gamma(k);
      s += gk * c(k) * c(k) / ((gk + lambda) * (gk + lambda));
    }
    return s - 0.01;
  };
  std::sort(path.begin(), path.end());
  for (std::size_t t = 1; t < path.size(); ++t) {
    if (path[t] > path[t - 1]) {
      EXPECT_LT(g(path[t]), g(path[t - 1]));
    }
  }
}

TEST(Nnls, SeparableClip) {
  Vector a(2);
  a << -2.0, 2.0;
  const Vector u = solve_nnls_cd(Matrix::Identity(2, 2), a, {Sign::nonneg, Sign::nonneg}, Vector::Zero(2));
  EXPECT_NEAR(u(0), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(u(1), 0.0);
}

TEST(Nnls, NonnegativeGradientAtOriginGivesZero) {
  std::mt19937_64 rng(2);
  const Matrix b = random_matrix(4, 4, rng);
  const Matrix q = b.transpose() * b + Matrix::Identity(4, 4);
  const Vector a = Vector::LinSpaced(4, 0.5, 2.0);
  const Vector u = solve_nnls_cd(q, a, SignPattern(4, Sign::nonneg), Vector::Ones(4));
  EXPECT_DOUBLE_EQ(u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Nnls, MatchesSupportEnumeration) {
  std::mt19937_64 rng(44);
  std::uniform_int_distribution<int> pick(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix b = random_matrix(6, 4, rng);
    const Matrix q = b.transpose() * b / 6.0 + 0.1 * Matrix::Identity(4, 4);
    const Vector a = 2.0 * random_matrix(4, 1, rng).col(0);
    SignPattern signs(4);
    for (auto& s : signs) s = static_cast<Sign>(pick(rng));
    const Vector u = solve_nnls_cd(q, a, signs, Vector::Zero(4));
    const Vector ref = oracle::sign_qp_enumerate(q, a, signs);
    EXPECT_LE((u - ref).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
    for (Index k = 0; k < 4; ++k) {
      const Sign sign = signs[static_cast<std::size_t>(k)];
      if (sign == Sign::nonneg) {
        EXPECT_GE(u(k), 0.0);
      } else if (sign == Sign::nonpos) {
        EXPECT_LE(u(k), 0.0);
      }
    }
  }
}

TEST(Nnls, SweepsNeverIncreaseObjective) {
  std::mt19937_64 rng(5);
  const Matrix b = random_matrix(8, 5, rng);
  const Matrix q = b.transpose() * b / 8.0 + 0.05 * Matrix::Identity(5, 5);
  const Vector a = random_matrix(5, 1, rng).col(0);
  const SignPattern signs(5, Sign::nonneg);
  Vector u = Vector::Constant(5, 3.0);
  double prev = qp_objective(q, a, u);
  for (int sweep = 1; sweep <= 30; ++sweep) {
    NnlsOptions one;
    one.rel_tol = 1e300;
    one.max_sweeps = 1;
    u = solve_nnls_cd(q, a, signs, u, one);
    const double now = qp_objective(q, a, u);
    EXPECT_LE(now, prev + 1e-14);
    prev = now;
  }
}

TEST(Nnls, ZeroDiagonalRejected) {
  Matrix q = Matrix::Identity(2, 2);
  q(1, 1) = 0.0;
  EXPECT_THROW(solve_nnls_cd(q, Vector::Zero(2), SignPattern(2, Sign::nonneg), Vector::Zero(2)),
               FitError);
}

TEST(XiVariants, InfiniteBoundEqualsUnconstrainedStep) {
  const Dataset data = random_instance(15, 3, 7);
  SolverState base = SolverState::initial(data);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (Index i = 0; i < 15; ++i) {
    base.theta(i) += 0.2 * g(rng);
    for (Index j = 0; j < 15; ++j) {
      if (i != j) base.nu(i, j) = 0.01 * g(rng);
    }
  }
  SolverState plain = base;
  SolverState bounded = base;
  SubgradientConstraint any_bound;
  any_bound.lipschitz = 1.0;
  prepare_state(bounded, any_bound);
  update_xi(plain, data, 0.5);
  update_xi_lipschitz(bounded, data, 0.5, std::numeric_limits<double>::infinity());
  EXPECT_LE((plain.xi - bounded.xi).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LipschitzFit, BoundHoldsAndObjectiveMonotoneInL) {
  const Dataset data = random_instance(25, 2, 13);
  double prev = std::numeric_limits<double>::infinity();
  for (double bound : {0.2, 0.5, 1.0, 2.0, 5.0}) {
    SolverConfig cfg = tight_config(1e-8);
    cfg.constraint.lipschitz = bound;
    const FitResult res = fit(data, cfg);
    ASSERT_TRUE(res.model.meta.converged) << "L = " << bound;
    for (Index j = 0; j < 25; ++j) EXPECT_LE(res.model.xi.row(j).norm(), bound + 1e-8);
    EXPECT_LE(res.model.meta.objective, prev + 1e-6);
    prev = res.model.meta.objective;
    ASSERT_TRUE(res.model.variant.lipschitz.has_value());
    EXPECT_DOUBLE_EQ(*res.model.variant.lipschitz, bound);
  }
}

TEST(MonotoneFit, IncreasingAffineTruthInterpolated) {
  Dataset data = random_instance(10, 2, 4);
  data.y = data.x.rowwise().sum();
  SolverConfig cfg = tight_config(1e-7, 400000);
  cfg.constraint.signs = SignPattern(2, Sign::nonneg);
  const FitResult res = fit(data, cfg);
  EXPECT_GE(res.model.xi.minCoeff(), 0.0);
  EXPECT_LE(res.model.meta.objective, 1e-6);
}

// Reference objectives from an external interior-point conic solver run with
// gap and feasibility tolerances of 1e-12 on random_instance(8, 2, 77).
TEST(VariantFits, MatchExternalConicSolver) {
  const Dataset data = random_instance(8, 2, 77);
  const SignPattern signs{Sign::nonneg, Sign::free};

  SolverConfig mono = tight_config(1e-10);
  mono.constraint.signs = signs;
  EXPECT_NEAR(fit(data, mono).model.meta.objective, 0.22089337274249177, 1e-6);

  SolverConfig lip = tight_config(1e-10);
  lip.constraint.lipschitz = 0.7;
  EXPECT_NEAR(fit(data, lip).model.meta.objective, 0.21824506400225793, 1e-6);

  SolverConfig both = tight_config(1e-10);
  both.constraint.lipschitz = 0.7;
  both.constraint.signs = signs;
  const FitResult res = fit(data, both);
  EXPECT_NEAR(res.model.meta.objective, 0.4225143361721586, 1e-6);
  EXPECT_GE(res.model.xi.col(0).minCoeff(), 0.0);
  for (Index j = 0; j < 8; ++j) EXPECT_LE(res.model.xi.row(j).norm(), 0.7 + 1e-8);
}

TEST(Concave, NegationIdentity) {
  Dataset convex = random_instance(20, 2, 17);
  Dataset concave = convex;
  concave.y = -convex.y;
  const SolverConfig cfg = tight_config(1e-6, 3000);
  const FitResult a = fit_shape(concave, cfg, Shape::concave);
  const FitResult b = fit(convex, cfg);
  EXPECT_EQ(a.model.theta, -b.model.theta);
  EXPECT_EQ(a.model.xi, -b.model.xi);
  EXPECT_EQ(a.model.variant.shape, Shape::concave);
  EXPECT_EQ(a.model.meta.iterations, b.model.meta.iterations);
}

TEST(Concave, AffineDataSameFromBothPaths) {
  Dataset data = random_instance(10, 2, 3);
  data.y = Vector::Ones(10) - 2.0 * data.x.col(0) + 0.5 * data.x.col(1);
  const SolverConfig cfg = tight_config(1e-10);
  const FitResult vex = fit_shape(data, cfg, Shape::convex);
  const FitResult cave = fit_shape(data, cfg, Shape::concave);
  EXPECT_LE((vex.model.theta - cave.model.theta).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((vex.model.xi - cave.model.xi).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Concave, NonincreasingConcaveFitHasNonpositiveSlopes) {
  Dataset data;
  data.x = Vector::LinSpaced(12, 0.05, 1.0);
  data.y = -data.x.col(0).array().square().matrix();
  data.y(4) += 0.03;
  data.y(7) -= 0.02;
  SolverConfig cfg = tight_config(1e-7, 400000);
  cfg.constraint.signs = SignPattern{Sign::nonpos};
  const FitResult res = fit_shape(data, cfg, Shape::concave);
  EXPECT_LE(res.model.xi.maxCoeff(), 0.0);
  ASSERT_TRUE(res.model.variant.monotone.has_value());
  EXPECT_EQ((*res.model.variant.monotone)[0], Sign::nonpos);
  EXPECT_LE(max_constraint_violation(res.model), 1e-6);
}

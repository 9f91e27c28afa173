#pragma once

// Independent reference implementations used to freeze expected values.
// None of them shares code with the library beyond the Eigen types.

#include <cvxreg/types.hpp>

#include <optional>

namespace oracle {

using cvxreg::Index;
using cvxreg::Matrix;
using cvxreg::SignPattern;
using cvxreg::Vector;

struct QpSolution {
  Vector theta;
  double objective = 0.0;
  // Largest violation of the oracle's own optimality conditions.
  double kkt_error = 0.0;
};

/// Exact convex least squares fit of y on the design x (n x d).
/// d = 1: exhaustive enumeration of the active sets of the n - 2 slope
/// ordering constraints. d >= 2: every interior point is bounded by the
/// anchor simplices containing it, and the resulting cone projection is
/// solved exactly through its nonnegative least squares dual.
QpSolution convex_regression(const Matrix& x, const Vector& y);

/// Nonnegative least squares, Lawson-Hanson active set method.
Vector lawson_hanson(const Matrix& c, const Vector& d);

/// min u'Qu + <a,u> under coordinate sign constraints, by enumeration of
/// all 2^d patterns of constrained coordinates pinned at zero.
Vector sign_qp_enumerate(const Matrix& q, const Vector& a, const SignPattern& signs);

/// Euclidean projection onto the probability simplex, by enumerating all
/// supports and keeping the nearest feasible candidate.
Vector simplex_enumerate(const Vector& c);

/// Lower convex envelope of (anchors, values) at x: minimum of the
/// barycentric combinations over all anchor subsets of size <= d + 1 whose
/// hull contains x. Empty when x lies outside the hull.
std::optional<double> canonical_enumerate(const Matrix& anchors, const Vector& values,
                                          const Vector& x);

/// min ||A xi - b||^2 subject to ||xi|| <= bound, accelerated projected
/// gradient with a fixed iteration count.
Vector ball_ls_projected_gradient(const Matrix& a, const Vector& b, double bound, int iterations);

/// theta = (I + rho D'D)^{-1} v with D the explicit difference operator
/// (one row per ordered pair i != j).
Vector dense_theta_solve(const Vector& v, double rho);

/// D'z for an explicit pair-indexed z(i, j), built one pair at a time.
Vector dense_dt(const Matrix& z);

/// Least squares fit of xi_j to the targets etabar(:, j) over the rows
/// Delta_ij = X_i - X_j, solved by QR of the stacked design.
Vector dense_xi_solve(const Matrix& x, const Vector& targets, Index j);

/// argmin over eta <= 0 of nu (eta - r) + rho / 2 (eta - r)^2, by grid
/// search with successive refinement.
double eta_grid_search(double r, double nu, double rho);

}  // namespace oracle

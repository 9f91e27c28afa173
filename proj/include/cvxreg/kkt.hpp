#pragma once

#include <cvxreg/types.hpp>

namespace cvxreg {

struct Dataset;
struct SolverState;

/// Optimality residuals of the convex regression QP. All four vanish at an
/// exact primal-dual solution.
struct KktReport {
  /// ||eta - (theta_j + <Delta_ij, xi_j> - theta_i)||_F / n
  double primal_feasibility = 0.0;
  /// max_j || sum_i nu_ij Delta_ij ||_2
  double subgrad_stationarity = 0.0;
  /// || (theta - Y) - D^T vec(nu) ||_2
  double theta_gradient = 0.0;
  /// max_ij | eta_ij - min(eta_ij - nu_ij / rho, 0) |
  double complementarity = 0.0;
};

/// Evaluates the four residuals in O(n^2 d) without forming D.
/// Throws InputError on dimension mismatch.
KktReport compute_kkt_report(const SolverState& state, const Dataset& data, double rho);

/// D^T vec(z) for an n x n matrix z: column sums minus row sums, diagonal
/// excluded. Row sums are reduced over fixed column blocks so the result
/// does not depend on the worker count.
Vector apply_dt(const Matrix& z);

}  // namespace cvxreg

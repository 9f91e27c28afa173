#pragma once

#include <cvxreg/solver.hpp>
#include <cvxreg/types.hpp>

#include <vector>

namespace cvxreg {

/// Ball-constrained least squares min ||A xi - b||^2 s.t. ||xi||_2 <= L,
/// with A given by its thin SVD A = U diag(gamma) V^T.
struct LipschitzSubproblem {
  Matrix u;      // n x d
  Vector gamma;  // nonincreasing, >= 0
  Matrix v;      // d x d
  double bound = 0.0;

  /// Thin SVD of A (n x d, n >= d).
  static LipschitzSubproblem from_matrix(const Matrix& a, double bound);
};

struct BallLsResult {
  Vector xi;
  double lambda = 0.0;
  int newton_iterations = 0;
  bool used_bisection = false;
};

/// Newton root-finding on g(lambda) = sum_k gamma_k^2 c_k^2 / (gamma_k^2 + lambda)^2 - L^2
/// (c = U^T b), safeguarded by the bracket [0, gamma_max ||c|| / L]. Returns
/// lambda = 0 when the unconstrained solution is feasible. Throws
/// NumericalError when neither Newton nor the bisection fallback converge.
BallLsResult solve_ball_ls(const LipschitzSubproblem& sub, const Eigen::Ref<const Vector>& b);

/// Same problem in spectral coordinates: `c` = U^T b. If `path` is non-null
/// the Newton/bisection iterates lambda are appended to it.
BallLsResult solve_ball_ls_spectral(const Vector& gamma, const Matrix& v, const Vector& c,
                                    double bound, std::vector<double>* path = nullptr);

/// Options of the coordinate-descent quadratic solver.
struct NnlsOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_sweeps = 100000;
};

/// min u^T Q u + <a, u> subject to the sign pattern, by cyclic coordinate
/// descent with a running gradient; `warm` is the starting point (its
/// entries are clipped into the feasible set first). Throws FitError if a
/// diagonal entry of Q is not positive.
Vector solve_nnls_cd(const Matrix& q, const Vector& a, const SignPattern& signs,
                     const Vector& warm, const NnlsOptions& options = {});

/// Experimental: sign pattern and ||u||_2 <= L together. Bisects the ridge
/// weight mu in min u^T (Q + mu I) u + <a, u> over the sign cone until the
/// ball constraint is met, then projects onto the ball as a final check.
Vector solve_signed_ball_cd(const Matrix& q, const Vector& a, const SignPattern& signs,
                            double bound, const Vector& warm);

/// Subgradient step under ||xi_j||_2 <= L (state.spectral must be set).
void update_xi_lipschitz(SolverState& state, const Dataset& data, double rho, double bound);

/// Subgradient step under the sign pattern, warm-started at the current xi.
void update_xi_monotone(SolverState& state, const Dataset& data, double rho,
                        const SignPattern& signs);

/// Subgradient step under both constraints (experimental).
void update_xi_lipschitz_monotone(SolverState& state, const Dataset& data, double rho,
                                  double bound, const SignPattern& signs);

/// Fits a concave model by fitting a convex one to -Y (with flipped sign
/// pattern) and negating theta and xi. `config.constraint.signs` is read as
/// the monotonicity of the concave function.
FitResult fit_concave(const Dataset& data, const SolverConfig& config);

/// fit() or fit_concave() depending on the shape.
FitResult fit_shape(const Dataset& data, const SolverConfig& config, Shape shape);

}  // namespace cvxreg

#pragma once

#include <cvxreg/dataset.hpp>
#include <cvxreg/gram.hpp>
#include <cvxreg/kkt.hpp>
#include <cvxreg/pwa_model.hpp>
#include <cvxreg/types.hpp>

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cvxreg {

/// Schedule of the augmented Lagrangian method: warm-up sweeps identical to
/// ADMM, then outer iterations whose inner block-coordinate descent runs to
/// a tolerance that shrinks geometrically while rho grows by 1/shrink.
struct AlmSchedule {
  double delta0 = 1e-1;
  double shrink = 0.9954;
  int warmup_iters = 500;
  int max_outer = 3000;
  int inner_cap = 50;
  /// rho grows geometrically but never beyond this multiple of its starting value.
  double rho_ceiling = 3.0;
};

/// Constraints on every subgradient xi_j beyond the convexity constraints.
struct SubgradientConstraint {
  std::optional<double> lipschitz;
  std::optional<SignPattern> signs;

  bool active() const { return lipschitz.has_value() || signs.has_value(); }
};

struct SolverConfig {
  /// Step size; defaults to 1/n when empty.
  std::optional<double> rho;
  int max_iters = 20000;
  double tol_primal = 1e-4;
  double tol_grad = 1e-4;
  Algorithm algorithm = Algorithm::admm;
  AlmSchedule alm;
  SubgradientConstraint constraint;
  /// Worker cap for the data-parallel loops; 0 keeps the runtime default.
  int threads = 0;
  /// Refuse problems above this size: eta, nu and the inner-product cache
  /// are dense n x n double matrices.
  Index n_max = 12000;

  /// Throws InputError on out-of-range values.
  void validate() const;
};

/// Iterate (xi, theta, eta, nu) of the splitting method plus caches. The
/// diagonal entries (i = j) of eta, nu and inner carry no constraint and are
/// kept at zero; the block updates rely on that.
struct SolverState {
  Vector theta;
  Matrix xi;     // n x d, row j is xi_j
  Matrix eta;    // n x n, eta(i, j); eta <= 0
  Matrix nu;     // n x n, nu(i, j)
  Matrix inner;  // n x n, inner(i, j) = <Delta_ij, xi_j>
  std::shared_ptr<const GramFactors> gram;
  std::shared_ptr<const SpectralGram> spectral;

  Index n() const { return theta.size(); }
  Index d() const { return xi.cols(); }

  /// theta = Y, xi = 0, eta = 0, nu = 0; Gram factors computed here.
  static SolverState initial(const Dataset& data);

  /// Same starting point, reusing already computed factors.
  static SolverState initial(const Dataset& data, std::shared_ptr<const GramFactors> gram);

  /// Recomputes inner(i, j) from xi.
  void refresh_inner(const Dataset& data);
};

struct TraceRecord {
  int iter = 0;
  double objective = 0.0;
  double primal_feas = 0.0;
  double theta_grad = 0.0;
  double wall_time_s = 0.0;
  double rho = 0.0;
};

struct ConvergenceTrace {
  std::vector<TraceRecord> records;

  /// Header: iter,objective,primal_feas,theta_grad,wall_time_s
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

struct FitResult {
  PwaModel model;
  ConvergenceTrace trace;
  SolverState state;
};

/// Per-point Gram factorizations (validated positive definite).
GramFactors precompute_gram(const Dataset& data);

/// Unconstrained subgradient step: xi_j = G_j^{-1} sum_i Delta_ij etabar_ij
/// with etabar_ij = nu_ij / rho + eta_ij - (theta_j - theta_i). Refreshes
/// the inner-product cache.
void update_xi(SolverState& state, const Dataset& data, double rho);

/// Right-hand sides sum_i Delta_ij etabar_ij, one column per j (d x n).
Matrix xi_right_hand_sides(const SolverState& state, const Dataset& data, double rho);

/// (I + rho D^T D)^{-1} v in O(n) via D^T D = 2n I - 2 11^T.
Vector solve_theta_system(const Vector& v, double rho);

/// v = Y + D^T vec(nu) + rho D^T vec(eta - inner) in O(n^2).
Vector theta_right_hand_side(const SolverState& state, const Dataset& data, double rho);

void update_theta(SolverState& state, const Dataset& data, double rho);

/// eta_ij = min(theta_j + <Delta_ij, xi_j> - theta_i - nu_ij / rho, 0).
void update_eta(SolverState& state, double rho);

struct DualStepSummary {
  double primal_feasibility = 0.0;
  double theta_gradient = 0.0;
};

/// nu_ij += rho (eta_ij - (theta_j + <Delta_ij, xi_j> - theta_i)). Returns
/// ||eta - r||_F / n and ||theta - Y - D^T vec(nu_new)||_2.
DualStepSummary update_dual(SolverState& state, const Dataset& data, double rho);

/// Dispatches on config.constraint to the matching subgradient solver.
void update_xi_constrained(SolverState& state, const Dataset& data, double rho,
                           const SubgradientConstraint& constraint);

/// Three-block ADMM. Non-convergence within max_iters is reported through
/// model.meta.converged, not thrown. Throws NumericalError naming the
/// iteration if a non-finite iterate appears, FitError for degenerate
/// designs, InputError for bad configurations.
FitResult fit_admm(const Dataset& data, const SolverConfig& config);

/// Augmented Lagrangian method with inner block-coordinate descent.
FitResult fit_alm(const Dataset& data, const SolverConfig& config);

/// Dispatches on config.algorithm.
FitResult fit(const Dataset& data, const SolverConfig& config);

/// Sets the subgradient factors needed by `constraint` on a state.
void prepare_state(SolverState& state, const SubgradientConstraint& constraint);

}  // namespace cvxreg

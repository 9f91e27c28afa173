#pragma once

#include <cvxreg/solver.hpp>

#include <functional>

namespace cvxreg::detail {

/// Maps the right-hand side sum_i Delta_ij etabar_ij of point j (and the
/// current xi_j as a warm start) to the new xi_j.
using ColumnSolver = std::function<Vector(Index j, const Vector& rhs, const Vector& warm)>;

/// Runs `solve` for every j in parallel, stores xi_j and refreshes column j
/// of the inner-product cache.
void xi_step(SolverState& state, const Dataset& data, double rho, const ColumnSolver& solve);

/// The column solver for `constraint`: plain, ball, sign or both. An
/// infinite Lipschitz bound counts as no bound.
ColumnSolver column_solver(const SolverState& state, const SubgradientConstraint& constraint);

}  // namespace cvxreg::detail

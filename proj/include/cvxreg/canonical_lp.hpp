#pragma once

#include <cvxreg/types.hpp>

#include <optional>

namespace cvxreg {

/// Solves min { <values, a> : a >= 0, sum a = 1, anchors^T a = x } with a
/// two-phase dense tableau simplex and Bland's pivoting rule. The basis has
/// d + 1 rows, so every pivot costs O(n d).
///
/// Returns std::nullopt when the constraints are infeasible (x is outside
/// the convex hull of the anchor rows). Throws NumericalError if the pivot
/// limit is exceeded.
std::optional<double> solve_canonical_lp(const Matrix& anchors,
                                         const Vector& values,
                                         const Eigen::Ref<const Vector>& x);

}  // namespace cvxreg

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace cvxreg {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
// Column-major: column j of an n x n solver matrix holds the entries
// (i, j) for all i contiguously, which is the access pattern of the
// per-point subgradient updates.
using Matrix = Eigen::MatrixXd;

/// Coordinate-wise monotonicity direction imposed on a subgradient entry.
enum class Sign : std::uint8_t { nonneg, nonpos, free };

using SignPattern = std::vector<Sign>;

/// Parses "+,-,0,..." into a SignPattern. Throws InputError on bad tokens.
SignPattern parse_sign_pattern(const std::string& text);
std::string format_sign_pattern(const SignPattern& signs);
SignPattern flip_signs(const SignPattern& signs);

}  // namespace cvxreg

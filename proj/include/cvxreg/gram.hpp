#pragma once

#include <cvxreg/types.hpp>

#include <Eigen/Cholesky>

#include <cstdint>
#include <vector>

namespace cvxreg {

/// FNV-1a over the bytes of the covariate matrix; ties cached
/// factorizations to the design they were computed from.
std::uint64_t design_checksum(const Matrix& x);

/// Throws FitError naming the first pair of identical covariate rows.
void check_distinct_rows(const Matrix& x);

/// Per-point Gram matrices G_j = sum_i Delta_ij Delta_ij^T with
/// Delta_ij = X_i - X_j, held as Cholesky factors.
class GramFactors {
 public:
  /// O(n d^2 + n d^3) using the identity
  ///   G_j = C + n (X_j - xbar)(X_j - xbar)^T,  C = centered scatter.
  /// Throws FitError naming j when G_j is not numerically positive definite.
  explicit GramFactors(const Matrix& x);

  Index size() const { return static_cast<Index>(factors_.size()); }
  Index dim() const { return dim_; }
  std::uint64_t checksum() const { return checksum_; }

  const Matrix& gram(Index j) const { return grams_[static_cast<std::size_t>(j)]; }
  const Eigen::LLT<Matrix>& factor(Index j) const { return factors_[static_cast<std::size_t>(j)]; }

  /// G_j^{-1} rhs.
  Vector solve(Index j, const Eigen::Ref<const Vector>& rhs) const;

  /// Throws InputError if `x` is not the design these factors came from.
  void verify(const Matrix& x) const;

 private:
  Index dim_ = 0;
  std::uint64_t checksum_ = 0;
  std::vector<Matrix> grams_;
  std::vector<Eigen::LLT<Matrix>> factors_;
};

/// Spectral form of G_j = V diag(gamma^2) V^T, i.e. the singular values
/// gamma (nonincreasing) and right singular vectors V of the stacked
/// difference matrix A_j = [Delta_1j; ...; Delta_nj]. Only the d x d
/// factors are kept: U_j^T b = diag(1/gamma) V^T (A_j^T b), so the n x d
/// left factor is never needed inside the solver.
struct SpectralGram {
  std::vector<Vector> gamma;
  std::vector<Matrix> v;

  explicit SpectralGram(const GramFactors& grams);
};

}  // namespace cvxreg

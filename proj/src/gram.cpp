#include <cvxreg/error.hpp>
#include <cvxreg/gram.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>

namespace cvxreg {

std::uint64_t design_checksum(const Matrix& x) {
  std::uint64_t hash = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(x.data());
  const std::size_t count = static_cast<std::size_t>(x.size()) * sizeof(double);
  for (std::size_t k = 0; k < count; ++k) {
    hash ^= bytes[k];
    hash *= 1099511628211ULL;
  }
  hash ^= static_cast<std::uint64_t>(x.rows()) * 0x9E3779B97F4A7C15ULL;
  hash ^= static_cast<std::uint64_t>(x.cols());
  return hash;
}

void check_distinct_rows(const Matrix& x) {
  std::vector<Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  auto less = [&x](Index a, Index b) {
    for (Index k = 0; k < x.cols(); ++k) {
      if (x(a, k) != x(b, k)) return x(a, k) < x(b, k);
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t t = 1; t < order.size(); ++t) {
    const Index a = order[t - 1];
    const Index b = order[t];
    if (x.row(a) == x.row(b)) {
      throw FitError("covariate rows " + std::to_string(std::min(a, b) + 1) + " and " +
                     std::to_string(std::max(a, b) + 1) +
                     " are identical; the per-point Gram matrix would be singular");
    }
  }
}

GramFactors::GramFactors(const Matrix& x) : dim_(x.cols()), checksum_(design_checksum(x)) {
  const Index n = x.rows();
  const Index d = x.cols();
  if (n <= d) {
    throw FitError("need more observations than covariates (n = " + std::to_string(n) +
                   ", d = " + std::to_string(d) + ")");
  }
  check_distinct_rows(x);
  const Vector mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - mean.transpose();
  const Matrix scatter = centered.transpose() * centered;
  grams_.resize(static_cast<std::size_t>(n));
  factors_.resize(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    const Vector off = x.row(j).transpose() - mean;
    Matrix g = scatter + static_cast<double>(n) * off * off.transpose();
    Eigen::LLT<Matrix> llt(g);
    const auto diag = llt.matrixLLT().diagonal();
    const bool ok = llt.info() == Eigen::Success && diag.minCoeff() > 0.0 &&
                    diag.minCoeff() * diag.minCoeff() > 1e-13 * diag.maxCoeff() * diag.maxCoeff();
    if (!ok) {
      throw FitError("Gram matrix of point " + std::to_string(j + 1) +
                     " is singular; the covariates around it are affinely degenerate");
    }
    grams_[static_cast<std::size_t>(j)] = std::move(g);
    factors_[static_cast<std::size_t>(j)] = std::move(llt);
  }
}

Vector GramFactors::solve(Index j, const Eigen::Ref<const Vector>& rhs) const {
  return factor(j).solve(rhs);
}

void GramFactors::verify(const Matrix& x) const {
  if (x.rows() != size() || x.cols() != dim_ || design_checksum(x) != checksum_) {
    throw InputError("Gram factors were computed for a different design");
  }
}

SpectralGram::SpectralGram(const GramFactors& grams) {
  const Index n = grams.size();
  const Index d = grams.dim();
  gamma.resize(static_cast<std::size_t>(n));
  v.resize(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(grams.gram(j));
    if (eig.info() != Eigen::Success) {
      throw NumericalError("eigendecomposition of Gram matrix " + std::to_string(j + 1) +
                           " failed");
    }
    // ascending eigenvalues -> nonincreasing singular values
    Vector g(d);
    Matrix vj(d, d);
    for (Index k = 0; k < d; ++k) {
      g(k) = std::sqrt(std::max(eig.eigenvalues()(d - 1 - k), 0.0));
      vj.col(k) = eig.eigenvectors().col(d - 1 - k);
    }
    gamma[static_cast<std::size_t>(j)] = std::move(g);
    v[static_cast<std::size_t>(j)] = std::move(vj);
  }
}

}  // namespace cvxreg

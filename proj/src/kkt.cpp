#include <cvxreg/dataset.hpp>
#include <cvxreg/error.hpp>
#include <cvxreg/kkt.hpp>
#include <cvxreg/solver.hpp>

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace cvxreg {

Vector apply_dt(const Matrix& z) {
  const Index n = z.rows();
  if (z.cols() != n) throw InputError("apply_dt expects a square matrix");
  Vector col_sums(n);
  BlockRowSums rows(n);
  CVXREG_PARALLEL_FOR
  for (Index b = 0; b < rows.blocks(); ++b) {
    auto part = rows.block(b);
    for (Index j = rows.begin(b); j < rows.end(b); ++j) {
      double s = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (i == j) continue;
        const double v = z(i, j);
        s += v;
        part(i) += v;
      }
      col_sums(j) = s;
    }
  }
  return col_sums - rows.reduce();
}

KktReport compute_kkt_report(const SolverState& state, const Dataset& data, double rho) {
  const Index n = data.n();
  const Index d = data.d();
  if (state.theta.size() != n || state.xi.rows() != n || state.xi.cols() != d ||
      state.eta.rows() != n || state.eta.cols() != n || state.nu.rows() != n ||
      state.nu.cols() != n) {
    throw InputError("solver state dimensions do not match the data");
  }
  if (!(rho > 0.0)) throw InputError("rho must be positive");

  const Matrix& x = data.x;
  const Matrix cross = x * state.xi.transpose();  // (i, j) -> <X_i, xi_j>
  Vector primal_sq(n);
  Vector subgrad(n);
  Vector comp(n);
  CVXREG_PARALLEL_FOR
  for (Index j = 0; j < n; ++j) {
    const double self = cross(j, j);
    double sq = 0.0;
    double worst = 0.0;
    double nu_sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double r = state.theta(j) + cross(i, j) - self - state.theta(i);
      const double e = state.eta(i, j);
      const double nu = state.nu(i, j);
      sq += (e - r) * (e - r);
      worst = std::max(worst, std::abs(e - std::min(e - nu / rho, 0.0)));
      nu_sum += nu;
    }
    // sum_i nu_ij (X_i - X_j), diagonal term vanishes
    Vector g = x.transpose() * state.nu.col(j) - state.nu(j, j) * x.row(j).transpose();
    g -= nu_sum * x.row(j).transpose();
    primal_sq(j) = sq;
    subgrad(j) = g.norm();
    comp(j) = worst;
  }

  KktReport report;
  report.primal_feasibility = std::sqrt(primal_sq.sum()) / static_cast<double>(n);
  report.subgrad_stationarity = subgrad.maxCoeff();
  report.theta_gradient = (state.theta - data.y - apply_dt(state.nu)).norm();
  report.complementarity = comp.maxCoeff();
  return report;
}

}  // namespace cvxreg

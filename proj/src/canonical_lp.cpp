#include <cvxreg/canonical_lp.hpp>
#include <cvxreg/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cvxreg {

namespace {

// Dense tableau: rows 0..m-1 are constraints, row m holds reduced costs;
// the last column is the right-hand side. Columns [0, n) are the convex
// weights, [n, n + m) the phase-one artificials.
class Tableau {
 public:
  Tableau(Index m, Index n) : m_(m), n_(n), t_(Matrix::Zero(m + 1, n + m + 1)), basis_(m) {}

  double& at(Index r, Index c) { return t_(r, c); }
  double rhs(Index r) const { return t_(r, n_ + m_); }
  Index basis(Index r) const { return basis_[static_cast<std::size_t>(r)]; }
  void set_basis(Index r, Index c) { basis_[static_cast<std::size_t>(r)] = c; }
  Index cols() const { return n_ + m_; }

  void pivot(Index row, Index col) {
    const double p = t_(row, col);
    t_.row(row) /= p;
    for (Index r = 0; r <= m_; ++r) {
      if (r == row) continue;
      const double f = t_(r, col);
      if (f != 0.0) t_.row(r) -= f * t_.row(row);
    }
    set_basis(row, col);
  }

  // Costs are given per column; reduced costs are rebuilt from the basis.
  void load_costs(const Vector& costs) {
    t_.row(m_).setZero();
    t_.row(m_).head(cols()) = costs.transpose();
    for (Index r = 0; r < m_; ++r) {
      const double cb = costs(basis(r));
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(r);
    }
  }

  double objective() const { return -t_(m_, n_ + m_); }

  // Runs Bland's rule over the columns with `allowed(c)` true. Returns the
  // number of pivots taken.
  template <typename Allowed>
  long optimize(Allowed allowed, double tol, long budget) {
    long pivots = 0;
    for (;;) {
      Index enter = -1;
      for (Index c = 0; c < cols(); ++c) {
        if (allowed(c) && t_(m_, c) < -tol) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return pivots;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < m_; ++r) {
        const double a = t_(r, enter);
        if (a <= tol) continue;
        const double ratio = rhs(r) / a;
        const bool better = ratio < best - tol;
        const bool tie = !better && ratio <= best + tol && basis(r) < basis(leave);
        if (better || tie) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave < 0) {
        // The feasible set is bounded (a simplex slice), so this only
        // happens through round-off.
        throw NumericalError("canonical LP reported an unbounded ray");
      }
      pivot(leave, enter);
      if (++pivots > budget) throw NumericalError("canonical LP exceeded its pivot limit");
    }
  }

  double coef(Index r, Index c) const { return t_(r, c); }

 private:
  Index m_;
  Index n_;
  Matrix t_;
  std::vector<Index> basis_;
};

}  // namespace

std::optional<double> solve_canonical_lp(const Matrix& anchors, const Vector& values,
                                         const Eigen::Ref<const Vector>& x) {
  const Index n = anchors.rows();
  const Index d = anchors.cols();
  if (values.size() != n || x.size() != d) throw InputError("canonical LP dimension mismatch");
  const Index m = d + 1;

  const double scale = std::max({1.0, anchors.cwiseAbs().maxCoeff(), x.cwiseAbs().maxCoeff()});
  const double tol = 1e-11 * scale;

  Tableau tab(m, n);
  // Row 0: sum a = 1. Rows 1..d: anchors^T a = x. Rows are negated where
  // needed so every right-hand side is nonnegative.
  for (Index r = 0; r < m; ++r) {
    const double b = r == 0 ? 1.0 : x(r - 1);
    const double sign = b < 0.0 ? -1.0 : 1.0;
    for (Index c = 0; c < n; ++c) tab.at(r, c) = sign * (r == 0 ? 1.0 : anchors(c, r - 1));
    tab.at(r, n + m) = sign * b;
    tab.at(r, n + r) = 1.0;
    tab.set_basis(r, n + r);
  }

  const long budget = 50L * (n + m) + 1000;

  Vector phase1 = Vector::Zero(n + m);
  phase1.tail(m).setOnes();
  tab.load_costs(phase1);
  tab.optimize([](Index) { return true; }, tol, budget);
  if (tab.objective() > 1e-9 * scale) return std::nullopt;

  // Drive zero-level artificials out of the basis where a real column can
  // replace them; rows with no such column are redundant and stay inert.
  for (Index r = 0; r < m; ++r) {
    if (tab.basis(r) < n) continue;
    for (Index c = 0; c < n; ++c) {
      if (std::abs(tab.coef(r, c)) > tol) {
        tab.pivot(r, c);
        break;
      }
    }
  }

  Vector phase2 = Vector::Zero(n + m);
  phase2.head(n) = values;
  tab.load_costs(phase2);
  const double cost_tol = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());
  tab.optimize([n](Index c) { return c < n; }, cost_tol, budget);
  return tab.objective();
}

}  // namespace cvxreg

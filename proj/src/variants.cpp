#include <cvxreg/error.hpp>
#include <cvxreg/variants.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "solver_internal.hpp"

namespace cvxreg {

namespace {

constexpr int kNewtonLimit = 200;
constexpr int kBisectionLimit = 400;

struct Secular {
  const Vector& gamma;
  const Vector& c;

  // ||xi(lambda)||^2 and its derivative in lambda.
  std::pair<double, double> eval(double lambda) const {
    double value = 0.0;
    double slope = 0.0;
    for (Index k = 0; k < gamma.size(); ++k) {
      const double g2 = gamma(k) * gamma(k);
      if (g2 == 0.0) continue;
      const double den = g2 + lambda;
      const double t = g2 * c(k) * c(k) / (den * den);
      value += t;
      slope -= 2.0 * t / den;
    }
    return {value, slope};
  }
};

Vector xi_of_lambda(const Vector& gamma, const Matrix& v, const Vector& c, double lambda) {
  Vector w(gamma.size());
  for (Index k = 0; k < gamma.size(); ++k) {
    const double den = gamma(k) * gamma(k) + lambda;
    w(k) = den > 0.0 ? gamma(k) * c(k) / den : 0.0;
  }
  return v * w;
}

Vector clip_to_signs(Vector u, const SignPattern& signs) {
  for (Index k = 0; k < u.size(); ++k) {
    const Sign s = signs[static_cast<std::size_t>(k)];
    if (s == Sign::nonneg) u(k) = std::max(u(k), 0.0);
    if (s == Sign::nonpos) u(k) = std::min(u(k), 0.0);
  }
  return u;
}

}  // namespace

LipschitzSubproblem LipschitzSubproblem::from_matrix(const Matrix& a, double bound) {
  if (a.rows() < a.cols()) throw InputError("ball least squares needs at least d rows");
  if (!(bound > 0.0)) throw InputError("Lipschitz bound must be positive");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  LipschitzSubproblem sub;
  sub.u = svd.matrixU();
  sub.gamma = svd.singularValues();
  sub.v = svd.matrixV();
  sub.bound = bound;
  return sub;
}

BallLsResult solve_ball_ls(const LipschitzSubproblem& sub, const Eigen::Ref<const Vector>& b) {
  if (b.size() != sub.u.rows()) throw InputError("right-hand side length differs from A");
  const Vector c = sub.u.transpose() * b;
  return solve_ball_ls_spectral(sub.gamma, sub.v, c, sub.bound);
}

BallLsResult solve_ball_ls_spectral(const Vector& gamma, const Matrix& v, const Vector& c,
                                    double bound, std::vector<double>* path) {
  if (!(bound > 0.0)) throw InputError("Lipschitz bound must be positive");
  const double l2 = bound * bound;
  const Secular g{gamma, c};
  BallLsResult out;

  if (g.eval(0.0).first <= l2) {
    out.xi = xi_of_lambda(gamma, v, c, 0.0);
    return out;
  }

  const double gmax = gamma.maxCoeff();
  double lo = 0.0;
  double hi = gmax * c.norm() / bound;
  double lambda = std::clamp(gmax * (c.norm() / bound - gmax), 0.0, hi);
  const double target = 1e-12 * l2;
  bool done = false;

  for (int it = 0; it < kNewtonLimit && !done; ++it) {
    const auto [value, slope] = g.eval(lambda);
    if (path) path->push_back(lambda);
    ++out.newton_iterations;
    const double resid = value - l2;
    if (std::abs(resid) <= target) {
      done = true;
      break;
    }
    if (resid > 0.0) {
      lo = std::max(lo, lambda);
    } else {
      hi = std::min(hi, lambda);
    }
    double next = slope < 0.0 ? lambda - resid / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1.0)) {
      lambda = hi;
      done = true;
      break;
    }
    lambda = next;
  }

  if (!done) {
    out.used_bisection = true;
    lo = 0.0;
    hi = gmax * c.norm() / bound;
    for (int it = 0; it < kBisectionLimit; ++it) {
      lambda = 0.5 * (lo + hi);
      if (path) path->push_back(lambda);
      const double resid = g.eval(lambda).first - l2;
      if (std::abs(resid) <= target) {
        done = true;
        break;
      }
      (resid > 0.0 ? lo : hi) = lambda;
      if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1.0)) {
        lambda = hi;
        done = true;
        break;
      }
    }
    if (!done) throw NumericalError("ball-constrained least squares root finder did not converge");
  }

  out.lambda = lambda;
  out.xi = xi_of_lambda(gamma, v, c, lambda);
  const double norm = out.xi.norm();
  if (norm > bound) out.xi *= bound / norm;
  return out;
}

Vector solve_nnls_cd(const Matrix& q, const Vector& a, const SignPattern& signs,
                     const Vector& warm, const NnlsOptions& options) {
  const Index d = q.rows();
  if (q.cols() != d || a.size() != d || warm.size() != d ||
      static_cast<Index>(signs.size()) != d) {
    throw InputError("coordinate descent dimension mismatch");
  }
  for (Index k = 0; k < d; ++k) {
    if (!(q(k, k) > 0.0)) {
      throw FitError("diagonal entry " + std::to_string(k + 1) +
                     " of the quadratic form is not positive; the design is degenerate");
    }
  }
  Vector u = clip_to_signs(warm, signs);
  Vector grad = 2.0 * q * u + a;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    double moved_sq = 0.0;
    for (Index k = 0; k < d; ++k) {
      const double qkk = q(k, k);
      const double a_tilde = grad(k) - 2.0 * qkk * u(k);
      double next = -a_tilde / (2.0 * qkk);
      const Sign s = signs[static_cast<std::size_t>(k)];
      if (s == Sign::nonneg) next = std::max(next, 0.0);
      if (s == Sign::nonpos) next = std::min(next, 0.0);
      const double delta = next - u(k);
      if (delta != 0.0) {
        u(k) = next;
        grad.noalias() += 2.0 * delta * q.col(k);
        moved_sq += delta * delta;
      }
    }
    if (std::sqrt(moved_sq) <= options.rel_tol * u.norm() + options.abs_tol) return u;
  }
  throw NumericalError("coordinate descent did not converge within " +
                       std::to_string(options.max_sweeps) + " sweeps");
}

Vector solve_signed_ball_cd(const Matrix& q, const Vector& a, const SignPattern& signs,
                            double bound, const Vector& warm) {
  if (!(bound > 0.0)) throw InputError("Lipschitz bound must be positive");
  const Index d = q.rows();
  Vector u = solve_nnls_cd(q, a, signs, warm);
  if (u.norm() <= bound) return u;

  // ||u(mu)|| is nonincreasing in the ridge weight and at most ||a|| / (2 mu).
  const Matrix eye = Matrix::Identity(d, d);
  double lo = 0.0;
  double hi = a.norm() / (2.0 * bound);
  Vector best = solve_nnls_cd(q + hi * eye, a, signs, u);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(hi, 1.0); ++it) {
    const double mid = 0.5 * (lo + hi);
    Vector trial = solve_nnls_cd(q + mid * eye, a, signs, best);
    if (trial.norm() > bound) {
      lo = mid;
    } else {
      hi = mid;
      best = std::move(trial);
    }
  }
  const double norm = best.norm();
  if (norm > bound) best *= bound / norm;
  return best;
}

namespace {

detail::ColumnSolver ball_solver(const SolverState& state, double bound) {
  if (!state.spectral) throw InputError("spectral Gram factors missing; call prepare_state first");
  const SpectralGram& spec = *state.spectral;
  return [&spec, bound](Index j, const Vector& rhs, const Vector&) {
    const auto& gamma = spec.gamma[static_cast<std::size_t>(j)];
    const auto& v = spec.v[static_cast<std::size_t>(j)];
    // A^T b = V diag(gamma) U^T b
    const Vector c = (v.transpose() * rhs).cwiseQuotient(gamma);
    return solve_ball_ls_spectral(gamma, v, c, bound).xi;
  };
}

}  // namespace

namespace detail {

ColumnSolver column_solver(const SolverState& state, const SubgradientConstraint& constraint) {
  const GramFactors& gram = *state.gram;
  const bool ball = constraint.lipschitz && std::isfinite(*constraint.lipschitz);
  if (ball && constraint.signs) {
    const double bound = *constraint.lipschitz;
    const SignPattern signs = *constraint.signs;
    return [&gram, signs, bound](Index j, const Vector& rhs, const Vector& warm) {
      return solve_signed_ball_cd(gram.gram(j), -2.0 * rhs, signs, bound, warm);
    };
  }
  if (ball) return ball_solver(state, *constraint.lipschitz);
  if (constraint.signs) {
    const SignPattern signs = *constraint.signs;
    return [&gram, signs](Index j, const Vector& rhs, const Vector& warm) {
      return solve_nnls_cd(gram.gram(j), -2.0 * rhs, signs, warm);
    };
  }
  return [&gram](Index j, const Vector& rhs, const Vector&) { return gram.solve(j, rhs); };
}

}  // namespace detail

void update_xi_lipschitz(SolverState& state, const Dataset& data, double rho, double bound) {
  detail::xi_step(state, data, rho, ball_solver(state, bound));
}

void update_xi_monotone(SolverState& state, const Dataset& data, double rho,
                        const SignPattern& signs) {
  SubgradientConstraint c;
  c.signs = signs;
  detail::xi_step(state, data, rho, detail::column_solver(state, c));
}

void update_xi_lipschitz_monotone(SolverState& state, const Dataset& data, double rho,
                                  double bound, const SignPattern& signs) {
  SubgradientConstraint c;
  c.lipschitz = bound;
  c.signs = signs;
  detail::xi_step(state, data, rho, detail::column_solver(state, c));
}

FitResult fit_concave(const Dataset& data, const SolverConfig& config) {
  Dataset flipped{data.x, -data.y};
  SolverConfig inner = config;
  if (config.constraint.signs) inner.constraint.signs = flip_signs(*config.constraint.signs);
  FitResult result = fit(flipped, inner);
  result.model.theta = -result.model.theta;
  result.model.xi = -result.model.xi;
  result.model.variant.shape = Shape::concave;
  result.model.variant.monotone = config.constraint.signs;
  return result;
}

FitResult fit_shape(const Dataset& data, const SolverConfig& config, Shape shape) {
  return shape == Shape::concave ? fit_concave(data, config) : fit(data, config);
}

}  // namespace cvxreg

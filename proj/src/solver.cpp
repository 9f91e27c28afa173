#include <cvxreg/error.hpp>
#include <cvxreg/solver.hpp>
#include <cvxreg/variants.hpp>

#include <chrono>
#include <exception>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "solver_internal.hpp"

namespace cvxreg {

namespace {

using Clock = std::chrono::steady_clock;

bool lipschitz_finite(const SubgradientConstraint& c) {
  return c.lipschitz && std::isfinite(*c.lipschitz);
}

// The diagonal entries of eta, nu and inner stay exactly zero: every update
// below maps (0, 0, 0) at i = j to zeros, so the loops need no i != j test.

// sum_i Delta_ij etabar_ij = X^T e - X_j sum(e), with e_i = etabar_ij and e_j = 0.
Vector rhs_column(const Eigen::Ref<const Vector>& nu_j, const Eigen::Ref<const Vector>& eta_j,
                  const Vector& theta, const Dataset& data, double rho, Index j, Vector& e) {
  e = nu_j * (1.0 / rho) + eta_j + theta;
  e.array() -= theta(j);
  e(j) = 0.0;
  const double total = e.sum();
  return data.x.transpose() * e - total * data.x.row(j).transpose();
}

Vector rhs_column(const SolverState& s, const Dataset& data, double rho, Index j, Vector& e) {
  return rhs_column(s.nu.col(j), s.eta.col(j), s.theta, data, rho, j, e);
}

// Column j of the inner-product cache for subgradient xi_j.
void inner_column(const Dataset& data, const Eigen::Ref<const Vector>& xi_j, Index j,
                  Eigen::Ref<Vector> out) {
  out.noalias() = data.x * xi_j;
  out.array() -= out(j);
  out(j) = 0.0;
}

void refresh_inner_column(SolverState& s, const Dataset& data, Index j) {
  const Vector xi_j = s.xi.row(j).transpose();
  inner_column(data, xi_j, j, s.inner.col(j));
}

struct PassSummary {
  double primal_sq = 0.0;
  Vector dt_nu;
};

// eta_ij = min(r_ij - nu_ij / rho, 0) and, when `dual` is set,
// nu_ij += rho (eta_ij - r_ij) with the residual norm and D^T nu.
PassSummary eta_pass(SolverState& s, double rho, bool dual) {
  const Index n = s.n();
  PassSummary out;
  if (!dual) {
#pragma omp parallel
    {
      Vector r(n);
#pragma omp for schedule(static)
      for (Index j = 0; j < n; ++j) {
        r = s.inner.col(j) - s.theta;
        r.array() += s.theta(j);
        s.eta.col(j) = (r - s.nu.col(j) * (1.0 / rho)).cwiseMin(0.0);
      }
    }
    return out;
  }
  Vector col_sq(n);
  Vector col_sums(n);
  BlockRowSums rows(n);
#pragma omp parallel
  {
    Vector g(n);
#pragma omp for schedule(static)
    for (Index b = 0; b < rows.blocks(); ++b) {
      auto part = rows.block(b);
      for (Index j = rows.begin(b); j < rows.end(b); ++j) {
        g = s.inner.col(j) - s.theta;  // r_ij
        g.array() += s.theta(j);
        s.eta.col(j) = (g - s.nu.col(j) * (1.0 / rho)).cwiseMin(0.0);
        g = s.eta.col(j) - g;  // eta_ij - r_ij
        s.nu.col(j) += rho * g;
        col_sq(j) = g.squaredNorm();
        col_sums(j) = s.nu.col(j).sum();
        part += s.nu.col(j);
      }
    }
  }
  out.primal_sq = col_sq.sum();
  out.dt_nu = col_sums - rows.reduce();
  return out;
}

void check_finite(const SolverState& s, int iteration) {
  if (!s.theta.allFinite() || !s.xi.allFinite()) {
    throw NumericalError("non-finite iterate at iteration " + std::to_string(iteration));
  }
}

void check_size(const Dataset& data, const SolverConfig& config) {
  if (data.n() > config.n_max) {
    throw InputError("n = " + std::to_string(data.n()) + " exceeds the dense-storage ceiling n_max = " +
                     std::to_string(config.n_max) + " (set CVXREG_NMAX to raise it)");
  }
}

double objective_of(const SolverState& s, const Dataset& data) {
  return 0.5 * (data.y - s.theta).squaredNorm();
}

// The three primal block updates of one sweep, without the dual step.
void primal_sweep(SolverState& s, const Dataset& data, double rho, const SubgradientConstraint& c) {
  update_xi_constrained(s, data, rho, c);
  update_theta(s, data, rho);
  eta_pass(s, rho, false);
}

DualStepSummary dual_sweep(SolverState& s, const Dataset& data, double rho,
                           const SubgradientConstraint& c) {
  update_xi_constrained(s, data, rho, c);
  update_theta(s, data, rho);
  PassSummary p = eta_pass(s, rho, true);
  DualStepSummary out;
  out.primal_feasibility = std::sqrt(p.primal_sq) / static_cast<double>(s.n());
  out.theta_gradient = (s.theta - data.y - p.dt_nu).norm();
  return out;
}

FitResult finish(SolverState state, const Dataset& data, const SolverConfig& config,
                 ConvergenceTrace trace, int iterations, int sweeps, double rho, bool converged) {
  // Certification pass: the slack closest to feasibility makes the reported
  // primal residual equal to the true constraint violation.
  const Index n = state.n();
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      state.eta(i, j) =
          i == j ? 0.0 : std::min(state.theta(j) + state.inner(i, j) - state.theta(i), 0.0);
    }
  }
  FitResult result;
  PwaModel& model = result.model;
  model.theta = state.theta;
  model.xi = state.xi;
  model.anchors = data.x;
  model.variant.shape = Shape::convex;
  if (lipschitz_finite(config.constraint)) model.variant.lipschitz = config.constraint.lipschitz;
  model.variant.monotone = config.constraint.signs;
  model.meta.algorithm = config.algorithm;
  model.meta.iterations = iterations;
  model.meta.sweeps = sweeps;
  model.meta.rho = rho;
  model.meta.objective = objective_of(state, data);
  model.meta.kkt = compute_kkt_report(state, data, rho);
  model.meta.converged = converged && model.meta.kkt.primal_feasibility <= config.tol_primal &&
                         model.meta.kkt.theta_gradient <= config.tol_grad;
  model.meta.max_violation = max_constraint_violation(model);
  result.trace = std::move(trace);
  result.state = std::move(state);
  return result;
}

SolverState start(const Dataset& data, const SolverConfig& config) {
  data.validate();
  config.validate();
  check_size(data, config);
  if (config.constraint.signs && static_cast<Index>(config.constraint.signs->size()) != data.d()) {
    throw InputError("monotonicity pattern has " + std::to_string(config.constraint.signs->size()) +
                     " entries, data have " + std::to_string(data.d()) + " covariates");
  }
  SolverState state = SolverState::initial(data);
  prepare_state(state, config.constraint);
  return state;
}

}  // namespace

namespace detail {

void xi_step(SolverState& state, const Dataset& data, double rho, const ColumnSolver& solve) {
  const Index n = state.n();
  // Exceptions cannot cross the parallel region; keep the one from the
  // smallest j so the reported failure does not depend on scheduling.
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  bool failed = false;
#pragma omp parallel
  {
    Vector e(n);
#pragma omp for schedule(static) reduction(|| : failed)
    for (Index j = 0; j < n; ++j) {
      try {
        const Vector rhs = rhs_column(state, data, rho, j, e);
        const Vector warm = state.xi.row(j).transpose();
        state.xi.row(j) = solve(j, rhs, warm).transpose();
        refresh_inner_column(state, data, j);
      } catch (...) {
        errors[static_cast<std::size_t>(j)] = std::current_exception();
        failed = true;
      }
    }
  }
  if (failed) {
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
}

}  // namespace detail

namespace {

struct FusedPass {
  DualStepSummary dual;
  Vector theta_rhs;
};

// One dual step (eta, then nu) followed by the xi update of the next sweep
// and the theta right-hand side it implies, column by column. eta_j and
// column j of the inner-product cache are rebuilt on the fly, so nu is the
// only n x n matrix touched; state.eta and state.inner go stale and the
// caller refreshes them. The arithmetic matches dual_sweep exactly.
FusedPass fused_pass(SolverState& s, const Dataset& data, double rho,
                     const detail::ColumnSolver& solve) {
  const Index n = s.n();
  Vector col_sq(n);
  Vector nu_sums(n);
  Vector z_sums(n);
  BlockRowSums nu_rows(n);
  BlockRowSums z_rows(n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  bool failed = false;
#pragma omp parallel
  {
    Vector g(n);
    Vector e(n);
    Vector eta_j(n);
    Vector inner_j(n);
#pragma omp for schedule(static) reduction(|| : failed)
    for (Index b = 0; b < nu_rows.blocks(); ++b) {
      auto nu_part = nu_rows.block(b);
      auto z_part = z_rows.block(b);
      for (Index j = nu_rows.begin(b); j < nu_rows.end(b); ++j) {
        auto nu_j = s.nu.col(j);
        inner_column(data, s.xi.row(j).transpose(), j, inner_j);
        g = inner_j - s.theta;
        g.array() += s.theta(j);
        eta_j = (g - nu_j * (1.0 / rho)).cwiseMin(0.0);
        g = eta_j - g;
        nu_j += rho * g;
        col_sq(j) = g.squaredNorm();
        nu_sums(j) = nu_j.sum();
        nu_part += nu_j;
        try {
          const Vector rhs = rhs_column(nu_j, eta_j, s.theta, data, rho, j, e);
          const Vector warm = s.xi.row(j).transpose();
          s.xi.row(j) = solve(j, rhs, warm).transpose();
          inner_column(data, s.xi.row(j).transpose(), j, inner_j);
        } catch (...) {
          errors[static_cast<std::size_t>(j)] = std::current_exception();
          failed = true;
        }
        g = nu_j + rho * (eta_j - inner_j);
        z_sums(j) = g.sum();
        z_part += g;
      }
    }
  }
  if (failed) {
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  FusedPass out;
  out.dual.primal_feasibility = std::sqrt(col_sq.sum()) / static_cast<double>(n);
  out.dual.theta_gradient = (s.theta - data.y - (nu_sums - nu_rows.reduce())).norm();
  out.theta_rhs = data.y + z_sums - z_rows.reduce();
  return out;
}

}  // namespace

void SolverConfig::validate() const {
  if (rho && !(*rho > 0.0 && std::isfinite(*rho))) throw InputError("rho must be positive");
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (!(tol_primal > 0.0) || !(tol_grad > 0.0)) throw InputError("tolerances must be positive");
  if (!(alm.shrink > 0.0 && alm.shrink < 1.0)) throw InputError("ALM shrink factor must lie in (0, 1)");
  if (!(alm.delta0 > 0.0)) throw InputError("ALM delta0 must be positive");
  if (!(alm.rho_ceiling >= 1.0)) throw InputError("ALM rho ceiling must be at least 1");
  if (alm.warmup_iters < 0 || alm.max_outer < 1 || alm.inner_cap < 1) {
    throw InputError("ALM schedule counts out of range");
  }
  if (threads < 0) throw InputError("threads must be nonnegative");
  if (n_max < 2) throw InputError("n_max must be at least 2");
  if (constraint.lipschitz && !(*constraint.lipschitz > 0.0)) {
    throw InputError("Lipschitz bound must be positive");
  }
  if (constraint.signs && constraint.signs->empty()) throw InputError("empty sign pattern");
}

SolverState SolverState::initial(const Dataset& data) {
  return initial(data, std::make_shared<const GramFactors>(data.x));
}

SolverState SolverState::initial(const Dataset& data, std::shared_ptr<const GramFactors> gram) {
  data.validate();
  if (!gram) throw InputError("missing Gram factors");
  gram->verify(data.x);
  const Index n = data.n();
  SolverState s;
  s.theta = data.y;
  s.xi = Matrix::Zero(n, data.d());
  s.eta = Matrix::Zero(n, n);
  s.nu = Matrix::Zero(n, n);
  s.inner = Matrix::Zero(n, n);
  s.gram = std::move(gram);
  return s;
}

void SolverState::refresh_inner(const Dataset& data) {
  inner.resize(n(), n());
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n(); ++j) refresh_inner_column(*this, data, j);
}

void ConvergenceTrace::write_csv(std::ostream& out) const {
  out << "iter,objective,primal_feas,theta_grad,wall_time_s\n";
  for (const auto& r : records) {
    out << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.primal_feas)
        << ',' << format_double(r.theta_grad) << ',' << format_double(r.wall_time_s) << '\n';
  }
}

void ConvergenceTrace::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_csv(out);
}

GramFactors precompute_gram(const Dataset& data) {
  data.validate();
  return GramFactors(data.x);
}

void update_xi(SolverState& state, const Dataset& data, double rho) {
  const GramFactors& gram = *state.gram;
  detail::xi_step(state, data, rho,
                  [&gram](Index j, const Vector& rhs, const Vector&) { return gram.solve(j, rhs); });
}

Matrix xi_right_hand_sides(const SolverState& state, const Dataset& data, double rho) {
  const Index n = state.n();
  Matrix out(data.d(), n);
  Vector e(n);
  for (Index j = 0; j < n; ++j) out.col(j) = rhs_column(state, data, rho, j, e);
  return out;
}

Vector solve_theta_system(const Vector& v, double rho) {
  const double n = static_cast<double>(v.size());
  return (v.array() + 2.0 * rho * v.sum()) / (1.0 + 2.0 * n * rho);
}

Vector theta_right_hand_side(const SolverState& state, const Dataset& data, double rho) {
  const Index n = state.n();
  Vector col_sums(n);
  BlockRowSums rows(n);
#pragma omp parallel
  {
    Vector z(n);
#pragma omp for schedule(static)
    for (Index b = 0; b < rows.blocks(); ++b) {
      auto part = rows.block(b);
      for (Index j = rows.begin(b); j < rows.end(b); ++j) {
        z = state.nu.col(j) + rho * (state.eta.col(j) - state.inner.col(j));
        col_sums(j) = z.sum();
        part += z;
      }
    }
  }
  return data.y + col_sums - rows.reduce();
}

void update_theta(SolverState& state, const Dataset& data, double rho) {
  state.theta = solve_theta_system(theta_right_hand_side(state, data, rho), rho);
}

void update_eta(SolverState& state, double rho) { eta_pass(state, rho, false); }

DualStepSummary update_dual(SolverState& state, const Dataset& data, double rho) {
  const Index n = state.n();
  Vector col_sq(n);
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < n; ++j) {
    double sq = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double g = state.eta(i, j) - (state.theta(j) + state.inner(i, j) - state.theta(i));
      state.nu(i, j) += rho * g;
      sq += g * g;
    }
    col_sq(j) = sq;
  }
  DualStepSummary out;
  out.primal_feasibility = std::sqrt(col_sq.sum()) / static_cast<double>(n);
  out.theta_gradient = (state.theta - data.y - apply_dt(state.nu)).norm();
  return out;
}

void prepare_state(SolverState& state, const SubgradientConstraint& constraint) {
  if (lipschitz_finite(constraint) && !state.spectral) {
    state.spectral = std::make_shared<const SpectralGram>(*state.gram);
  }
}

void update_xi_constrained(SolverState& state, const Dataset& data, double rho,
                           const SubgradientConstraint& constraint) {
  detail::xi_step(state, data, rho, detail::column_solver(state, constraint));
}

FitResult fit_admm(const Dataset& data, const SolverConfig& config) {
  ThreadScope threads(config.threads);
  SolverState state = start(data, config);
  const double rho = config.rho.value_or(1.0 / static_cast<double>(data.n()));
  ConvergenceTrace trace;
  const auto t0 = Clock::now();
  bool converged = false;
  int iter = 0;
  // Each pass also takes the next sweep's xi step; `xi_done` keeps the xi
  // that the last reported residuals belong to. finish() recomputes eta.
  const detail::ColumnSolver solve = detail::column_solver(state, config.constraint);
  detail::xi_step(state, data, rho, solve);
  Vector theta_rhs = theta_right_hand_side(state, data, rho);
  Matrix xi_done = state.xi;
  while (iter < config.max_iters) {
    ++iter;
    state.theta = solve_theta_system(theta_rhs, rho);
    xi_done = state.xi;
    FusedPass pass = fused_pass(state, data, rho, solve);
    const DualStepSummary& step = pass.dual;
    check_finite(state, iter);
    trace.records.push_back({iter, objective_of(state, data), step.primal_feasibility,
                             step.theta_gradient,
                             std::chrono::duration<double>(Clock::now() - t0).count(), rho});
    if (step.primal_feasibility <= config.tol_primal && step.theta_gradient <= config.tol_grad) {
      converged = true;
      break;
    }
    theta_rhs = std::move(pass.theta_rhs);
  }
  state.xi = std::move(xi_done);
  state.refresh_inner(data);
  return finish(std::move(state), data, config, std::move(trace), iter, iter, rho, converged);
}

FitResult fit_alm(const Dataset& data, const SolverConfig& config) {
  ThreadScope threads(config.threads);
  SolverState state = start(data, config);
  double rho = config.rho.value_or(1.0 / static_cast<double>(data.n()));
  const double rho_max = rho * config.alm.rho_ceiling;
  ConvergenceTrace trace;
  const auto t0 = Clock::now();
  bool converged = false;
  int iter = 0;
  int sweeps = 0;

  auto record = [&](const DualStepSummary& step) {
    trace.records.push_back({iter, objective_of(state, data), step.primal_feasibility,
                             step.theta_gradient,
                             std::chrono::duration<double>(Clock::now() - t0).count(), rho});
    return step.primal_feasibility <= config.tol_primal && step.theta_gradient <= config.tol_grad;
  };

  const int warmup = std::min(config.alm.warmup_iters, config.max_iters);
  while (!converged && iter < warmup) {
    ++iter;
    ++sweeps;
    const DualStepSummary step = dual_sweep(state, data, rho, config.constraint);
    check_finite(state, iter);
    converged = record(step);
  }

  double delta = config.alm.delta0;
  for (int outer = 0; !converged && outer < config.alm.max_outer && iter < config.max_iters;
       ++outer) {
    for (int inner = 0; inner < config.alm.inner_cap; ++inner) {
      const Vector theta_prev = state.theta;
      const Matrix xi_prev = state.xi;
      primal_sweep(state, data, rho, config.constraint);
      ++sweeps;
      check_finite(state, iter + 1);
      const double moved =
          std::sqrt((state.theta - theta_prev).squaredNorm() + (state.xi - xi_prev).squaredNorm());
      const double size = std::sqrt(state.theta.squaredNorm() + state.xi.squaredNorm());
      if (moved <= delta * std::max(size, std::numeric_limits<double>::min())) break;
    }
    ++iter;
    converged = record(update_dual(state, data, rho));
    if (converged) break;
    delta *= config.alm.shrink;
    rho = std::min(rho / config.alm.shrink, rho_max);
  }
  return finish(std::move(state), data, config, std::move(trace), iter, sweeps, rho, converged);
}

FitResult fit(const Dataset& data, const SolverConfig& config) {
  return config.algorithm == Algorithm::alm ? fit_alm(data, config) : fit_admm(data, config);
}

}  // namespace cvxreg

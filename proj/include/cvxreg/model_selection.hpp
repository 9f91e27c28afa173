#pragma once

#include <cvxreg/solver.hpp>
#include <cvxreg/types.hpp>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace cvxreg {

struct CvResult {
  /// Ascending; +infinity stands for the unconstrained fit.
  std::vector<double> grid;
  std::vector<double> mean_error;
  std::vector<double> standard_error;
  std::size_t chosen_index = 0;
  double chosen = 0.0;
  /// Fold index of every data point.
  std::vector<int> folds;

  /// Header: L,mean_err,se,chosen
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
};

/// Smallest index whose error is within one standard error (of the best
/// entry) of the minimum error.
std::size_t one_standard_error_choice(const std::vector<double>& mean_error,
                                      const std::vector<double>& standard_error);

/// Seeded random partition of n points into k folds of near-equal size.
std::vector<int> assign_folds(Index n, int k, std::uint64_t seed);

/// 15 log-spaced values from 0.1 g to 10 g, g = max_j ||xi_j||_2 of the
/// unconstrained fit, followed by +infinity.
std::vector<double> default_lipschitz_grid(const PwaModel& unconstrained_fit);

/// k-fold cross-validation of the Lipschitz bound with the one-standard-error
/// rule. Held-out points are predicted with the max-rule extension of the
/// training-fold model. `config.constraint.lipschitz` is overwritten per
/// grid value; other settings (tolerances, signs, algorithm) are kept.
/// Throws InputError for k < 2, an unsorted or empty grid, or a training
/// fold with n_train <= d.
CvResult cross_validate_lipschitz(const Dataset& data, const std::vector<double>& grid, int k,
                                  std::uint64_t seed, const SolverConfig& config);

struct RiskProfileRow {
  double bound = 0.0;
  double mean_risk = 0.0;
  double mean_training_error = 0.0;
};

/// One replication: covariates, noisy responses and the noiseless signal
/// phi(X_i) on the same scale as the responses.
struct SimulatedSample {
  Dataset data;
  Vector signal;
};

using SampleGenerator = std::function<SimulatedSample(int replication)>;

struct RiskProfile {
  std::vector<RiskProfileRow> rows;
  /// Per replication, per grid value (same order as rows).
  std::vector<std::vector<double>> risk;
  std::vector<std::vector<double>> training_error;

  /// Header: L,mean_risk,mean_train_err
  void write_csv(std::ostream& out) const;
};

/// risk = (1/n) sum (fit(X_i) - phi(X_i))^2 and training error
/// (1/n) sum (fit(X_i) - Y_i)^2, averaged over replications, for every
/// Lipschitz bound in the grid.
RiskProfile risk_profile(const SampleGenerator& generator, const std::vector<double>& grid,
                         int replications, const SolverConfig& config);

}  // namespace cvxreg

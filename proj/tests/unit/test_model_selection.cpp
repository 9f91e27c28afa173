#include <cvxreg/error.hpp>
#include <cvxreg/model_selection.hpp>
#include <cvxreg/solver.hpp>

#include <gtest/gtest.h>

#include "instances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

using namespace cvxreg;
using testing_support::random_instance;
using testing_support::tight_config;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(OneStandardError, PicksSmallestWithinBand) {
  const std::vector<double> mean{0.50, 0.42, 0.40, 0.41};
  const std::vector<double> se{0.01, 0.01, 0.03, 0.01};
  EXPECT_EQ(one_standard_error_choice(mean, se), 1u);
}

TEST(OneStandardError, ZeroErrorsReduceToArgmin) {
  const std::vector<double> mean{0.5, 0.3, 0.2, 0.25};
  EXPECT_EQ(one_standard_error_choice(mean, std::vector<double>(4, 0.0)), 2u);
}

TEST(OneStandardError, InflatingErrorsNeverPicksLarger) {
  const std::vector<double> mean{0.9, 0.6, 0.5, 0.45, 0.44, 0.47};
  const std::vector<double> se{0.02, 0.03, 0.01, 0.02, 0.015, 0.01};
  std::size_t prev = mean.size();
  for (double factor : {0.0, 0.5, 1.0, 2.0, 5.0, 20.0}) {
    std::vector<double> scaled = se;
    for (double& s : scaled) s *= factor;
    const std::size_t pick = one_standard_error_choice(mean, scaled);
    EXPECT_LE(pick, prev);
    prev = pick;
  }
}

TEST(OneStandardError, RejectsMismatch) {
  EXPECT_THROW(one_standard_error_choice({1.0}, {}), InputError);
}

TEST(Folds, BalancedAndSeeded) {
  const std::vector<int> a = assign_folds(23, 5, 7);
  const std::vector<int> b = assign_folds(23, 5, 7);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, assign_folds(23, 5, 8));
  for (int f = 0; f < 5; ++f) {
    const auto count = std::count(a.begin(), a.end(), f);
    EXPECT_GE(count, 4);
    EXPECT_LE(count, 5);
  }
  EXPECT_THROW(assign_folds(10, 1, 0), InputError);
  EXPECT_THROW(assign_folds(3, 4, 0), InputError);
}

TEST(DefaultGrid, SpansTwoDecadesAroundLargestSubgradient) {
  const PwaModel m = fit(random_instance(20, 2, 1), tight_config(1e-6)).model;
  const double g = m.xi.rowwise().norm().maxCoeff();
  const std::vector<double> grid = default_lipschitz_grid(m);
  ASSERT_EQ(grid.size(), 16u);
  EXPECT_NEAR(grid.front(), 0.1 * g, 1e-12 * g);
  EXPECT_NEAR(grid[14], 10.0 * g, 1e-12 * g);
  EXPECT_NEAR(grid[7], g, 1e-12 * g);
  EXPECT_TRUE(std::isinf(grid.back()));
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
}

TEST(CrossValidate, SingletonGridChosen) {
  const Dataset data = random_instance(20, 1, 2);
  const CvResult cv = cross_validate_lipschitz(data, {0.7}, 4, 1, tight_config(1e-5));
  EXPECT_EQ(cv.chosen_index, 0u);
  EXPECT_DOUBLE_EQ(cv.chosen, 0.7);
  EXPECT_GE(cv.standard_error[0], 0.0);
}

TEST(CrossValidate, SlackBoundsTieAndSmallestWins) {
  const Dataset data = random_instance(24, 1, 3);
  const SolverConfig cfg = tight_config(1e-7);
  const double g = fit(data, cfg).model.xi.rowwise().norm().maxCoeff();
  const std::vector<double> grid{100.0 * g, 200.0 * g, kInf};
  const CvResult cv = cross_validate_lipschitz(data, grid, 4, 5, cfg);
  EXPECT_NEAR(cv.mean_error[0], cv.mean_error[2], 1e-8);
  EXPECT_NEAR(cv.mean_error[1], cv.mean_error[2], 1e-8);
  EXPECT_EQ(cv.chosen_index, 0u);
}

TEST(CrossValidate, ReproducibleForSeed) {
  const Dataset data = random_instance(30, 2, 4);
  const SolverConfig cfg = tight_config(1e-5);
  const std::vector<double> grid{0.3, 1.0, 3.0, kInf};
  const CvResult a = cross_validate_lipschitz(data, grid, 5, 11, cfg);
  const CvResult b = cross_validate_lipschitz(data, grid, 5, 11, cfg);
  EXPECT_EQ(a.folds, b.folds);
  EXPECT_EQ(a.mean_error, b.mean_error);
  EXPECT_EQ(a.standard_error, b.standard_error);
  EXPECT_EQ(a.chosen_index, b.chosen_index);
  EXPECT_TRUE(std::find(grid.begin(), grid.end(), a.chosen) != grid.end());

  std::ostringstream csv;
  a.write_csv(csv);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "L,mean_err,se,chosen");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(CrossValidate, RejectsBadArguments) {
  const Dataset data = random_instance(12, 3, 6);
  const SolverConfig cfg = tight_config(1e-4);
  EXPECT_THROW(cross_validate_lipschitz(data, {1.0}, 1, 0, cfg), InputError);
  EXPECT_THROW(cross_validate_lipschitz(data, {}, 3, 0, cfg), InputError);
  EXPECT_THROW(cross_validate_lipschitz(data, {2.0, 1.0}, 3, 0, cfg), InputError);
  const Dataset tiny = random_instance(5, 3, 6);
  EXPECT_THROW(cross_validate_lipschitz(tiny, {1.0}, 2, 0, cfg), InputError);
}

TEST(RiskProfile, NoiselessTruthRecovered) {
  const SampleGenerator gen = [](int rep) {
    SimulatedSample s;
    s.data = random_instance(15, 2, 50 + static_cast<std::uint64_t>(rep), 0.0);
    s.signal = s.data.y;
    return s;
  };
  const RiskProfile p = risk_profile(gen, {3.0, kInf}, 2, tight_config(1e-10));
  for (const auto& row : p.rows) EXPECT_LE(row.mean_risk, 1e-6);
}

TEST(RiskProfile, TrainingErrorNonincreasingInBound) {
  const SampleGenerator gen = [](int rep) {
    SimulatedSample s;
    s.data = random_instance(25, 3, 70 + static_cast<std::uint64_t>(rep), 0.4);
    s.signal = s.data.x.rowwise().squaredNorm();
    return s;
  };
  const std::vector<double> grid{0.1, 0.3, 1.0, 3.0, kInf};
  const RiskProfile p = risk_profile(gen, grid, 3, tight_config(1e-8));
  for (const auto& train : p.training_error) {
    for (std::size_t t = 1; t < train.size(); ++t) EXPECT_LE(train[t], train[t - 1] + 1e-8);
  }
  ASSERT_EQ(p.rows.size(), grid.size());
  std::ostringstream csv;
  p.write_csv(csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "L,mean_risk,mean_train_err");
}

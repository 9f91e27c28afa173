#include <cvxreg/error.hpp>
#include <cvxreg/model_selection.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

namespace cvxreg {

namespace {

std::optional<double> as_bound(double value) {
  if (std::isinf(value)) return std::nullopt;
  return value;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw InputError("Lipschitz grid is empty");
  for (std::size_t t = 0; t < grid.size(); ++t) {
    if (!(grid[t] > 0.0)) throw InputError("Lipschitz grid values must be positive");
    if (t > 0 && !(grid[t] > grid[t - 1])) {
      throw InputError("Lipschitz grid must be strictly ascending");
    }
  }
}

Dataset subset(const Dataset& data, const std::vector<Index>& rows) {
  Dataset out;
  out.x.resize(static_cast<Index>(rows.size()), data.d());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    out.x.row(static_cast<Index>(t)) = data.x.row(rows[t]);
    out.y(static_cast<Index>(t)) = data.y(rows[t]);
  }
  return out;
}

}  // namespace

void CvResult::write_csv(std::ostream& out) const {
  out << "L,mean_err,se,chosen\n";
  for (std::size_t t = 0; t < grid.size(); ++t) {
    out << format_double(grid[t]) << ',' << format_double(mean_error[t]) << ','
        << format_double(standard_error[t]) << ',' << (t == chosen_index ? 1 : 0) << '\n';
  }
}

void CvResult::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_csv(out);
}

std::size_t one_standard_error_choice(const std::vector<double>& mean_error,
                                      const std::vector<double>& standard_error) {
  if (mean_error.empty() || mean_error.size() != standard_error.size()) {
    throw InputError("one-standard-error rule needs matching, nonempty error vectors");
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(mean_error.begin(), mean_error.end()) - mean_error.begin());
  const double cutoff = mean_error[best] + standard_error[best];
  for (std::size_t t = 0; t < mean_error.size(); ++t) {
    if (mean_error[t] <= cutoff) return t;
  }
  return best;
}

std::vector<int> assign_folds(Index n, int k, std::uint64_t seed) {
  if (k < 2) throw InputError("need at least 2 folds");
  if (k > n) throw InputError("more folds than observations");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> folds(static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < order.size(); ++p) {
    folds[static_cast<std::size_t>(order[p])] = static_cast<int>(p % static_cast<std::size_t>(k));
  }
  return folds;
}

std::vector<double> default_lipschitz_grid(const PwaModel& unconstrained_fit) {
  const double g = unconstrained_fit.xi.rowwise().norm().maxCoeff();
  if (!(g > 0.0) || !std::isfinite(g)) {
    throw DegenerateInputError("the unconstrained fit has zero subgradients; supply a grid");
  }
  std::vector<double> grid;
  const int count = 15;
  for (int t = 0; t < count; ++t) {
    const double e = -1.0 + 2.0 * t / static_cast<double>(count - 1);
    grid.push_back(g * std::pow(10.0, e));
  }
  grid.push_back(std::numeric_limits<double>::infinity());
  return grid;
}

CvResult cross_validate_lipschitz(const Dataset& data, const std::vector<double>& grid, int k,
                                  std::uint64_t seed, const SolverConfig& config) {
  data.validate();
  check_grid(grid);
  CvResult out;
  out.grid = grid;
  out.folds = assign_folds(data.n(), k, seed);

  std::vector<std::vector<Index>> train(static_cast<std::size_t>(k));
  std::vector<std::vector<Index>> test(static_cast<std::size_t>(k));
  for (Index i = 0; i < data.n(); ++i) {
    const auto f = static_cast<std::size_t>(out.folds[static_cast<std::size_t>(i)]);
    for (std::size_t g = 0; g < train.size(); ++g) (g == f ? test : train)[g].push_back(i);
  }
  for (const auto& rows : train) {
    if (static_cast<Index>(rows.size()) <= data.d()) {
      throw InputError("a training fold has " + std::to_string(rows.size()) +
                       " points, not more than d = " + std::to_string(data.d()));
    }
  }

  // fold_error[t][f]: held-out mean squared error of grid value t on fold f
  std::vector<std::vector<double>> fold_error(grid.size(), std::vector<double>(train.size()));
  for (std::size_t f = 0; f < train.size(); ++f) {
    const Dataset fit_data = subset(data, train[f]);
    for (std::size_t t = 0; t < grid.size(); ++t) {
      SolverConfig cfg = config;
      cfg.constraint.lipschitz = as_bound(grid[t]);
      const FitResult result = fit(fit_data, cfg);
      double sq = 0.0;
      for (Index i : test[f]) {
        const double e = eval_max_rule(result.model, data.x.row(i).transpose()) - data.y(i);
        sq += e * e;
      }
      fold_error[t][f] = sq / static_cast<double>(test[f].size());
    }
  }

  const double kk = static_cast<double>(k);
  for (const auto& errs : fold_error) {
    const double mean = std::accumulate(errs.begin(), errs.end(), 0.0) / kk;
    double ss = 0.0;
    for (double e : errs) ss += (e - mean) * (e - mean);
    out.mean_error.push_back(mean);
    out.standard_error.push_back(std::sqrt(ss / (kk - 1.0)) / std::sqrt(kk));
  }
  out.chosen_index = one_standard_error_choice(out.mean_error, out.standard_error);
  out.chosen = grid[out.chosen_index];
  return out;
}

void RiskProfile::write_csv(std::ostream& out) const {
  out << "L,mean_risk,mean_train_err\n";
  for (const auto& row : rows) {
    out << format_double(row.bound) << ',' << format_double(row.mean_risk) << ','
        << format_double(row.mean_training_error) << '\n';
  }
}

RiskProfile risk_profile(const SampleGenerator& generator, const std::vector<double>& grid,
                         int replications, const SolverConfig& config) {
  check_grid(grid);
  if (replications < 1) throw InputError("need at least one replication");
  RiskProfile out;
  for (int r = 0; r < replications; ++r) {
    const SimulatedSample sample = generator(r);
    sample.data.validate();
    if (sample.signal.size() != sample.data.n()) throw InputError("signal length differs from n");
    std::vector<double> risk;
    std::vector<double> train;
    for (double bound : grid) {
      SolverConfig cfg = config;
      cfg.constraint.lipschitz = as_bound(bound);
      const FitResult result = fit(sample.data, cfg);
      double rs = 0.0;
      double ts = 0.0;
      for (Index i = 0; i < sample.data.n(); ++i) {
        const double value = eval_max_rule(result.model, sample.data.x.row(i).transpose());
        rs += (value - sample.signal(i)) * (value - sample.signal(i));
        ts += (value - sample.data.y(i)) * (value - sample.data.y(i));
      }
      const double n = static_cast<double>(sample.data.n());
      risk.push_back(rs / n);
      train.push_back(ts / n);
    }
    out.risk.push_back(std::move(risk));
    out.training_error.push_back(std::move(train));
  }
  for (std::size_t t = 0; t < grid.size(); ++t) {
    RiskProfileRow row;
    row.bound = grid[t];
    for (int r = 0; r < replications; ++r) {
      row.mean_risk += out.risk[static_cast<std::size_t>(r)][t];
      row.mean_training_error += out.training_error[static_cast<std::size_t>(r)][t];
    }
    row.mean_risk /= replications;
    row.mean_training_error /= replications;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace cvxreg

#pragma once

#include <cvxreg/pwa_model.hpp>
#include <cvxreg/types.hpp>

#include <cstddef>
#include <optional>
#include <string>

namespace cvxreg {

enum class Prox { squared, entropy };

std::string to_string(Prox prox);
Prox parse_prox(const std::string& text);

/// Operation counts of one simplex projection.
struct ProjectionStats {
  std::size_t sorts = 0;
  std::size_t comparisons = 0;
  std::size_t scan_steps = 0;
};

/// Euclidean projection onto the probability simplex: one descending sort
/// and a linear scan for the threshold t with sum max(c_i - t, 0) = 1.
Vector project_simplex(const Eigen::Ref<const Vector>& c, ProjectionStats* stats = nullptr);

/// Smooth surrogate of a max of affine pieces a_i^T x + b_i.
struct SmoothModel {
  Matrix slopes;   // m x d, row i is a_i
  Vector offsets;  // m, b_i
  Prox prox = Prox::entropy;
  double tau = 1.0;
  double bias_offset = 0.0;
  /// -1 for a concave source model: the surrogate smooths the convex
  /// negation and reports negated values and gradients.
  double orientation = 1.0;

  Index m() const { return offsets.size(); }
  Index d() const { return slopes.cols(); }
};

struct SmoothValue {
  double value = 0.0;
  Vector gradient;
  Vector weights;
};

/// Uniform error bound epsilon and gradient Lipschitz constant of a
/// SmoothModel.
struct SmoothingCertificate {
  double epsilon = 0.0;
  double lipschitz_grad_constant = 0.0;
  Prox prox = Prox::entropy;
  double tau = 0.0;
  Index m = 0;
};

/// Affine pieces a_i = xi_i, b_i = theta_i - <xi_i, X_i> of a model.
SmoothModel pieces_from_model(const PwaModel& model, Prox prox, double tau);

SmoothValue eval_smooth_sq(const SmoothModel& model, const Eigen::Ref<const Vector>& x);
SmoothValue eval_smooth_entropy(const SmoothModel& model, const Eigen::Ref<const Vector>& x);

/// Dispatches on model.prox.
SmoothValue eval_smooth(const SmoothModel& model, const Eigen::Ref<const Vector>& x);

/// tau * sup rho over the simplex: tau (1 - 1/m) or tau log m.
double smoothing_error_bound(Prox prox, double tau, Index m);

struct SmoothingBudget {
  std::optional<double> epsilon;
  std::optional<double> tau;
};

struct SmoothResult {
  SmoothModel smooth;
  SmoothingCertificate certificate;
};

/// Builds the surrogate for an error budget (tau derived from epsilon) or
/// a fixed tau (epsilon derived from tau), and the certificate constants.
/// Throws InputError for non-positive budgets or when both/neither are
/// given, DegenerateInputError for the entropy prox with m = 1 and an
/// epsilon budget.
SmoothResult make_smooth(const PwaModel& model, Prox prox, const SmoothingBudget& budget);

SmoothingCertificate certify(const SmoothModel& smooth);

/// Shifts the surrogate so its mean over the anchors equals mean(theta).
SmoothModel bias_correct(const SmoothModel& smooth, const PwaModel& model);

}  // namespace cvxreg

#pragma once

#include <cvxreg/dataset.hpp>
#include <cvxreg/kkt.hpp>
#include <cvxreg/types.hpp>

#include <optional>
#include <string>
#include <vector>

namespace cvxreg {

enum class Shape { convex, concave };
enum class Algorithm { admm, alm };

std::string to_string(Shape shape);
std::string to_string(Algorithm algorithm);

/// Which shape class the model was fitted over.
struct Variant {
  Shape shape = Shape::convex;
  /// Euclidean bound on every subgradient (standardized units when the
  /// model was fitted through the CLI). Empty means unbounded.
  std::optional<double> lipschitz;
  /// Per-coordinate monotonicity of the fitted function (user-facing,
  /// i.e. already expressed for the concave shape when applicable).
  std::optional<SignPattern> monotone;
};

struct FitMeta {
  Algorithm algorithm = Algorithm::admm;
  /// Dual updates performed.
  int iterations = 0;
  /// Block sweeps performed (equals iterations for ADMM).
  int sweeps = 0;
  /// Step size at termination (ALM increases it along the schedule).
  double rho = 0.0;
  bool converged = false;
  double objective = 0.0;
  /// max_ij (theta_j + <Delta_ij, xi_j> - theta_i)_+ of the solver output.
  double max_violation = 0.0;
  KktReport kkt;
};

/// Piecewise-affine convex (or concave) fit: values theta_i and
/// subgradients xi_i at the anchor points X_i.
struct PwaModel {
  Vector theta;
  Matrix xi;       // n x d
  Matrix anchors;  // n x d
  Variant variant;
  std::optional<StandardizationInfo> standardization;
  bool log_features = false;
  FitMeta meta;
  /// Dual matrix nu of the internal (standardized, convex-oriented) problem.
  std::optional<Matrix> duals;

  Index n() const { return anchors.rows(); }
  Index d() const { return anchors.cols(); }

  /// Consistent dimensions and finite entries; throws InputError otherwise.
  void validate() const;
};

/// Value of the max-rule extension and the indices of the maximizing pieces.
struct MaxRuleValue {
  double value = 0.0;
  std::vector<Index> argmax;
};

/// max_j { theta_j + <x - X_j, xi_j> }. For concave models the extension
/// is the min-rule (the negated convex construction).
double eval_max_rule(const PwaModel& model, const Eigen::Ref<const Vector>& x);

/// As eval_max_rule, also returning the active pieces (ties within 1e-12
/// relative to the largest piece magnitude).
MaxRuleValue eval_max_rule_active(const PwaModel& model, const Eigen::Ref<const Vector>& x);

/// Canonical interpolant: the LP value inf { sum a_k theta_k : a in simplex,
/// sum a_k X_k = x }. std::nullopt means x lies outside the convex hull of
/// the anchors (the infimum over an empty set). For concave models the
/// value is the negated canonical interpolant of the negated values.
std::optional<double> eval_canonical(const PwaModel& model, const Eigen::Ref<const Vector>& x);

/// max_ij (theta_j + <X_i - X_j, xi_j> - theta_i)_+ with the orientation
/// of the model's shape.
double max_constraint_violation(const PwaModel& model);

/// Maps a model fitted on standardized data back to raw units.
PwaModel destandardize_model(const PwaModel& model, const StandardizationInfo& info);

/// Inverse of destandardize_model: expresses a raw-unit model on the
/// standardized scale recorded in `info`.
PwaModel standardize_model(const PwaModel& model, const StandardizationInfo& info);

}  // namespace cvxreg

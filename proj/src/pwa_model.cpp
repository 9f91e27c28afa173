#include <cvxreg/canonical_lp.hpp>
#include <cvxreg/error.hpp>
#include <cvxreg/pwa_model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cvxreg {

namespace {

double orientation(const PwaModel& model) {
  return model.variant.shape == Shape::concave ? -1.0 : 1.0;
}

void check_point(const PwaModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.d()) {
    throw InputError("query point has dimension " + std::to_string(x.size()) + ", model has " +
                     std::to_string(model.d()));
  }
  if (!x.allFinite()) throw InputError("query point has non-finite entries");
}

}  // namespace

std::string to_string(Shape shape) { return shape == Shape::convex ? "convex" : "concave"; }

std::string to_string(Algorithm algorithm) {
  return algorithm == Algorithm::admm ? "admm" : "alm";
}

void PwaModel::validate() const {
  const Index n = anchors.rows();
  if (n < 1) throw InputError("model has no pieces");
  if (theta.size() != n || xi.rows() != n || xi.cols() != anchors.cols()) {
    throw InputError("model arrays have inconsistent dimensions");
  }
  if (!theta.allFinite() || !xi.allFinite() || !anchors.allFinite()) {
    throw InputError("model contains non-finite values");
  }
  if (variant.monotone && static_cast<Index>(variant.monotone->size()) != anchors.cols()) {
    throw InputError("monotonicity pattern length differs from the model dimension");
  }
}

MaxRuleValue eval_max_rule_active(const PwaModel& model, const Eigen::Ref<const Vector>& x) {
  check_point(model, x);
  const double s = orientation(model);
  const Index n = model.n();
  // piece_j = theta_j + <x - X_j, xi_j>, evaluated in the convex orientation
  Vector pieces(n);
  for (Index j = 0; j < n; ++j) {
    pieces(j) = s * (model.theta(j) + (x.transpose() - model.anchors.row(j)).dot(model.xi.row(j)));
  }
  MaxRuleValue out;
  Index best = 0;
  const double top = pieces.maxCoeff(&best);
  const double tol = 1e-12 * std::max(pieces.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  for (Index j = 0; j < n; ++j) {
    if (top - pieces(j) <= tol) out.argmax.push_back(j);
  }
  out.value = s * top;
  return out;
}

double eval_max_rule(const PwaModel& model, const Eigen::Ref<const Vector>& x) {
  check_point(model, x);
  const double s = orientation(model);
  double top = -std::numeric_limits<double>::infinity();
  for (Index j = 0; j < model.n(); ++j) {
    const double piece =
        s * (model.theta(j) + (x.transpose() - model.anchors.row(j)).dot(model.xi.row(j)));
    top = std::max(top, piece);
  }
  return s * top;
}

std::optional<double> eval_canonical(const PwaModel& model, const Eigen::Ref<const Vector>& x) {
  check_point(model, x);
  const double s = orientation(model);
  const Vector values = s * model.theta;
  auto value = solve_canonical_lp(model.anchors, values, x);
  if (!value) return std::nullopt;
  return s * *value;
}

double max_constraint_violation(const PwaModel& model) {
  const double s = orientation(model);
  const Index n = model.n();
  // <X_i - X_j, xi_j> = (X xi^T)_ij - <X_j, xi_j>
  const Matrix cross = model.anchors * model.xi.transpose();
  double worst = 0.0;
  for (Index j = 0; j < n; ++j) {
    const double self = cross(j, j);
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const double r = s * (model.theta(j) + cross(i, j) - self - model.theta(i));
      worst = std::max(worst, r);
    }
  }
  return worst;
}

PwaModel destandardize_model(const PwaModel& model, const StandardizationInfo& info) {
  if (info.x_scale.size() != model.d()) throw InputError("standardization dimension mismatch");
  PwaModel out = model;
  out.theta = (model.theta.array() * info.y_scale + info.y_center).matrix();
  for (Index k = 0; k < model.d(); ++k) {
    out.xi.col(k) = model.xi.col(k) * (info.y_scale / info.x_scale(k));
    out.anchors.col(k) = model.anchors.col(k) * info.x_scale(k) + Vector::Constant(model.n(), info.x_center(k));
  }
  out.standardization = info;
  return out;
}

PwaModel standardize_model(const PwaModel& model, const StandardizationInfo& info) {
  if (info.x_scale.size() != model.d()) throw InputError("standardization dimension mismatch");
  PwaModel out = model;
  out.theta = ((model.theta.array() - info.y_center) / info.y_scale).matrix();
  for (Index k = 0; k < model.d(); ++k) {
    out.xi.col(k) = model.xi.col(k) * (info.x_scale(k) / info.y_scale);
    out.anchors.col(k) =
        (model.anchors.col(k) - Vector::Constant(model.n(), info.x_center(k))) / info.x_scale(k);
  }
  out.standardization.reset();
  return out;
}

}  // namespace cvxreg

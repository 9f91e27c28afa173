#pragma once

#include <cvxreg/types.hpp>

#include <iosfwd>
#include <string>
#include <utility>

namespace cvxreg {

/// Covariates (n x d) and responses (n).
struct Dataset {
  Matrix x;
  Vector y;

  Index n() const { return x.rows(); }
  Index d() const { return x.cols(); }

  /// Checks n >= 2, d >= 1, matching lengths and finite entries.
  void validate() const;
};

/// Affine maps that take raw covariates/responses to the standardized
/// scale: every column centered and scaled to unit Euclidean norm.
struct StandardizationInfo {
  Vector x_center;
  Vector x_scale;
  double y_center = 0.0;
  double y_scale = 1.0;

  Vector apply_x(const Eigen::Ref<const Vector>& x) const;
  Vector invert_x(const Eigen::Ref<const Vector>& z) const;
  double apply_y(double y) const { return (y - y_center) / y_scale; }
  double invert_y(double z) const { return z * y_scale + y_center; }
};

std::pair<Dataset, StandardizationInfo> standardize(const Dataset& data);

/// Applies an existing standardization (no refitting of centers/scales).
Dataset apply_standardization(const Dataset& data, const StandardizationInfo& info);

/// Natural log of every covariate; throws InputError on non-positive entries.
Dataset log_features(const Dataset& data);

// CSV: header row, columns x1..xd then y, '.' decimal, no missing values.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Reads query points: the covariate columns x1..xd; a trailing y column,
/// if present, is ignored.
Matrix read_points_csv(const std::string& path, Index expected_d);

/// Formats a double with 17 significant digits; exact for round trips.
std::string format_double(double value);

}  // namespace cvxreg

#include <cvxreg/dataset.hpp>
#include <cvxreg/error.hpp>
#include <cvxreg/pwa_model.hpp>

#include <gtest/gtest.h>

#include "instances.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace cvxreg;

TEST(Standardize, TwoPointResponse) {
  Dataset data;
  data.x.resize(2, 1);
  data.x << 0.0, 1.0;
  data.y.resize(2);
  data.y << 1.0, -1.0;
  const auto [scaled, info] = standardize(data);
  EXPECT_NEAR(scaled.y(0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(scaled.y(1), -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(info.y_center, 0.0);
  EXPECT_NEAR(info.y_scale, std::sqrt(2.0), 1e-15);
}

TEST(Standardize, ColumnsCenteredWithUnitNorm) {
  const Dataset data = testing_support::random_instance(40, 3, 11);
  const auto [scaled, info] = standardize(data);
  for (Index k = 0; k < 3; ++k) {
    EXPECT_NEAR(scaled.x.col(k).sum(), 0.0, 1e-12);
    EXPECT_NEAR(scaled.x.col(k).norm(), 1.0, 1e-12);
  }
  EXPECT_NEAR(scaled.y.sum(), 0.0, 1e-12);
  EXPECT_NEAR(scaled.y.norm(), 1.0, 1e-12);
  for (Index i = 0; i < data.n(); ++i) {
    const Vector raw = data.x.row(i).transpose();
    EXPECT_LE((info.invert_x(info.apply_x(raw)) - raw).norm(), 1e-12 * raw.norm());
    EXPECT_NEAR(info.invert_y(info.apply_y(data.y(i))), data.y(i), 1e-12 * std::abs(data.y(i)) + 1e-15);
  }
}

TEST(Standardize, ConstantColumnNamed) {
  Dataset data = testing_support::random_instance(10, 2, 3);
  data.x.col(1).setConstant(4.0);
  try {
    standardize(data);
    FAIL() << "expected DegenerateInputError";
  } catch (const DegenerateInputError& e) {
    EXPECT_NE(std::string(e.what()).find("x2"), std::string::npos);
  }
}

TEST(Standardize, ConstantResponseRejected) {
  Dataset data = testing_support::random_instance(10, 2, 3);
  data.y.setConstant(1.0);
  EXPECT_THROW(standardize(data), DegenerateInputError);
}

TEST(Standardize, ApplyReusesExistingMaps) {
  const Dataset data = testing_support::random_instance(15, 2, 5);
  const auto [scaled, info] = standardize(data);
  const Dataset again = apply_standardization(data, info);
  EXPECT_LE((again.x - scaled.x).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((again.y - scaled.y).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Standardize, DestandardizedModelPredictsLikeScaledPipeline) {
  const Dataset data = testing_support::random_instance(12, 2, 21);
  const auto [scaled, info] = standardize(data);
  PwaModel model;
  model.anchors = scaled.x;
  model.theta = scaled.y;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  model.xi.resize(12, 2);
  for (Index i = 0; i < 12; ++i) {
    for (Index k = 0; k < 2; ++k) model.xi(i, k) = g(rng);
  }
  const PwaModel raw = destandardize_model(model, info);
  const Matrix points = testing_support::sample_box(data.x, 100, 0.2, rng);
  for (Index r = 0; r < points.rows(); ++r) {
    const Vector x = points.row(r).transpose();
    const double direct = eval_max_rule(raw, x);
    const double via = info.invert_y(eval_max_rule(model, info.apply_x(x)));
    EXPECT_NEAR(direct, via, 1e-10 * std::max(1.0, std::abs(via)));
  }
  const PwaModel back = standardize_model(raw, info);
  EXPECT_LE((back.theta - model.theta).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((back.xi - model.xi).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DatasetValidate, RejectsBadShapes) {
  Dataset one;
  one.x = Matrix::Zero(1, 1);
  one.y = Vector::Zero(1);
  EXPECT_THROW(one.validate(), InputError);

  Dataset mismatch;
  mismatch.x = Matrix::Zero(3, 1);
  mismatch.y = Vector::Zero(2);
  EXPECT_THROW(mismatch.validate(), InputError);

  Dataset nan;
  nan.x = Matrix::Zero(3, 1);
  nan.y = Vector::Zero(3);
  nan.y(1) = std::nan("");
  EXPECT_THROW(nan.validate(), InputError);
}

TEST(DatasetCsv, RoundTripIsExact) {
  const Dataset data = testing_support::random_instance(25, 3, 99);
  std::stringstream buffer;
  write_dataset_csv(buffer, data);
  const Dataset back = read_dataset_csv(buffer);
  EXPECT_EQ(back.x, data.x);
  EXPECT_EQ(back.y, data.y);
}

TEST(DatasetCsv, RejectsMissingAndMalformedValues) {
  std::istringstream missing("x1,y\n1,\n2,3\n");
  EXPECT_THROW(read_dataset_csv(missing), InputError);
  std::istringstream garbage("x1,y\n1,abc\n2,3\n");
  EXPECT_THROW(read_dataset_csv(garbage), InputError);
  std::istringstream header("x1,z\n1,2\n2,3\n");
  EXPECT_THROW(read_dataset_csv(header), InputError);
}

TEST(LogFeatures, TakesLogsAndRejectsNonPositive) {
  Dataset data;
  data.x.resize(2, 1);
  data.x << 1.0, std::exp(2.0);
  data.y = Vector::Ones(2);
  EXPECT_NEAR(log_features(data).x(1, 0), 2.0, 1e-15);
  data.x(0, 0) = 0.0;
  EXPECT_THROW(log_features(data), InputError);
}

TEST(SignPattern, ParseAndFormat) {
  const SignPattern signs = parse_sign_pattern("+,-,0");
  ASSERT_EQ(signs.size(), 3u);
  EXPECT_EQ(signs[0], Sign::nonneg);
  EXPECT_EQ(signs[1], Sign::nonpos);
  EXPECT_EQ(signs[2], Sign::free);
  EXPECT_EQ(format_sign_pattern(flip_signs(signs)), "-,+,0");
  EXPECT_THROW(parse_sign_pattern("+,x"), InputError);
}

#pragma once

#include <cvxreg/dataset.hpp>
#include <cvxreg/types.hpp>

#include <cstdint>
#include <string>

namespace cvxreg {

enum class Example {
  /// phi(x) = ||x||_2^2
  quad,
  /// phi(x) = (5 x1 + 0.5 x2 + x3)^2 + sqrt(x4^2 + x5^2); needs d >= 5
  quadplus,
};

Example parse_example(const std::string& name);
double example_function(Example example, const Eigen::Ref<const Vector>& x);

struct SyntheticSample {
  Dataset data;
  /// phi(X_i) before noise.
  Vector signal;
  double noise_sd = 0.0;
};

/// Covariates i.i.d. Uniform[-1, 1]^d, Y = phi(X) + N(0, sigma^2) with
/// sigma^2 = Var(phi(X)) / snr (sample variance). snr = +infinity gives
/// noiseless responses. Deterministic for a given seed.
SyntheticSample generate(Example example, Index n, Index d, double snr, std::uint64_t seed);

}  // namespace cvxreg

#include <cvxreg/error.hpp>
#include <cvxreg/synthetic.hpp>

#include <cmath>
#include <random>

namespace cvxreg {

Example parse_example(const std::string& name) {
  if (name == "quad") return Example::quad;
  if (name == "quadplus") return Example::quadplus;
  throw InputError("unknown example '" + name + "' (expected quad or quadplus)");
}

double example_function(Example example, const Eigen::Ref<const Vector>& x) {
  if (example == Example::quad) return x.squaredNorm();
  if (x.size() < 5) throw InputError("example quadplus needs d >= 5");
  const double lin = 5.0 * x(0) + 0.5 * x(1) + x(2);
  return lin * lin + std::hypot(x(3), x(4));
}

SyntheticSample generate(Example example, Index n, Index d, double snr, std::uint64_t seed) {
  if (n < 2) throw InputError("need n >= 2");
  if (d < 1) throw InputError("need d >= 1");
  if (example == Example::quadplus && d < 5) throw InputError("example quadplus needs d >= 5");
  if (!(snr > 0.0)) throw InputError("snr must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SyntheticSample out;
  out.data.x.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) out.data.x(i, k) = unif(rng);
  }
  out.signal.resize(n);
  for (Index i = 0; i < n; ++i) out.signal(i) = example_function(example, out.data.x.row(i).transpose());

  const double mean = out.signal.mean();
  const double var = (out.signal.array() - mean).square().sum() / static_cast<double>(n - 1);
  out.noise_sd = std::isinf(snr) ? 0.0 : std::sqrt(var / snr);
  out.data.y = out.signal;
  if (out.noise_sd > 0.0) {
    std::normal_distribution<double> noise(0.0, out.noise_sd);
    for (Index i = 0; i < n; ++i) out.data.y(i) += noise(rng);
  }
  return out;
}

}  // namespace cvxreg

#include <cvxreg/error.hpp>
#include <cvxreg/smoothing.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace cvxreg {

std::string to_string(Prox prox) { return prox == Prox::squared ? "sq" : "entropy"; }

Prox parse_prox(const std::string& text) {
  if (text == "sq" || text == "squared") return Prox::squared;
  if (text == "entropy") return Prox::entropy;
  throw InputError("unknown prox '" + text + "' (expected sq or entropy)");
}

Vector project_simplex(const Eigen::Ref<const Vector>& c, ProjectionStats* stats) {
  const Index m = c.size();
  if (m == 0) throw InputError("cannot project an empty vector onto the simplex");
  if (!c.allFinite()) throw InputError("simplex projection input has non-finite entries");
  std::vector<double> sorted(c.data(), c.data() + m);
  std::size_t comparisons = 0;
  if (stats) {
    std::sort(sorted.begin(), sorted.end(), [&comparisons](double a, double b) {
      ++comparisons;
      return a > b;
    });
  } else {
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
  }
  // The indices satisfying u_k > (S_k - 1) / k form a prefix of the sorted order.
  double prefix = 0.0;
  double threshold = sorted[0] - 1.0;
  std::size_t steps = 0;
  for (Index k = 0; k < m; ++k) {
    ++steps;
    prefix += sorted[static_cast<std::size_t>(k)];
    const double t = (prefix - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - t > 0.0) {
      threshold = t;
    } else {
      break;
    }
  }
  if (stats) {
    stats->sorts += 1;
    stats->comparisons += comparisons;
    stats->scan_steps += steps;
  }
  return (c.array() - threshold).cwiseMax(0.0).matrix();
}

SmoothModel pieces_from_model(const PwaModel& model, Prox prox, double tau) {
  model.validate();
  const double s = model.variant.shape == Shape::concave ? -1.0 : 1.0;
  SmoothModel out;
  out.slopes = s * model.xi;
  out.offsets = s * (model.theta - model.xi.cwiseProduct(model.anchors).rowwise().sum());
  out.prox = prox;
  out.tau = tau;
  out.orientation = s;
  return out;
}

namespace {

void check_eval(const SmoothModel& model, const Eigen::Ref<const Vector>& x) {
  if (x.size() != model.d()) throw InputError("query point dimension differs from the model");
  if (!x.allFinite()) throw InputError("query point has non-finite entries");
  if (!(model.tau > 0.0)) throw InputError("smoothing temperature must be positive");
}

SmoothValue finish(const SmoothModel& model, double value, Vector weights) {
  SmoothValue out;
  out.value = model.orientation * value + model.bias_offset;
  out.gradient = model.orientation * (model.slopes.transpose() * weights);
  out.weights = std::move(weights);
  return out;
}

}  // namespace

SmoothValue eval_smooth_sq(const SmoothModel& model, const Eigen::Ref<const Vector>& x) {
  check_eval(model, x);
  const double m = static_cast<double>(model.m());
  const Vector z = model.slopes * x + model.offsets;
  Vector w = project_simplex(((z / model.tau).array() - 1.0 / m).matrix());
  const double value = w.dot(z) - 0.5 * model.tau * (w.array() - 1.0 / m).square().sum();
  return finish(model, value, std::move(w));
}

SmoothValue eval_smooth_entropy(const SmoothModel& model, const Eigen::Ref<const Vector>& x) {
  check_eval(model, x);
  const Vector z = model.slopes * x + model.offsets;
  const double top = z.maxCoeff();
  Vector w = ((z.array() - top) / model.tau).exp().matrix();
  const double total = w.sum();
  w /= total;
  const double value =
      top + model.tau * std::log(total) - model.tau * std::log(static_cast<double>(model.m()));
  return finish(model, value, std::move(w));
}

SmoothValue eval_smooth(const SmoothModel& model, const Eigen::Ref<const Vector>& x) {
  return model.prox == Prox::squared ? eval_smooth_sq(model, x) : eval_smooth_entropy(model, x);
}

double smoothing_error_bound(Prox prox, double tau, Index m) {
  const double mm = static_cast<double>(m);
  return prox == Prox::squared ? tau * (1.0 - 1.0 / mm) : tau * std::log(mm);
}

SmoothingCertificate certify(const SmoothModel& smooth) {
  const Index m = smooth.m();
  const Index d = smooth.d();
  Matrix a(m, d + 1);
  a.col(0) = smooth.offsets;
  a.rightCols(d) = smooth.slopes;
  SmoothingCertificate cert;
  cert.prox = smooth.prox;
  cert.tau = smooth.tau;
  cert.m = m;
  cert.epsilon = smoothing_error_bound(smooth.prox, smooth.tau, m);
  if (smooth.prox == Prox::squared) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a, Eigen::EigenvaluesOnly);
    cert.lipschitz_grad_constant = eig.eigenvalues().maxCoeff() / smooth.tau;
  } else {
    const double top = a.cwiseAbs().maxCoeff();
    cert.lipschitz_grad_constant = top * top / smooth.tau;
  }
  return cert;
}

SmoothResult make_smooth(const PwaModel& model, Prox prox, const SmoothingBudget& budget) {
  if (budget.epsilon.has_value() == budget.tau.has_value()) {
    throw InputError("give exactly one of epsilon and tau");
  }
  const Index m = model.n();
  const double mm = static_cast<double>(m);
  double tau = 0.0;
  if (budget.tau) {
    if (!(*budget.tau > 0.0) || !std::isfinite(*budget.tau)) throw InputError("tau must be positive");
    tau = *budget.tau;
  } else {
    const double eps = *budget.epsilon;
    if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("epsilon must be positive");
    if (m == 1) {
      throw DegenerateInputError("a single piece has zero smoothing error; tau is undefined for an epsilon budget");
    }
    tau = prox == Prox::squared ? eps / (1.0 - 1.0 / mm) : eps / std::log(mm);
  }
  SmoothResult out;
  out.smooth = pieces_from_model(model, prox, tau);
  out.certificate = certify(out.smooth);
  return out;
}

SmoothModel bias_correct(const SmoothModel& smooth, const PwaModel& model) {
  if (model.n() < 1 || model.d() != smooth.d()) throw InputError("model does not match the surrogate");
  SmoothModel base = smooth;
  base.bias_offset = 0.0;
  double total = 0.0;
  for (Index i = 0; i < model.n(); ++i) {
    total += model.theta(i) - eval_smooth(base, model.anchors.row(i).transpose()).value;
  }
  base.bias_offset = total / static_cast<double>(model.n());
  return base;
}

}  // namespace cvxreg

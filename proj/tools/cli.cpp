#include "cli.hpp"

#include <cvxreg/dataset.hpp>
#include <cvxreg/error.hpp>
#include <cvxreg/kkt.hpp>
#include <cvxreg/model_io.hpp>
#include <cvxreg/model_selection.hpp>
#include <cvxreg/pwa_model.hpp>
#include <cvxreg/smoothing.hpp>
#include <cvxreg/solver.hpp>
#include <cvxreg/synthetic.hpp>
#include <cvxreg/variants.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cvxreg::cli {

namespace {

struct Options {
  std::string input;
  std::string output;
  std::string model;
  std::string trace;
  std::string variant = "convex";
  std::optional<double> lipschitz;
  std::string monotone;
  std::optional<double> rho;
  int max_iters = SolverConfig{}.max_iters;
  double tol_primal = SolverConfig{}.tol_primal;
  double tol_grad = SolverConfig{}.tol_grad;
  std::string algorithm = "admm";
  std::string prox = "entropy";
  std::optional<double> epsilon;
  std::optional<double> tau;
  int folds = 10;
  std::string grid;
  std::uint64_t seed = 1;
  int threads = 0;
  bool json_errors = false;
  bool log_features = false;
  bool save_duals = false;
  bool no_bias_correct = false;
  std::string rule = "max";
  std::string example = "quad";
  Index n = 100;
  Index d = 2;
  std::string snr = "3";
};

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw InputError("cannot parse " + what + " '" + text + "'");
  return value;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) grid.push_back(parse_real(token, "grid value"));
  return grid;
}

Shape parse_shape(const std::string& text) {
  if (text == "convex") return Shape::convex;
  if (text == "concave") return Shape::concave;
  throw InputError("unknown variant '" + text + "' (expected convex or concave)");
}

Index env_n_max() {
  const char* raw = std::getenv("CVXREG_NMAX");
  if (!raw || !*raw) return SolverConfig{}.n_max;
  const double v = parse_real(raw, "CVXREG_NMAX");
  if (!(v >= 2.0) || v != std::floor(v)) throw InputError("CVXREG_NMAX must be an integer >= 2");
  return static_cast<Index>(v);
}

SolverConfig make_config(const Options& o) {
  SolverConfig cfg;
  cfg.rho = o.rho;
  cfg.max_iters = o.max_iters;
  cfg.tol_primal = o.tol_primal;
  cfg.tol_grad = o.tol_grad;
  if (o.algorithm == "alm") {
    cfg.algorithm = Algorithm::alm;
  } else if (o.algorithm != "admm") {
    throw InputError("unknown algorithm '" + o.algorithm + "' (expected admm or alm)");
  }
  if (o.lipschitz) {
    if (!(*o.lipschitz > 0.0)) throw InputError("--lipschitz must be positive");
    if (std::isfinite(*o.lipschitz)) cfg.constraint.lipschitz = o.lipschitz;
  }
  if (!o.monotone.empty()) cfg.constraint.signs = parse_sign_pattern(o.monotone);
  cfg.threads = o.threads;
  cfg.n_max = env_n_max();
  cfg.validate();
  return cfg;
}

Dataset load_design(const Options& o) {
  Dataset data = read_dataset_csv(o.input);
  return o.log_features ? log_features(data) : data;
}

Matrix load_points(const std::string& path, const PwaModel& model) {
  const Matrix x = read_points_csv(path, model.d());
  if (!model.log_features) return x;
  if ((x.array() <= 0.0).any()) throw InputError("log features need positive covariates");
  return x.array().log().matrix();
}

void print_kkt(std::ostream& out, const KktReport& k) {
  out << "primal_feasibility " << format_double(k.primal_feasibility) << '\n'
      << "subgrad_stationarity " << format_double(k.subgrad_stationarity) << '\n'
      << "theta_gradient " << format_double(k.theta_gradient) << '\n'
      << "complementarity " << format_double(k.complementarity) << '\n';
}

void report_error(std::ostream& err, bool as_json, int code, const std::string& kind,
                  const std::string& message) {
  if (as_json) {
    const nlohmann::json doc = {{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
    err << doc.dump() << '\n';
  } else {
    err << "error: " << message << '\n';
  }
}

int cmd_gen(const Options& o, std::ostream& out) {
  const double snr = parse_real(o.snr, "snr");
  const SyntheticSample sample = generate(parse_example(o.example), o.n, o.d, snr, o.seed);
  if (o.output.empty() || o.output == "-") {
    write_dataset_csv(out, sample.data);
  } else {
    write_dataset_csv(o.output, sample.data);
  }
  return kOk;
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const SolverConfig cfg = make_config(o);
  const Shape shape = parse_shape(o.variant);
  const Dataset design = load_design(o);
  const auto [scaled, info] = standardize(design);
  FitResult result = fit_shape(scaled, cfg, shape);

  PwaModel model = destandardize_model(result.model, info);
  model.anchors = design.x;
  model.log_features = o.log_features;
  if (o.save_duals) model.duals = std::move(result.state.nu);
  write_model_json(o.output, ModelFile{model, std::nullopt, std::nullopt}, o.save_duals);
  result.trace.write_csv(o.trace.empty() ? o.output + ".trace.csv" : o.trace);

  const FitMeta& m = model.meta;
  out << "algorithm " << to_string(m.algorithm) << '\n'
      << "iterations " << m.iterations << '\n'
      << "sweeps " << m.sweeps << '\n'
      << "converged " << (m.converged ? "true" : "false") << '\n'
      << "objective " << format_double(m.objective) << '\n';
  print_kkt(out, m.kkt);
  if (!m.converged) {
    report_error(err, o.json_errors, kNotConverged, "not_converged",
                 "no convergence within " + std::to_string(cfg.max_iters) +
                     " iterations; the model was written and flagged");
    return kNotConverged;
  }
  return kOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const ModelFile file = read_model_json(o.model);
  const Matrix x = load_points(o.input, file.model);
  if (o.rule != "max" && o.rule != "canonical" && o.rule != "smooth") {
    throw InputError("unknown rule '" + o.rule + "' (expected max, canonical or smooth)");
  }
  if (o.rule == "smooth" && !file.smooth) {
    throw InputError("model file carries no smooth surrogate; run `cvxreg smooth` first");
  }

  std::ofstream file_out;
  if (!o.output.empty() && o.output != "-") {
    file_out.open(o.output);
    if (!file_out) throw InputError("cannot write '" + o.output + "'");
  }
  std::ostream& sink = file_out.is_open() ? file_out : out;
  sink << "prediction\n";
  for (Index i = 0; i < x.rows(); ++i) {
    const Vector q = x.row(i).transpose();
    if (o.rule == "max") {
      sink << format_double(eval_max_rule(file.model, q)) << '\n';
    } else if (o.rule == "smooth") {
      sink << format_double(eval_smooth(*file.smooth, q).value) << '\n';
    } else if (const auto v = eval_canonical(file.model, q)) {
      sink << format_double(*v) << '\n';
    } else {
      sink << "outside_hull\n";
    }
  }
  return kOk;
}

int cmd_smooth(const Options& o, std::ostream& out) {
  ModelFile file = read_model_json(o.model);
  SmoothResult made = make_smooth(file.model, parse_prox(o.prox), {o.epsilon, o.tau});
  if (!o.no_bias_correct) made.smooth = bias_correct(made.smooth, file.model);
  file.smooth = made.smooth;
  file.certificate = made.certificate;
  write_model_json(o.output.empty() ? o.model : o.output, file, file.model.duals.has_value());

  const SmoothingCertificate& c = made.certificate;
  out << "prox " << to_string(c.prox) << '\n'
      << "m " << c.m << '\n'
      << "tau " << format_double(c.tau) << '\n'
      << "epsilon " << format_double(c.epsilon) << '\n'
      << "lipschitz_grad_constant " << format_double(c.lipschitz_grad_constant) << '\n'
      << "bias_offset " << format_double(made.smooth.bias_offset) << '\n';
  return kOk;
}

int cmd_cv(const Options& o, std::ostream& out) {
  SolverConfig cfg = make_config(o);
  if (cfg.constraint.lipschitz) throw InputError("cv tunes the Lipschitz bound; drop --lipschitz");
  const Dataset design = load_design(o);
  auto [scaled, info] = standardize(design);
  if (parse_shape(o.variant) == Shape::concave) {
    scaled.y = -scaled.y;
    if (cfg.constraint.signs) cfg.constraint.signs = flip_signs(*cfg.constraint.signs);
  }
  const std::vector<double> grid =
      o.grid.empty() ? default_lipschitz_grid(fit(scaled, cfg).model) : parse_grid(o.grid);
  const CvResult cv = cross_validate_lipschitz(scaled, grid, o.folds, o.seed, cfg);
  if (o.output.empty() || o.output == "-") {
    cv.write_csv(out);
  } else {
    cv.write_csv(o.output);
  }
  out << "chosen " << format_double(cv.chosen) << '\n';
  return kOk;
}

int cmd_diagnose(const Options& o, std::ostream& out) {
  const ModelFile file = read_model_json(o.model);
  if (!file.model.duals) {
    throw InputError("model file carries no dual variables; refit with --save-duals");
  }
  Dataset data = read_dataset_csv(o.input);
  if (file.model.log_features) data = log_features(data);
  PwaModel model = file.model;
  if (model.standardization) {
    data = apply_standardization(data, *model.standardization);
    model = standardize_model(model, *model.standardization);
  }
  if (data.n() != model.n() || data.d() != model.d()) {
    throw InputError("data dimensions differ from the model");
  }
  const double scale = std::max(1.0, data.x.cwiseAbs().maxCoeff());
  if ((data.x - model.anchors).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw InputError("data covariates do not match the model anchors");
  }
  if (model.variant.shape == Shape::concave) {
    data.y = -data.y;
    model.theta = -model.theta;
    model.xi = -model.xi;
  }

  SolverState state = SolverState::initial(data);
  state.theta = model.theta;
  state.xi = model.xi;
  state.refresh_inner(data);
  state.nu = *model.duals;
  for (Index j = 0; j < data.n(); ++j) {
    state.eta.col(j) =
        (state.inner.col(j).array() + state.theta(j) - state.theta.array()).cwiseMin(0.0).matrix();
    state.eta(j, j) = 0.0;
  }
  const KktReport report = compute_kkt_report(state, data, model.meta.rho);
  out << "objective " << format_double(0.5 * (data.y - state.theta).squaredNorm()) << '\n';
  print_kkt(out, report);
  return kOk;
}

bool wants_json_errors(int argc, const char* const* argv) {
  for (int k = 1; k < argc; ++k) {
    if (std::string(argv[k]) == "--json-errors") return true;
  }
  return false;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Shape-constrained (convex) least-squares regression"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  auto common = [&o](CLI::App* sub) {
    sub->add_flag("--json-errors", o.json_errors, "Report errors as JSON on standard error");
    sub->add_option("--threads", o.threads, "Worker thread cap (0 = runtime default)")
        ->check(CLI::NonNegativeNumber);
  };
  auto solver_flags = [&o](CLI::App* sub) {
    sub->add_option("--variant", o.variant, "convex or concave");
    sub->add_option("--lipschitz", o.lipschitz, "Bound on every subgradient norm (standardized scale)");
    sub->add_option("--monotone", o.monotone, "Per-coordinate signs, e.g. \"+,-,0\"");
    sub->add_option("--rho", o.rho, "Step size (default 1/n)");
    sub->add_option("--max-iters", o.max_iters, "Iteration cap");
    sub->add_option("--tol-primal", o.tol_primal, "Primal feasibility tolerance");
    sub->add_option("--tol-grad", o.tol_grad, "Theta-gradient tolerance");
    sub->add_option("--algorithm", o.algorithm, "admm or alm");
    sub->add_flag("--log-features", o.log_features, "Take natural logs of the covariates first");
  };

  CLI::App* gen = app.add_subcommand("gen", "Write a synthetic dataset");
  gen->add_option("--example", o.example, "quad or quadplus");
  gen->add_option("--n", o.n, "Number of points")->check(CLI::PositiveNumber);
  gen->add_option("--d", o.d, "Dimension")->check(CLI::PositiveNumber);
  gen->add_option("--snr", o.snr, "Signal-to-noise ratio (inf for noiseless)");
  gen->add_option("--seed", o.seed, "Random seed");
  gen->add_option("--output", o.output, "Output CSV (default standard output)");
  common(gen);

  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a shape-constrained regression");
  fit_cmd->add_option("--input", o.input, "Training CSV")->required();
  fit_cmd->add_option("--output", o.output, "Model JSON")->required();
  fit_cmd->add_option("--trace", o.trace, "Convergence trace CSV (default <output>.trace.csv)");
  fit_cmd->add_flag("--save-duals", o.save_duals, "Store the dual matrix in the model file");
  solver_flags(fit_cmd);
  common(fit_cmd);

  CLI::App* predict = app.add_subcommand("predict", "Evaluate a fitted model");
  predict->add_option("--model", o.model, "Model JSON")->required();
  predict->add_option("--input", o.input, "Query CSV")->required();
  predict->add_option("--output", o.output, "Prediction CSV (default standard output)");
  predict->add_option("--rule", o.rule, "max, canonical or smooth");
  common(predict);

  CLI::App* smooth = app.add_subcommand("smooth", "Attach a smooth surrogate to a model");
  smooth->add_option("--model", o.model, "Model JSON")->required();
  smooth->add_option("--output", o.output, "Output JSON (default: rewrite --model)");
  smooth->add_option("--prox", o.prox, "sq or entropy");
  auto* eps = smooth->add_option("--epsilon", o.epsilon, "Uniform approximation budget");
  auto* tau = smooth->add_option("--tau", o.tau, "Smoothing temperature");
  eps->excludes(tau);
  smooth->add_flag("--no-bias-correct", o.no_bias_correct, "Skip the mean bias correction");
  common(smooth);

  CLI::App* cv = app.add_subcommand("cv", "Cross-validate the Lipschitz bound");
  cv->add_option("--input", o.input, "Training CSV")->required();
  cv->add_option("--output", o.output, "CV table CSV (default standard output)");
  cv->add_option("--folds", o.folds, "Number of folds");
  cv->add_option("--grid", o.grid, "Comma-separated ascending bounds; inf allowed");
  cv->add_option("--seed", o.seed, "Fold assignment seed");
  solver_flags(cv);
  common(cv);

  CLI::App* diagnose = app.add_subcommand("diagnose", "Recompute optimality residuals");
  diagnose->add_option("--model", o.model, "Model JSON saved with --save-duals")->required();
  diagnose->add_option("--input", o.input, "The training CSV")->required();
  common(diagnose);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, wants_json_errors(argc, argv), kInputError, "usage", e.what());
    return kInputError;
  }

  try {
    if (o.threads < 0) throw InputError("--threads must be nonnegative");
    if (gen->parsed()) return cmd_gen(o, out);
    if (fit_cmd->parsed()) return cmd_fit(o, out, err);
    if (predict->parsed()) return cmd_predict(o, out);
    if (smooth->parsed()) return cmd_smooth(o, out);
    if (cv->parsed()) return cmd_cv(o, out);
    if (diagnose->parsed()) return cmd_diagnose(o, out);
    return kInputError;
  } catch (const NumericalError& e) {
    report_error(err, o.json_errors, kNumericalError, "numerical", e.what());
    return kNumericalError;
  } catch (const FitError& e) {
    report_error(err, o.json_errors, kInputError, "fit", e.what());
    return kInputError;
  } catch (const InputError& e) {
    report_error(err, o.json_errors, kInputError, "input", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    report_error(err, o.json_errors, kNumericalError, "internal", e.what());
    return kNumericalError;
  }
}

}  // namespace cvxreg::cli

#include <cvxreg/error.hpp>
#include <cvxreg/model_io.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace cvxreg {

namespace {

using nlohmann::json;

class JsonWriter {
 public:
  explicit JsonWriter(std::ostream& out) : out_(out) {}

  void number(double v) {
    if (!std::isfinite(v)) throw InputError("cannot serialize a non-finite value to JSON");
    out_ << format_double(v);
  }

  void array(const double* data, Index count) {
    out_ << '[';
    for (Index k = 0; k < count; ++k) {
      if (k) out_ << ',';
      number(data[k]);
    }
    out_ << ']';
  }

  void vector(const Vector& v) { array(v.data(), v.size()); }

  void row_major(const Matrix& m) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = m;
    array(r.data(), r.size());
  }

  void string(const std::string& s) { out_ << json(s).dump(); }

  // Emits `"name": ` preceded by a separator when needed.
  void key(const char* name) {
    if (!first_) out_ << ",\n";
    first_ = false;
    out_ << std::string(static_cast<std::size_t>(depth_) * 2, ' ') << '"' << name << "\": ";
  }

  void open() {
    out_ << "{\n";
    ++depth_;
    first_ = true;
  }

  void close() {
    --depth_;
    out_ << '\n' << std::string(static_cast<std::size_t>(depth_) * 2, ' ') << '}';
    first_ = false;
  }

  std::ostream& raw() { return out_; }

 private:
  std::ostream& out_;
  int depth_ = 0;
  bool first_ = true;
};

Vector read_vector(const json& j, const char* name, Index expected) {
  if (!j.is_array()) throw InputError(std::string("model field '") + name + "' must be an array");
  if (expected >= 0 && static_cast<Index>(j.size()) != expected) {
    throw InputError(std::string("model field '") + name + "' has " + std::to_string(j.size()) +
                     " entries, expected " + std::to_string(expected));
  }
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw InputError(std::string("model field '") + name + "' holds a non-number");
    v(static_cast<Index>(k)) = j[k].get<double>();
  }
  return v;
}

Matrix read_row_major(const json& j, const char* name, Index rows, Index cols) {
  const Vector flat = read_vector(j, name, rows * cols);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = flat(r * cols + c);
  }
  return m;
}

const json& field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw InputError(std::string("model JSON lacks field '") + name + "'");
  }
  return obj.at(name);
}

double number_field(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number()) throw InputError(std::string("model field '") + name + "' must be a number");
  return v.get<double>();
}

}  // namespace

void write_model_json(std::ostream& out, const ModelFile& file, bool include_duals) {
  const PwaModel& m = file.model;
  m.validate();
  JsonWriter w(out);
  w.open();
  w.key("schema_version");
  w.string(kModelSchema);
  w.key("n");
  out << m.n();
  w.key("d");
  out << m.d();
  w.key("theta");
  w.vector(m.theta);
  w.key("xi");
  w.row_major(m.xi);
  w.key("anchors");
  w.row_major(m.anchors);

  w.key("variant");
  w.open();
  w.key("shape");
  w.string(to_string(m.variant.shape));
  w.key("lipschitz");
  if (m.variant.lipschitz && std::isfinite(*m.variant.lipschitz)) {
    w.number(*m.variant.lipschitz);
  } else {
    out << "null";
  }
  w.key("monotone");
  if (m.variant.monotone) {
    w.string(format_sign_pattern(*m.variant.monotone));
  } else {
    out << "null";
  }
  w.close();

  w.key("standardization");
  if (m.standardization) {
    const auto& s = *m.standardization;
    w.open();
    w.key("x_center");
    w.vector(s.x_center);
    w.key("x_scale");
    w.vector(s.x_scale);
    w.key("y_center");
    w.number(s.y_center);
    w.key("y_scale");
    w.number(s.y_scale);
    w.close();
  } else {
    out << "null";
  }
  w.key("log_features");
  out << (m.log_features ? "true" : "false");

  w.key("fit_meta");
  w.open();
  w.key("algorithm");
  w.string(to_string(m.meta.algorithm));
  w.key("iterations");
  out << m.meta.iterations;
  w.key("sweeps");
  out << m.meta.sweeps;
  w.key("rho");
  w.number(m.meta.rho);
  w.key("converged");
  out << (m.meta.converged ? "true" : "false");
  w.key("objective");
  w.number(m.meta.objective);
  w.key("max_violation");
  w.number(m.meta.max_violation);
  w.key("kkt");
  w.open();
  w.key("primal_feasibility");
  w.number(m.meta.kkt.primal_feasibility);
  w.key("subgrad_stationarity");
  w.number(m.meta.kkt.subgrad_stationarity);
  w.key("theta_gradient");
  w.number(m.meta.kkt.theta_gradient);
  w.key("complementarity");
  w.number(m.meta.kkt.complementarity);
  w.close();
  w.close();

  if (include_duals && m.duals) {
    w.key("duals");
    w.open();
    w.key("nu");
    w.row_major(*m.duals);
    w.close();
  }

  if (file.smooth) {
    const SmoothModel& s = *file.smooth;
    const SmoothingCertificate cert = file.certificate ? *file.certificate : certify(s);
    w.key("smooth");
    w.open();
    w.key("prox");
    w.string(to_string(s.prox));
    w.key("tau");
    w.number(s.tau);
    w.key("bias_offset");
    w.number(s.bias_offset);
    w.key("orientation");
    w.number(s.orientation);
    w.key("certificate");
    w.open();
    w.key("epsilon");
    w.number(cert.epsilon);
    w.key("lipschitz_grad_constant");
    w.number(cert.lipschitz_grad_constant);
    w.key("m");
    out << cert.m;
    w.close();
    w.close();
  }
  w.close();
  out << '\n';
}

void write_model_json(const std::string& path, const ModelFile& file, bool include_duals) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_model_json(out, file, include_duals);
  if (!out) throw InputError("failed writing '" + path + "'");
}

ModelFile read_model_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
  const json& schema = field(doc, "schema_version");
  if (!schema.is_string() || schema.get<std::string>() != kModelSchema) {
    throw InputError(std::string("unsupported model schema (expected ") + kModelSchema + ")");
  }
  try {
    ModelFile file;
    PwaModel& m = file.model;
    const auto n = field(doc, "n").get<Index>();
    const auto d = field(doc, "d").get<Index>();
    if (n < 1 || d < 1) throw InputError("model dimensions must be positive");
    m.theta = read_vector(field(doc, "theta"), "theta", n);
    m.xi = read_row_major(field(doc, "xi"), "xi", n, d);
    m.anchors = read_row_major(field(doc, "anchors"), "anchors", n, d);

    const json& variant = field(doc, "variant");
    const std::string shape = field(variant, "shape").get<std::string>();
    if (shape == "convex") {
      m.variant.shape = Shape::convex;
    } else if (shape == "concave") {
      m.variant.shape = Shape::concave;
    } else {
      throw InputError("unknown model shape '" + shape + "'");
    }
    if (variant.contains("lipschitz") && !variant.at("lipschitz").is_null()) {
      m.variant.lipschitz = variant.at("lipschitz").get<double>();
    }
    if (variant.contains("monotone") && !variant.at("monotone").is_null()) {
      m.variant.monotone = parse_sign_pattern(variant.at("monotone").get<std::string>());
    }

    if (doc.contains("standardization") && !doc.at("standardization").is_null()) {
      const json& s = doc.at("standardization");
      StandardizationInfo info;
      info.x_center = read_vector(field(s, "x_center"), "x_center", d);
      info.x_scale = read_vector(field(s, "x_scale"), "x_scale", d);
      info.y_center = number_field(s, "y_center");
      info.y_scale = number_field(s, "y_scale");
      if ((info.x_scale.array() <= 0.0).any() || !(info.y_scale > 0.0)) {
        throw InputError("standardization scales must be positive");
      }
      m.standardization = info;
    }
    if (doc.contains("log_features")) m.log_features = doc.at("log_features").get<bool>();

    const json& meta = field(doc, "fit_meta");
    const std::string alg = field(meta, "algorithm").get<std::string>();
    m.meta.algorithm = alg == "alm" ? Algorithm::alm : Algorithm::admm;
    m.meta.iterations = field(meta, "iterations").get<int>();
    m.meta.sweeps = meta.value("sweeps", m.meta.iterations);
    m.meta.rho = number_field(meta, "rho");
    m.meta.converged = meta.value("converged", false);
    m.meta.objective = meta.value("objective", 0.0);
    m.meta.max_violation = meta.value("max_violation", 0.0);
    const json& kkt = field(meta, "kkt");
    m.meta.kkt.primal_feasibility = number_field(kkt, "primal_feasibility");
    m.meta.kkt.subgrad_stationarity = number_field(kkt, "subgrad_stationarity");
    m.meta.kkt.theta_gradient = number_field(kkt, "theta_gradient");
    m.meta.kkt.complementarity = number_field(kkt, "complementarity");

    if (doc.contains("duals") && !doc.at("duals").is_null()) {
      m.duals = read_row_major(field(doc.at("duals"), "nu"), "nu", n, n);
    }
    m.validate();

    if (doc.contains("smooth") && !doc.at("smooth").is_null()) {
      const json& s = doc.at("smooth");
      const double tau = number_field(s, "tau");
      if (!(tau > 0.0)) throw InputError("smooth.tau must be positive");
      SmoothModel smooth = pieces_from_model(m, parse_prox(field(s, "prox").get<std::string>()), tau);
      smooth.bias_offset = number_field(s, "bias_offset");
      file.certificate = certify(smooth);
      file.smooth = std::move(smooth);
    }
    return file;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
}

ModelFile read_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_model_json(in);
}

}  // namespace cvxreg

#include <cvxreg/dataset.hpp>
#include <cvxreg/error.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cvxreg {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    fields.push_back(field.substr(start));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& token, std::size_t row, std::size_t col) {
  if (token.empty()) {
    throw InputError("missing value at data row " + std::to_string(row) + ", column " +
                     std::to_string(col + 1));
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size() || !std::isfinite(value)) {
    throw InputError("cannot parse '" + token + "' at data row " + std::to_string(row) +
                     ", column " + std::to_string(col + 1));
  }
  return value;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_table(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV input");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
  table.header = split_csv_line(line);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row;
    auto fields = split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw InputError("data row " + std::to_string(row) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(table.header.size()));
    }
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) values[c] = parse_number(fields[c], row, c);
    table.rows.push_back(std::move(values));
  }
  return table;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void Dataset::validate() const {
  if (x.rows() != y.size()) {
    throw InputError("covariate rows (" + std::to_string(x.rows()) + ") and responses (" +
                     std::to_string(y.size()) + ") differ");
  }
  if (n() < 2) throw InputError("need at least 2 observations");
  if (d() < 1) throw InputError("need at least 1 covariate");
  if (!x.allFinite() || !y.allFinite()) throw InputError("data contain non-finite values");
}

Vector StandardizationInfo::apply_x(const Eigen::Ref<const Vector>& x) const {
  return (x - x_center).cwiseQuotient(x_scale);
}

Vector StandardizationInfo::invert_x(const Eigen::Ref<const Vector>& z) const {
  return z.cwiseProduct(x_scale) + x_center;
}

std::pair<Dataset, StandardizationInfo> standardize(const Dataset& data) {
  data.validate();
  StandardizationInfo info;
  const Index d = data.d();
  info.x_center = data.x.colwise().mean().transpose();
  info.x_scale.resize(d);
  Dataset out;
  out.x = data.x.rowwise() - info.x_center.transpose();
  for (Index k = 0; k < d; ++k) {
    const double scale = out.x.col(k).norm();
    if (!(scale > 0.0)) {
      throw DegenerateInputError("covariate column x" + std::to_string(k + 1) +
                                 " is constant; cannot standardize");
    }
    info.x_scale(k) = scale;
    out.x.col(k) /= scale;
  }
  info.y_center = data.y.mean();
  out.y = data.y.array() - info.y_center;
  info.y_scale = out.y.norm();
  if (!(info.y_scale > 0.0)) throw DegenerateInputError("response column y is constant");
  out.y /= info.y_scale;
  return {std::move(out), std::move(info)};
}

Dataset apply_standardization(const Dataset& data, const StandardizationInfo& info) {
  if (info.x_center.size() != data.d()) throw InputError("standardization dimension mismatch");
  Dataset out;
  out.x = (data.x.rowwise() - info.x_center.transpose()).array().rowwise() /
          info.x_scale.transpose().array();
  out.y = (data.y.array() - info.y_center) / info.y_scale;
  return out;
}

Dataset log_features(const Dataset& data) {
  if ((data.x.array() <= 0.0).any()) {
    throw InputError("--log-features requires strictly positive covariates");
  }
  return Dataset{data.x.array().log().matrix(), data.y};
}

Dataset read_dataset_csv(std::istream& in) {
  const CsvTable table = read_table(in);
  if (table.header.size() < 2) throw InputError("CSV needs at least one x column and a y column");
  const Index cols = static_cast<Index>(table.header.size());
  const Index d = cols - 1;
  for (Index k = 0; k < d; ++k) {
    const std::string expected = "x" + std::to_string(k + 1);
    if (table.header[static_cast<std::size_t>(k)] != expected) {
      throw InputError("CSV header column " + std::to_string(k + 1) + " is '" +
                       table.header[static_cast<std::size_t>(k)] + "', expected '" + expected +
                       "'");
    }
  }
  if (table.header.back() != "y") throw InputError("last CSV header column must be 'y'");
  Dataset data;
  const Index n = static_cast<Index>(table.rows.size());
  data.x.resize(n, d);
  data.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (Index k = 0; k < d; ++k) data.x(i, k) = row[static_cast<std::size_t>(k)];
    data.y(i) = row.back();
  }
  data.validate();
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_dataset_csv(in);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (Index k = 0; k < data.d(); ++k) out << 'x' << (k + 1) << ',';
  out << "y\n";
  for (Index i = 0; i < data.n(); ++i) {
    for (Index k = 0; k < data.d(); ++k) out << format_double(data.x(i, k)) << ',';
    out << format_double(data.y(i)) << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_dataset_csv(out, data);
}

Matrix read_points_csv(const std::string& path, Index expected_d) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  const CsvTable table = read_table(in);
  const Index cols = static_cast<Index>(table.header.size());
  if (cols != expected_d && !(cols == expected_d + 1 && table.header.back() == "y")) {
    throw InputError("query CSV has " + std::to_string(cols) + " columns, model expects " +
                     std::to_string(expected_d) + " covariates");
  }
  Matrix points(static_cast<Index>(table.rows.size()), expected_d);
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index k = 0; k < expected_d; ++k) {
      points(i, k) = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
  }
  return points;
}

SignPattern parse_sign_pattern(const std::string& text) {
  SignPattern signs;
  std::istringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token == "+") {
      signs.push_back(Sign::nonneg);
    } else if (token == "-") {
      signs.push_back(Sign::nonpos);
    } else if (token == "0") {
      signs.push_back(Sign::free);
    } else {
      throw InputError("bad monotonicity token '" + token + "' (expected +, - or 0)");
    }
  }
  if (signs.empty()) throw InputError("empty monotonicity pattern");
  return signs;
}

std::string format_sign_pattern(const SignPattern& signs) {
  std::string out;
  for (std::size_t k = 0; k < signs.size(); ++k) {
    if (k) out += ',';
    out += signs[k] == Sign::nonneg ? "+" : signs[k] == Sign::nonpos ? "-" : "0";
  }
  return out;
}

SignPattern flip_signs(const SignPattern& signs) {
  SignPattern out(signs);
  for (auto& s : out) {
    if (s == Sign::nonneg) {
      s = Sign::nonpos;
    } else if (s == Sign::nonpos) {
      s = Sign::nonneg;
    }
  }
  return out;
}

}  // namespace cvxreg

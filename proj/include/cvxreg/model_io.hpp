#pragma once

#include <cvxreg/pwa_model.hpp>
#include <cvxreg/smoothing.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace cvxreg {

inline constexpr const char* kModelSchema = "cvxreg-model-v1";

/// A model file: the piecewise-affine fit and an optional smooth surrogate.
struct ModelFile {
  PwaModel model;
  std::optional<SmoothModel> smooth;
  std::optional<SmoothingCertificate> certificate;
};

/// Writes the cvxreg-model-v1 JSON document. Doubles are written with 17
/// significant digits; matrices are row-major flat arrays. The dual matrix
/// is written only when `include_duals` is set and the model carries one.
void write_model_json(std::ostream& out, const ModelFile& file, bool include_duals = true);
void write_model_json(const std::string& path, const ModelFile& file, bool include_duals = true);

/// Throws InputError on malformed documents or a wrong schema version.
ModelFile read_model_json(std::istream& in);
ModelFile read_model_json(const std::string& path);

}  // namespace cvxreg

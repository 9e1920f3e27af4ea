#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gradkit/model.hpp"
#include "gradkit/tensor.hpp"

namespace gradkit {

/// Binary named-tensor container: magic "GKCKPT01", entry count, then per
/// entry a name, a rank, the dims, and raw little-endian 64-bit floats.
/// Scalars are rank-0 entries. Names must be unique within a file.
void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& entries);
std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path);

/// Model checkpoint on top of the container: layer sizes, activation, and
/// the parameter tensors under their canonical names (w0, b0, ...).
void save_model(const std::string& path, const ModelSpec& spec, const ModelParams& params);
std::pair<ModelSpec, ModelParams> load_model(const std::string& path);

}  // namespace gradkit

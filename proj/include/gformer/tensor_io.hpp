#pragma once

#include <filesystem>

#include "json.hpp"

#include "gformer/tensor.hpp"

namespace gformer {

// {"shape":[...],"data":[...]}
nlohmann::json to_json(const Tensor& t);
// Throws ConfigError on malformed documents, DimensionError on a size mismatch.
Tensor tensor_from_json(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace gformer

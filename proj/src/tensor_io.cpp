#include "gformer/tensor_io.hpp"

#include <fstream>

namespace gformer {

using nlohmann::json;

json to_json(const Tensor& t) { return json{{"shape", t.shape()}, {"data", t.to_vector()}}; }

Tensor tensor_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("tensor: expected a JSON object");
    for (const auto& [key, _] : doc.items())
        if (key != "shape" && key != "data") throw ConfigError("tensor: unknown key '" + key + "'");
    try {
        return Tensor(doc.at("shape").get<Shape>(), doc.at("data").get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("tensor: ") + e.what());
    }
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace gformer

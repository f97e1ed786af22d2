#include "gformer/params.hpp"

#include <algorithm>

namespace gformer {

void BlockParams::add(std::string name, Tensor value) {
    if (contains(name)) throw ConfigError("duplicate parameter name: " + name);
    entries_.emplace_back(std::move(name), std::move(value));
}

void BlockParams::set(std::string_view name, Tensor value) {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const Entry& e) { return e.first == name; });
    if (it == entries_.end()) throw ConfigError("unknown parameter: " + std::string(name));
    if (!it->second.same_shape(value)) {
        throw DimensionError("parameter " + std::string(name) + " has shape " +
                             shape_str(it->second.shape()) + ", replacement has " +
                             shape_str(value.shape()));
    }
    it->second = std::move(value);
}

const Tensor& BlockParams::get(std::string_view name) const {
    for (const auto& [n, t] : entries_)
        if (n == name) return t;
    throw ConfigError("missing parameter: " + std::string(name));
}

bool BlockParams::contains(std::string_view name) const noexcept {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.first == name; });
}

void BlockParams::merge(const BlockParams& other, std::string_view prefix) {
    for (const auto& [n, t] : other) add(std::string(prefix) + n, t);
}

bool operator==(const BlockParams& a, const BlockParams& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
        const auto& [na, ta] = a.entries_[i];
        const auto& [nb, tb] = b.entries_[i];
        if (na != nb || !ta.same_shape(tb)) return false;
        if (!std::equal(ta.data().begin(), ta.data().end(), tb.data().begin())) return false;
    }
    return true;
}

}  // namespace gformer

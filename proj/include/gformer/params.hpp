#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gformer/tensor.hpp"

namespace gformer {

/// Named parameter set of an assembled block.
///
/// Entries keep insertion order, which is the enumeration order used for
/// parameter counting and gradient checks. Names are unique.
class BlockParams {
public:
    using Entry = std::pair<std::string, Tensor>;

    // Throws ConfigError on a duplicate name.
    void add(std::string name, Tensor value);
    // Replaces an existing entry, keeping its position and requiring the same shape.
    void set(std::string_view name, Tensor value);
    // Throws ConfigError naming the missing parameter.
    const Tensor& get(std::string_view name) const;
    bool contains(std::string_view name) const noexcept;

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    // Appends every entry of other, prefixing its names.
    void merge(const BlockParams& other, std::string_view prefix = {});

    friend bool operator==(const BlockParams& a, const BlockParams& b);

private:
    std::vector<Entry> entries_;
};

}  // namespace gformer

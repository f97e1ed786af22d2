#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "gformer/autograd.hpp"
#include "gformer/gformer.hpp"

namespace gformer {

// Presets that have a standalone reference block.
std::span<const std::string_view> reference_presets() noexcept;

// Runs the standalone block matching a preset on x: [n, d] (n = dims.shape.n()).
// Throws ConfigError for presets without a reference.
ag::Var reference_forward(std::string_view preset, const PresetDims& dims, const ag::VarMap& params,
                          const ag::Var& x);
Tensor reference_forward(std::string_view preset, const PresetDims& dims, const BlockParams& params,
                         const Tensor& x);

// Random small geometry: n = H*W <= 16, d <= 8, with valid heads/hidden/reduction.
PresetDims random_dims(std::uint64_t seed);

struct EquivalenceResult {
    std::size_t trials = 0;
    double max_deviation = 0.0;
};

// gFormer preset vs reference block on `trials` random (dims, params, x) triples.
EquivalenceResult check_equivalence(std::string_view preset, std::size_t trials, std::uint64_t seed);

}  // namespace gformer

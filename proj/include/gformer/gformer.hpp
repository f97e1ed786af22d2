#pragma once

// The gFormer block: a single configurable dataflow
//
//   a = norm1(x); s = spatial(a); u = residual1 ? x + s : s
//   b = norm2(u); c = channel(b); v = residual2 ? u + c : c
//   w = interaction ? x (*) broadcast(v) : v
//   out = residual3 ? x + w : w
//
// and the presets that reduce it to Transformer, MetaFormer, CAT,
// Squeeze-and-Excite, MLP-Mixer and FNet blocks.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "gformer/autograd.hpp"
#include "gformer/config.hpp"
#include "gformer/params.hpp"

namespace gformer {

struct Block {
    GFormerConfig config;
};

struct AssembledBlock {
    Block block;
    BlockParams params;
};

// Parameters drawn from a seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in));
// layer-norm affines start at gamma = 1, beta = 0.
AssembledBlock assemble(const GFormerConfig& config, std::uint64_t seed);

// Parameter names and shapes a config requires, in enumeration order.
std::vector<mixers::ParamSpec> param_specs(const GFormerConfig& config);

// x: [n, d] or [H, W, d] matching config.spatial_shape; output has x's shape.
Tensor forward(const Block& block, const BlockParams& params, const Tensor& x);
ag::Var forward(const Block& block, const ag::VarMap& params, const ag::Var& x);

struct PresetDims {
    std::size_t d = 8;
    SpatialShape shape{4, 4};
    std::size_t heads = 2;
    std::size_t ffn_hidden = 16;
    std::size_t token_hidden = 16;
    std::size_t se_reduction = 2;
    // Token mixer for the metaformer preset; defaults to spatial_mlp.
    std::optional<mixers::SpatialMixerKind> metaformer_spatial;
};

std::span<const std::string_view> preset_names() noexcept;
// Throws ConfigError for unknown names or invalid dims.
GFormerConfig preset(std::string_view name, const PresetDims& dims = {});

}  // namespace gformer

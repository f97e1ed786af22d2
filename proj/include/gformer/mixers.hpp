#pragma once

// Pluggable spatial (token) mixers, channel mixers and pairwise interactions
// composed by the gFormer block.
//
// Mixers operate on the flattened [n, d] layout (n = H * W). Parameters are
// read from a VarMap by name: spatial mixers use the "spatial." prefix and
// channel mixers the "channel." prefix.

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gformer/autograd.hpp"
#include "gformer/params.hpp"
#include "gformer/tensor.hpp"

namespace gformer {

enum class Activation { identity, relu, sigmoid, swish };

std::string_view activation_name(Activation a) noexcept;
Activation activation_from_name(std::string_view name);  // ConfigError if unknown

struct SpatialShape {
    std::size_t h = 1;
    std::size_t w = 1;

    std::size_t n() const noexcept { return h * w; }
    friend bool operator==(const SpatialShape&, const SpatialShape&) = default;
};

namespace mixers {

struct MultiHeadAttention {
    std::size_t heads = 1;
    friend bool operator==(const MultiHeadAttention&, const MultiHeadAttention&) = default;
};
struct DepthwiseFullConv {
    friend bool operator==(const DepthwiseFullConv&, const DepthwiseFullConv&) = default;
};
struct GlobalMeanPool {
    friend bool operator==(const GlobalMeanPool&, const GlobalMeanPool&) = default;
};
struct FourierMix {
    friend bool operator==(const FourierMix&, const FourierMix&) = default;
};
// Dense map across the n positions, applied independently per channel.
struct SpatialMlp {
    std::size_t hidden = 16;
    Activation activation = Activation::swish;
    friend bool operator==(const SpatialMlp&, const SpatialMlp&) = default;
};

using SpatialMixerKind =
    std::variant<MultiHeadAttention, DepthwiseFullConv, GlobalMeanPool, FourierMix, SpatialMlp>;

struct Mlp {
    std::size_t hidden = 16;
    Activation activation = Activation::swish;
    friend bool operator==(const Mlp&, const Mlp&) = default;
};
struct Pointwise {
    friend bool operator==(const Pointwise&, const Pointwise&) = default;
};
// dense(d -> d/r) -> ReLU -> dense(d/r -> d) -> sigmoid
struct SeGate {
    std::size_t reduction = 1;
    friend bool operator==(const SeGate&, const SeGate&) = default;
};

using ChannelMixerKind = std::variant<Mlp, Pointwise, SeGate>;

enum class InteractionKind { none, hadamard_broadcast };

std::string_view kind_name(const SpatialMixerKind& kind) noexcept;
std::string_view kind_name(const ChannelMixerKind& kind) noexcept;
std::string_view interaction_name(InteractionKind kind) noexcept;

// depthwise_full_conv and global_mean_pool reduce the map to one d-vector.
bool produces_summary(const SpatialMixerKind& kind) noexcept;

// Throws ConfigError on invalid hyper-parameters for channel dimension d.
void validate(const SpatialMixerKind& kind, std::size_t d);
void validate(const ChannelMixerKind& kind, std::size_t d);

struct ParamSpec {
    std::string name;
    Shape shape;
    std::size_t fan_in;
};

std::vector<ParamSpec> param_specs(const SpatialMixerKind& kind, SpatialShape shape, std::size_t d);
std::vector<ParamSpec> param_specs(const ChannelMixerKind& kind, std::size_t d);

// Output of a spatial mixer: either an [n, d] map or a [1, d] summary.
struct MixOutput {
    ag::Var value;
    bool summary = false;
};

ag::Var activate(Activation a, const ag::Var& x);

// Scaled dot-product attention with per-head scale 1/sqrt(d/heads). Projections
// are read from <prefix>wq, bq, wk, bk, wv, bv, wo, bo (weights [d, d]).
ag::Var multi_head_attention(const ag::Var& x, const ag::VarMap& params, std::size_t heads,
                             std::string_view prefix = "spatial.");
Tensor multi_head_attention(const Tensor& x, const BlockParams& params, std::size_t heads,
                            std::string_view prefix = "spatial.");

MixOutput spatial_summary(const SpatialMixerKind& kind, const ag::Var& x, SpatialShape shape,
                          const ag::VarMap& params);

// v: [rows, d] (a summary is a single row).
ag::Var channel_mix(const ChannelMixerKind& kind, const ag::Var& v, const ag::VarMap& params);
Tensor channel_mix(const ChannelMixerKind& kind, const Tensor& v, const BlockParams& params);

}  // namespace mixers
}  // namespace gformer

#include "gformer/gformer.hpp"

#include <array>

#include "gformer/init.hpp"

namespace gformer {

namespace {

constexpr std::array<std::string_view, 6> kPresets{"transformer", "metaformer", "cat",
                                                   "squeeze_excite", "mlp_mixer", "fnet"};

ag::Var normalize(const GFormerConfig& c, const ag::VarMap& params, const ag::Var& x,
                  const char* which) {
    if (c.norm == NormKind::identity) return x;
    const std::string pre = std::string(which) + ".";
    return ag::layer_norm(x, params.get(pre + "gamma"), params.get(pre + "beta"), kLayerNormEps);
}

}  // namespace

std::vector<mixers::ParamSpec> param_specs(const GFormerConfig& c) {
    std::vector<mixers::ParamSpec> specs;
    auto norm = [&](const char* which) {
        if (c.norm != NormKind::layer_norm) return;
        specs.push_back({std::string(which) + ".gamma", {c.d}, c.d});
        specs.push_back({std::string(which) + ".beta", {c.d}, c.d});
    };
    norm("norm1");
    for (auto& s : mixers::param_specs(c.spatial, c.spatial_shape, c.d)) specs.push_back(std::move(s));
    norm("norm2");
    for (auto& s : mixers::param_specs(c.channel, c.d)) specs.push_back(std::move(s));
    return specs;
}

AssembledBlock assemble(const GFormerConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    BlockParams params;
    for (const auto& spec : param_specs(config)) {
        const bool is_gamma = spec.name.ends_with(".gamma");
        const bool is_beta = spec.name.ends_with(".beta");
        if (is_gamma) {
            params.add(spec.name, Tensor::ones(spec.shape));
        } else if (is_beta) {
            params.add(spec.name, Tensor::zeros(spec.shape));
        } else {
            params.add(spec.name, rng.fan_in_uniform(spec.shape, spec.fan_in));
        }
    }
    return {Block{config}, std::move(params)};
}

ag::Var forward(const Block& block, const ag::VarMap& params, const ag::Var& x_in) {
    const GFormerConfig& c = block.config;
    const std::size_t n = c.spatial_shape.n();
    const Shape& in_shape = x_in.shape();
    const bool flat_ok = in_shape == Shape{n, c.d};
    const bool cube_ok = in_shape == Shape{c.spatial_shape.h, c.spatial_shape.w, c.d};
    if (!flat_ok && !cube_ok) {
        throw DimensionError("gformer forward: input " + shape_str(in_shape) + " does not match [" +
                             std::to_string(n) + "x" + std::to_string(c.d) + "] or [" +
                             std::to_string(c.spatial_shape.h) + "x" +
                             std::to_string(c.spatial_shape.w) + "x" + std::to_string(c.d) + "]");
    }
    const ag::Var x = cube_ok ? ag::reshape(x_in, {n, c.d}) : x_in;

    const ag::Var a = normalize(c, params, x, "norm1");
    const mixers::MixOutput s = mixers::spatial_summary(c.spatial, a, c.spatial_shape, params);
    const ag::Var u = c.residual1 ? ag::add(x, s.value) : s.value;
    const ag::Var b = normalize(c, params, u, "norm2");
    const ag::Var ch = mixers::channel_mix(c.channel, b, params);
    const ag::Var v = c.residual2 ? ag::add(u, ch) : ch;

    ag::Var w = v;
    if (c.interaction == mixers::InteractionKind::hadamard_broadcast) {
        w = s.summary ? ag::scale_rows(x, v) : ag::hadamard(x, v);
    }
    const ag::Var out = c.residual3 ? ag::add(x, w) : w;
    return cube_ok ? ag::reshape(out, in_shape) : out;
}

Tensor forward(const Block& block, const BlockParams& params, const Tensor& x) {
    ag::NoGradGuard guard;
    return forward(block, ag::VarMap::bind(params, false), ag::constant(x)).value();
}

std::span<const std::string_view> preset_names() noexcept { return kPresets; }

GFormerConfig preset(std::string_view name, const PresetDims& dims) {
    GFormerConfig c;
    c.d = dims.d;
    c.spatial_shape = dims.shape;
    const mixers::Mlp ffn{dims.ffn_hidden, Activation::swish};
    if (name == "transformer") {
        c.spatial = mixers::MultiHeadAttention{dims.heads};
        c.channel = ffn;
        c.interaction = mixers::InteractionKind::none;
        c.residual1 = c.residual2 = true;
        c.residual3 = false;
        c.norm = NormKind::layer_norm;
    } else if (name == "metaformer") {
        c.spatial = dims.metaformer_spatial.value_or(
            mixers::SpatialMlp{dims.token_hidden, Activation::swish});
        c.channel = ffn;
        c.interaction = mixers::InteractionKind::none;
        c.residual1 = c.residual2 = true;
        c.residual3 = false;
        c.norm = NormKind::layer_norm;
    } else if (name == "cat") {
        c.spatial = mixers::DepthwiseFullConv{};
        c.channel = mixers::Pointwise{};
        c.interaction = mixers::InteractionKind::hadamard_broadcast;
        c.residual1 = c.residual2 = c.residual3 = false;
        c.norm = NormKind::identity;
    } else if (name == "squeeze_excite") {
        c.spatial = mixers::GlobalMeanPool{};
        c.channel = mixers::SeGate{dims.se_reduction};
        c.interaction = mixers::InteractionKind::hadamard_broadcast;
        c.residual1 = c.residual2 = c.residual3 = false;
        c.norm = NormKind::identity;
    } else if (name == "mlp_mixer") {
        c.spatial = mixers::SpatialMlp{dims.token_hidden, Activation::swish};
        c.channel = ffn;
        c.interaction = mixers::InteractionKind::none;
        c.residual1 = c.residual2 = true;
        c.residual3 = false;
        c.norm = NormKind::layer_norm;
    } else if (name == "fnet") {
        c.spatial = mixers::FourierMix{};
        c.channel = ffn;
        c.interaction = mixers::InteractionKind::none;
        c.residual1 = c.residual2 = true;
        c.residual3 = false;
        c.norm = NormKind::layer_norm;
    } else {
        throw ConfigError("unknown preset: " + std::string(name));
    }
    c.validate();
    return c;
}

}  // namespace gformer

#include "gformer/mixers.hpp"

#include <cmath>
#include <type_traits>

namespace gformer {

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string_view activation_name(Activation a) noexcept {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::relu: return "relu";
        case Activation::sigmoid: return "sigmoid";
        case Activation::swish: return "swish";
    }
    return "identity";
}

Activation activation_from_name(std::string_view name) {
    for (auto a : {Activation::identity, Activation::relu, Activation::sigmoid, Activation::swish})
        if (activation_name(a) == name) return a;
    throw ConfigError("unknown activation: " + std::string(name));
}

namespace mixers {

namespace {

// Fetches a parameter and checks its shape against the mixer's declaration.
const ag::Var& param(const ag::VarMap& params, const std::string& name, const Shape& shape) {
    const ag::Var& v = params.get(name);
    if (v.shape() != shape) {
        throw ConfigError("parameter " + name + " has shape " + shape_str(v.shape()) +
                          ", expected " + shape_str(shape));
    }
    return v;
}

std::size_t cols_of(const ag::Var& x, const char* who) {
    if (x.shape().size() != 2)
        throw DimensionError(std::string(who) + ": expected [n, d] input, got " +
                             shape_str(x.shape()));
    return x.shape()[1];
}

}  // namespace

std::string_view kind_name(const SpatialMixerKind& kind) noexcept {
    return std::visit(overloaded{
                          [](const MultiHeadAttention&) { return std::string_view{"multi_head_attention"}; },
                          [](const DepthwiseFullConv&) { return std::string_view{"depthwise_full_conv"}; },
                          [](const GlobalMeanPool&) { return std::string_view{"global_mean_pool"}; },
                          [](const FourierMix&) { return std::string_view{"fourier_mix"}; },
                          [](const SpatialMlp&) { return std::string_view{"spatial_mlp"}; },
                      },
                      kind);
}

std::string_view kind_name(const ChannelMixerKind& kind) noexcept {
    return std::visit(overloaded{
                          [](const Mlp&) { return std::string_view{"mlp"}; },
                          [](const Pointwise&) { return std::string_view{"pointwise"}; },
                          [](const SeGate&) { return std::string_view{"se_gate"}; },
                      },
                      kind);
}

std::string_view interaction_name(InteractionKind kind) noexcept {
    return kind == InteractionKind::none ? "none" : "hadamard_broadcast";
}

bool produces_summary(const SpatialMixerKind& kind) noexcept {
    return std::holds_alternative<DepthwiseFullConv>(kind) ||
           std::holds_alternative<GlobalMeanPool>(kind);
}

void validate(const SpatialMixerKind& kind, std::size_t d) {
    if (const auto* mha = std::get_if<MultiHeadAttention>(&kind)) {
        if (mha->heads == 0 || d % mha->heads != 0)
            throw ConfigError("multi_head_attention: heads (" + std::to_string(mha->heads) +
                              ") does not divide d (" + std::to_string(d) + ")");
    }
    if (const auto* mlp = std::get_if<SpatialMlp>(&kind)) {
        if (mlp->hidden == 0) throw ConfigError("spatial_mlp: hidden must be positive");
    }
}

void validate(const ChannelMixerKind& kind, std::size_t d) {
    if (const auto* mlp = std::get_if<Mlp>(&kind)) {
        if (mlp->hidden == 0) throw ConfigError("mlp: hidden must be positive");
    }
    if (const auto* se = std::get_if<SeGate>(&kind)) {
        if (se->reduction == 0 || se->reduction > d || d % se->reduction != 0)
            throw ConfigError("se_gate: reduction (" + std::to_string(se->reduction) +
                              ") must divide d (" + std::to_string(d) + ")");
    }
}

std::vector<ParamSpec> param_specs(const SpatialMixerKind& kind, SpatialShape shape, std::size_t d) {
    return std::visit(
        overloaded{
            [&](const MultiHeadAttention&) {
                std::vector<ParamSpec> specs;
                for (const char* p : {"q", "k", "v", "o"}) {
                    specs.push_back({std::string("spatial.w") + p, {d, d}, d});
                    specs.push_back({std::string("spatial.b") + p, {d}, d});
                }
                return specs;
            },
            [&](const DepthwiseFullConv&) {
                return std::vector<ParamSpec>{{"spatial.kernel", {shape.h, shape.w, d}, shape.n()},
                                              {"spatial.bias", {d}, shape.n()}};
            },
            [](const GlobalMeanPool&) { return std::vector<ParamSpec>{}; },
            [](const FourierMix&) { return std::vector<ParamSpec>{}; },
            [&](const SpatialMlp& m) {
                const std::size_t n = shape.n();
                return std::vector<ParamSpec>{{"spatial.w1", {n, m.hidden}, n},
                                              {"spatial.b1", {m.hidden}, n},
                                              {"spatial.w2", {m.hidden, n}, m.hidden},
                                              {"spatial.b2", {n}, m.hidden}};
            },
        },
        kind);
}

std::vector<ParamSpec> param_specs(const ChannelMixerKind& kind, std::size_t d) {
    return std::visit(overloaded{
                          [&](const Mlp& m) {
                              return std::vector<ParamSpec>{{"channel.w1", {d, m.hidden}, d},
                                                            {"channel.b1", {m.hidden}, d},
                                                            {"channel.w2", {m.hidden, d}, m.hidden},
                                                            {"channel.b2", {d}, m.hidden}};
                          },
                          [&](const Pointwise&) {
                              return std::vector<ParamSpec>{{"channel.w", {d, d}, d},
                                                            {"channel.b", {d}, d}};
                          },
                          [&](const SeGate& se) {
                              const std::size_t r = d / se.reduction;
                              return std::vector<ParamSpec>{{"channel.w1", {d, r}, d},
                                                            {"channel.b1", {r}, d},
                                                            {"channel.w2", {r, d}, r},
                                                            {"channel.b2", {d}, r}};
                          },
                      },
                      kind);
}

ag::Var activate(Activation a, const ag::Var& x) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::relu: return ag::relu(x);
        case Activation::sigmoid: return ag::sigmoid(x);
        case Activation::swish: return ag::swish(x);
    }
    return x;
}

ag::Var multi_head_attention(const ag::Var& x, const ag::VarMap& params, std::size_t heads,
                             std::string_view prefix) {
    const std::size_t d = cols_of(x, "multi_head_attention");
    if (heads == 0 || d % heads != 0)
        throw ConfigError("multi_head_attention: heads (" + std::to_string(heads) +
                          ") does not divide d (" + std::to_string(d) + ")");
    const std::string pre(prefix);
    auto project = [&](const char* which) {
        return ag::dense(x, param(params, pre + "w" + which, {d, d}),
                         param(params, pre + "b" + which, {d}));
    };
    const ag::Var q = project("q");
    const ag::Var k = project("k");
    const ag::Var v = project("v");
    const std::size_t dh = d / heads;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<ag::Var> outputs;
    outputs.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        const ag::Var qh = ag::slice_cols(q, h * dh, dh);
        const ag::Var kh = ag::slice_cols(k, h * dh, dh);
        const ag::Var vh = ag::slice_cols(v, h * dh, dh);
        const ag::Var scores = ag::scale(ag::matmul(qh, ag::transpose(kh)), inv_sqrt);
        outputs.push_back(ag::matmul(ag::softmax(scores, 1), vh));
    }
    const ag::Var merged = heads == 1 ? outputs.front() : ag::concat_cols(outputs);
    return ag::dense(merged, param(params, pre + "wo", {d, d}), param(params, pre + "bo", {d}));
}

Tensor multi_head_attention(const Tensor& x, const BlockParams& params, std::size_t heads,
                            std::string_view prefix) {
    ag::NoGradGuard guard;
    return multi_head_attention(ag::constant(x), ag::VarMap::bind(params, false), heads, prefix).value();
}

MixOutput spatial_summary(const SpatialMixerKind& kind, const ag::Var& x, SpatialShape shape,
                          const ag::VarMap& params) {
    const std::size_t d = cols_of(x, "spatial_summary");
    if (x.shape()[0] != shape.n())
        throw DimensionError("spatial_summary: input has " + std::to_string(x.shape()[0]) +
                             " positions, spatial shape " + std::to_string(shape.h) + "x" +
                             std::to_string(shape.w) + " needs " + std::to_string(shape.n()));
    return std::visit(
        overloaded{
            [&](const MultiHeadAttention& m) {
                return MixOutput{multi_head_attention(x, params, m.heads), false};
            },
            [&](const DepthwiseFullConv&) {
                const ag::Var cube = ag::reshape(x, {shape.h, shape.w, d});
                const ag::Var out = ag::depthwise_conv_full(
                    cube, param(params, "spatial.kernel", {shape.h, shape.w, d}),
                    param(params, "spatial.bias", {d}));
                return MixOutput{ag::reshape(out, {1, d}), true};
            },
            [&](const GlobalMeanPool&) { return MixOutput{ag::mean_rows(x), true}; },
            [&](const FourierMix&) { return MixOutput{ag::dft2_real(x), false}; },
            [&](const SpatialMlp& m) {
                const std::size_t n = shape.n();
                const ag::Var tokens = ag::transpose(x);  // [d, n]
                const ag::Var hidden = activate(
                    m.activation, ag::dense(tokens, param(params, "spatial.w1", {n, m.hidden}),
                                            param(params, "spatial.b1", {m.hidden})));
                const ag::Var mixed = ag::dense(hidden, param(params, "spatial.w2", {m.hidden, n}),
                                                param(params, "spatial.b2", {n}));
                return MixOutput{ag::transpose(mixed), false};
            },
        },
        kind);
}

ag::Var channel_mix(const ChannelMixerKind& kind, const ag::Var& v, const ag::VarMap& params) {
    const std::size_t d = cols_of(v, "channel_mix");
    const std::size_t rows = v.shape()[0];
    return std::visit(
        overloaded{
            [&](const Mlp& m) {
                const ag::Var h = activate(m.activation,
                                           ag::dense(v, param(params, "channel.w1", {d, m.hidden}),
                                                     param(params, "channel.b1", {m.hidden})));
                return ag::dense(h, param(params, "channel.w2", {m.hidden, d}),
                                 param(params, "channel.b2", {d}));
            },
            [&](const Pointwise&) {
                const ag::Var out = ag::pointwise_conv(ag::reshape(v, {rows, 1, d}),
                                                       param(params, "channel.w", {d, d}),
                                                       param(params, "channel.b", {d}));
                return ag::reshape(out, {rows, d});
            },
            [&](const SeGate& se) {
                if (se.reduction == 0 || d % se.reduction != 0)
                    throw ConfigError("se_gate: reduction does not divide d");
                const std::size_t r = d / se.reduction;
                const ag::Var squeezed = ag::relu(ag::dense(
                    v, param(params, "channel.w1", {d, r}), param(params, "channel.b1", {r})));
                return ag::sigmoid(ag::dense(squeezed, param(params, "channel.w2", {r, d}),
                                             param(params, "channel.b2", {d})));
            },
        },
        kind);
}

Tensor channel_mix(const ChannelMixerKind& kind, const Tensor& v, const BlockParams& params) {
    ag::NoGradGuard guard;
    return channel_mix(kind, ag::constant(v), ag::VarMap::bind(params, false)).value();
}

}  // namespace mixers
}  // namespace gformer

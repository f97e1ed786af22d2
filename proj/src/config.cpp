#include "gformer/config.hpp"

#include <initializer_list>
#include <variant>

namespace gformer {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    std::string_view where) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
}

const json& required(const json& obj, const char* key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw ConfigError(std::string(where) + ": missing key '" + key + "'");
    return *it;
}

std::size_t as_size(const json& v, std::string_view what) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError(std::string(what) + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

bool as_bool(const json& v, std::string_view what) {
    if (!v.is_boolean()) throw ConfigError(std::string(what) + ": expected a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, std::string_view what) {
    if (!v.is_string()) throw ConfigError(std::string(what) + ": expected a string");
    return v.get<std::string>();
}

Activation activation_or_default(const json& obj, std::string_view where) {
    auto it = obj.find("activation");
    if (it == obj.end()) return Activation::swish;
    return activation_from_name(as_string(*it, std::string(where) + ".activation"));
}

json spatial_to_json(const mixers::SpatialMixerKind& kind) {
    json j{{"kind", std::string(mixers::kind_name(kind))}};
    if (const auto* m = std::get_if<mixers::MultiHeadAttention>(&kind)) j["heads"] = m->heads;
    if (const auto* m = std::get_if<mixers::SpatialMlp>(&kind)) {
        j["hidden"] = m->hidden;
        j["activation"] = std::string(activation_name(m->activation));
    }
    return j;
}

json channel_to_json(const mixers::ChannelMixerKind& kind) {
    json j{{"kind", std::string(mixers::kind_name(kind))}};
    if (const auto* m = std::get_if<mixers::Mlp>(&kind)) {
        j["hidden"] = m->hidden;
        j["activation"] = std::string(activation_name(m->activation));
    }
    if (const auto* m = std::get_if<mixers::SeGate>(&kind)) j["reduction"] = m->reduction;
    return j;
}

mixers::SpatialMixerKind spatial_from_json(const json& j) {
    const std::string kind = as_string(required(j, "kind", "spatial"), "spatial.kind");
    if (kind == "multi_head_attention") {
        reject_unknown(j, {"kind", "heads"}, "spatial");
        return mixers::MultiHeadAttention{as_size(required(j, "heads", "spatial"), "spatial.heads")};
    }
    if (kind == "depthwise_full_conv") {
        reject_unknown(j, {"kind"}, "spatial");
        return mixers::DepthwiseFullConv{};
    }
    if (kind == "global_mean_pool") {
        reject_unknown(j, {"kind"}, "spatial");
        return mixers::GlobalMeanPool{};
    }
    if (kind == "fourier_mix") {
        reject_unknown(j, {"kind"}, "spatial");
        return mixers::FourierMix{};
    }
    if (kind == "spatial_mlp") {
        reject_unknown(j, {"kind", "hidden", "activation"}, "spatial");
        return mixers::SpatialMlp{as_size(required(j, "hidden", "spatial"), "spatial.hidden"),
                                  activation_or_default(j, "spatial")};
    }
    throw ConfigError("spatial: unknown mixer kind '" + kind + "'");
}

mixers::ChannelMixerKind channel_from_json(const json& j) {
    const std::string kind = as_string(required(j, "kind", "channel"), "channel.kind");
    if (kind == "mlp") {
        reject_unknown(j, {"kind", "hidden", "activation"}, "channel");
        return mixers::Mlp{as_size(required(j, "hidden", "channel"), "channel.hidden"),
                           activation_or_default(j, "channel")};
    }
    if (kind == "pointwise") {
        reject_unknown(j, {"kind"}, "channel");
        return mixers::Pointwise{};
    }
    if (kind == "se_gate") {
        reject_unknown(j, {"kind", "reduction"}, "channel");
        return mixers::SeGate{as_size(required(j, "reduction", "channel"), "channel.reduction")};
    }
    throw ConfigError("channel: unknown mixer kind '" + kind + "'");
}

}  // namespace

std::string_view norm_name(NormKind kind) noexcept {
    return kind == NormKind::layer_norm ? "layer_norm" : "identity";
}

void GFormerConfig::validate() const {
    if (d == 0) throw ConfigError("d must be positive");
    if (spatial_shape.h == 0 || spatial_shape.w == 0)
        throw ConfigError("spatial_shape extents must be positive");
    mixers::validate(spatial, d);
    mixers::validate(channel, d);
    if (mixers::produces_summary(spatial)) {
        const std::string name(mixers::kind_name(spatial));
        if (residual1)
            throw ConfigError("residual1 conflicts with summary-path spatial mixer " + name);
        if (residual2)
            throw ConfigError("residual2 conflicts with summary-path spatial mixer " + name);
        if (interaction != mixers::InteractionKind::hadamard_broadcast)
            throw ConfigError("interaction 'none' conflicts with summary-path spatial mixer " + name +
                              " (output would not match the input shape)");
    }
}

json to_json(const GFormerConfig& c) {
    return json{
        {"d", c.d},
        {"spatial", spatial_to_json(c.spatial)},
        {"channel", channel_to_json(c.channel)},
        {"interaction", std::string(mixers::interaction_name(c.interaction))},
        {"residual1", c.residual1},
        {"residual2", c.residual2},
        {"residual3", c.residual3},
        {"norm", std::string(norm_name(c.norm))},
        {"spatial_shape", json::array({c.spatial_shape.h, c.spatial_shape.w})},
    };
}

GFormerConfig config_from_json(const json& doc) {
    constexpr std::string_view where = "config";
    reject_unknown(doc, {"d", "spatial", "channel", "interaction", "residual1", "residual2",
                         "residual3", "norm", "spatial_shape"},
                   where);
    GFormerConfig c;
    c.d = as_size(required(doc, "d", where), "d");
    c.spatial = spatial_from_json(required(doc, "spatial", where));
    c.channel = channel_from_json(required(doc, "channel", where));
    const std::string interaction = as_string(required(doc, "interaction", where), "interaction");
    if (interaction == "none") {
        c.interaction = mixers::InteractionKind::none;
    } else if (interaction == "hadamard_broadcast") {
        c.interaction = mixers::InteractionKind::hadamard_broadcast;
    } else {
        throw ConfigError("interaction: unknown kind '" + interaction + "'");
    }
    c.residual1 = as_bool(required(doc, "residual1", where), "residual1");
    c.residual2 = as_bool(required(doc, "residual2", where), "residual2");
    c.residual3 = as_bool(required(doc, "residual3", where), "residual3");
    const std::string norm = as_string(required(doc, "norm", where), "norm");
    if (norm == "layer_norm") {
        c.norm = NormKind::layer_norm;
    } else if (norm == "identity") {
        c.norm = NormKind::identity;
    } else {
        throw ConfigError("norm: unknown kind '" + norm + "'");
    }
    const json& shape = required(doc, "spatial_shape", where);
    if (shape.is_array()) {
        if (shape.size() != 2) throw ConfigError("spatial_shape: expected [H, W] or n");
        c.spatial_shape = {as_size(shape[0], "spatial_shape[0]"), as_size(shape[1], "spatial_shape[1]")};
    } else {
        c.spatial_shape = {as_size(shape, "spatial_shape"), 1};
    }
    c.validate();
    return c;
}

}  // namespace gformer

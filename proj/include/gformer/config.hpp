#pragma once

#include <cstddef>
#include <string>

#include "json.hpp"

#include "gformer/mixers.hpp"

namespace gformer {

enum class NormKind { layer_norm, identity };

inline constexpr double kLayerNormEps = 1e-5;

/// Declarative description of one gFormer block.
struct GFormerConfig {
    std::size_t d = 8;
    mixers::SpatialMixerKind spatial = mixers::MultiHeadAttention{1};
    mixers::ChannelMixerKind channel = mixers::Mlp{};
    mixers::InteractionKind interaction = mixers::InteractionKind::none;
    bool residual1 = true;
    bool residual2 = true;
    bool residual3 = false;
    NormKind norm = NormKind::layer_norm;
    SpatialShape spatial_shape{4, 1};

    // Throws ConfigError naming the conflicting fields.
    void validate() const;

    friend bool operator==(const GFormerConfig&, const GFormerConfig&) = default;
};

std::string_view norm_name(NormKind kind) noexcept;

// JSON document using the struct's field names; unknown keys are rejected.
nlohmann::json to_json(const GFormerConfig& config);
GFormerConfig config_from_json(const nlohmann::json& doc);

}  // namespace gformer

#include <bit>
#include <variant>

#include "gformer/analysis.hpp"
#include "gformer/flops.hpp"

namespace gformer::analysis {

namespace {

std::uint64_t activation_flops(Activation a) {
    switch (a) {
        case Activation::identity: return 0;
        case Activation::relu: return flops::kRelu;
        case Activation::sigmoid: return flops::kSigmoid;
        case Activation::swish: return flops::kSwish;
    }
    return 0;
}

std::uint64_t spatial_flops(const mixers::SpatialMixerKind& kind, std::uint64_t n, std::uint64_t d) {
    using namespace flops;
    if (const auto* m = std::get_if<mixers::MultiHeadAttention>(&kind)) {
        const std::uint64_t heads = m->heads, dh = d / heads;
        const std::uint64_t projections = 4 * kMac * n * d * d;
        const std::uint64_t per_head = kMac * n * n * dh     // scores
                                       + kProduct * n * n    // 1/sqrt(dh) scale
                                       + kSoftmax * n * n    // row softmax
                                       + kMac * n * n * dh;  // weights * values
        return projections + heads * per_head;
    }
    if (std::holds_alternative<mixers::DepthwiseFullConv>(kind)) return kMac * n * d;
    if (std::holds_alternative<mixers::GlobalMeanPool>(kind)) return kMeanPerInput * n * d;
    if (std::holds_alternative<mixers::FourierMix>(kind))
        return n * dft_flops(d) + d * dft_flops(n);
    const auto& mlp = std::get<mixers::SpatialMlp>(kind);
    const std::uint64_t h = mlp.hidden;
    return kMac * d * n * h + activation_flops(mlp.activation) * d * h + kMac * d * h * n;
}

std::uint64_t channel_flops(const mixers::ChannelMixerKind& kind, std::uint64_t rows, std::uint64_t d) {
    using namespace flops;
    if (const auto* m = std::get_if<mixers::Mlp>(&kind)) {
        const std::uint64_t h = m->hidden;
        return kMac * rows * d * h + activation_flops(m->activation) * rows * h + kMac * rows * h * d;
    }
    if (std::holds_alternative<mixers::Pointwise>(kind)) return kMac * rows * d * d;
    const auto& se = std::get<mixers::SeGate>(kind);
    const std::uint64_t r = d / se.reduction;
    return kMac * rows * d * r + kRelu * rows * r + kMac * rows * r * d + kSigmoid * rows * d;
}

}  // namespace

std::uint64_t dft_flops(std::size_t length) {
    if (length <= 1) return 0;
    if (std::has_single_bit(length)) {
        const std::uint64_t stages = static_cast<std::uint64_t>(std::countr_zero(length));
        return flops::kButterfly * (length / 2) * stages;
    }
    return flops::kComplexMac * length * length;
}

std::uint64_t count_flops(const GFormerConfig& c, std::size_t n) {
    const std::uint64_t d = c.d;
    const bool summary = mixers::produces_summary(c.spatial);
    const std::uint64_t rows = summary ? 1 : n;
    const std::uint64_t norm = c.norm == NormKind::layer_norm ? flops::kLayerNorm : 0;

    std::uint64_t total = norm * n * d;
    total += spatial_flops(c.spatial, n, d);
    total += norm * rows * d;
    total += channel_flops(c.channel, rows, d);
    if (c.interaction == mixers::InteractionKind::hadamard_broadcast) total += flops::kProduct * n * d;
    return total;
}

std::uint64_t count_params(const BlockParams& params) {
    std::uint64_t total = 0;
    for (const auto& [_, t] : params) total += t.size();
    return total;
}

}  // namespace gformer::analysis

#include "gformer/equivalence.hpp"

#include <algorithm>
#include <array>
#include <variant>

#include "gformer/blocks.hpp"
#include "gformer/init.hpp"

namespace gformer {

namespace {
constexpr std::array<std::string_view, 5> kReferenced{"transformer", "cat", "squeeze_excite",
                                                      "mlp_mixer", "fnet"};
}

std::span<const std::string_view> reference_presets() noexcept { return kReferenced; }

ag::Var reference_forward(std::string_view preset, const PresetDims& dims, const ag::VarMap& params,
                          const ag::Var& x) {
    const std::size_t h = dims.shape.h, w = dims.shape.w, d = dims.d;
    if (preset == "transformer")
        return blocks::transformer_encoder_layer(x, params, dims.heads, dims.ffn_hidden);
    if (preset == "cat")
        return ag::reshape(blocks::cat_block(ag::reshape(x, {h, w, d}), params), {h * w, d});
    if (preset == "squeeze_excite")
        return ag::reshape(
            blocks::squeeze_excite_block(ag::reshape(x, {h, w, d}), params, dims.se_reduction),
            {h * w, d});
    if (preset == "mlp_mixer") return blocks::mlp_mixer_block(x, params);
    if (preset == "fnet") return blocks::fnet_block(x, params);
    throw ConfigError("no reference block for preset: " + std::string(preset));
}

Tensor reference_forward(std::string_view preset, const PresetDims& dims, const BlockParams& params,
                         const Tensor& x) {
    ag::NoGradGuard guard;
    return reference_forward(preset, dims, ag::VarMap::bind(params, false), ag::constant(x)).value();
}

PresetDims random_dims(std::uint64_t seed) {
    Rng rng(seed);
    PresetDims dims;
    dims.d = 2 * (1 + rng.index(4));  // 2, 4, 6, 8
    dims.shape = {1 + rng.index(4), 1 + rng.index(4)};
    dims.heads = rng.index(2) ? 2 : 1;
    dims.ffn_hidden = 1 + rng.index(16);
    dims.token_hidden = 1 + rng.index(16);
    std::vector<std::size_t> divisors;
    for (std::size_t r = 1; r <= dims.d; ++r)
        if (dims.d % r == 0) divisors.push_back(r);
    dims.se_reduction = divisors[rng.index(divisors.size())];
    return dims;
}

EquivalenceResult check_equivalence(std::string_view name, std::size_t trials, std::uint64_t seed) {
    if (std::find(kReferenced.begin(), kReferenced.end(), name) == kReferenced.end())
        throw ConfigError("no reference block for preset: " + std::string(name));
    EquivalenceResult result;
    Rng seeds(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const std::uint64_t trial_seed = seeds.engine()();
        const PresetDims dims = random_dims(trial_seed);
        const AssembledBlock ab = assemble(preset(name, dims), trial_seed + 1);
        Rng data(trial_seed + 2);
        const Tensor x = data.normal({dims.shape.n(), dims.d});
        const Tensor ours = forward(ab.block, ab.params, x);
        const Tensor theirs = reference_forward(name, dims, ab.params, x);
        result.max_deviation = std::max(result.max_deviation, max_abs_diff(ours, theirs));
        ++result.trials;
    }
    return result;
}

}  // namespace gformer

#include <cmath>
#include <numeric>

#include "gformer/analysis.hpp"
#include "gformer/init.hpp"
#include "gformer/kernels.hpp"

namespace gformer::analysis {

namespace {

constexpr std::size_t kSamples = 8;
constexpr std::size_t kClasses = 4;
constexpr std::size_t kGrid = 8;
constexpr std::size_t kChannels = 8;

struct Model {
    Block block;
    BlockParams params;  // block parameters followed by head.w, head.b
};

}  // namespace

double default_overfit_lr(std::string_view preset) {
    // Tuned on seed 42; each rate is at most half the smallest divergent rate found.
    if (preset == "transformer") return 0.2;
    if (preset == "cat") return 0.5;
    if (preset == "fnet") return 0.2;
    if (preset == "mlp_mixer") return 0.2;
    if (preset == "metaformer") return 0.2;
    if (preset == "squeeze_excite") return 1.0;
    throw ConfigError("no documented learning rate for preset: " + std::string(preset));
}

std::vector<double> overfit_sanity(std::string_view preset_name, std::size_t steps, double lr,
                                   std::uint64_t seed) {
    PresetDims dims;
    dims.d = kChannels;
    dims.shape = {kGrid, kGrid};
    dims.heads = 2;
    dims.ffn_hidden = 16;
    dims.token_hidden = 16;
    dims.se_reduction = 2;
    const GFormerConfig config = preset(preset_name, dims);

    AssembledBlock ab = assemble(config, seed);
    Model model{ab.block, std::move(ab.params)};
    Rng rng(seed + 1);
    model.params.add("head.w", rng.fan_in_uniform({kChannels, kClasses}, kChannels));
    model.params.add("head.b", rng.fan_in_uniform({kClasses}, kChannels));

    // Fixed batch: standard-normal inputs, two samples per class in shuffled order.
    Rng data_rng(seed + 2);
    std::vector<Tensor> inputs;
    for (std::size_t i = 0; i < kSamples; ++i)
        inputs.push_back(data_rng.normal({kGrid * kGrid, kChannels}));
    std::vector<std::size_t> labels;
    for (std::size_t i : data_rng.permutation(kSamples)) labels.push_back(i % kClasses);

    auto batch_loss = [&](const ag::VarMap& vars) {
        ag::Var total;
        for (std::size_t i = 0; i < kSamples; ++i) {
            const ag::Var features = ag::mean_rows(forward(model.block, vars, ag::constant(inputs[i])));
            const ag::Var logits = ag::dense(features, vars.get("head.w"), vars.get("head.b"));
            const ag::Var loss = ag::cross_entropy(logits, labels[i]);
            total = i == 0 ? loss : ag::add(total, loss);
        }
        return ag::scale(total, 1.0 / static_cast<double>(kSamples));
    };

    std::vector<double> trace;
    trace.reserve(steps + 1);
    for (std::size_t step = 0; step <= steps; ++step) {
        const bool last = step == steps;
        const ag::VarMap vars = ag::VarMap::bind(model.params, !last);
        ag::Var loss;
        try {
            loss = batch_loss(vars);
        } catch (const NumericError& e) {
            throw TrainingFailure(step, std::string("overfit_sanity: diverged: ") + e.what());
        }
        const double value = loss.value()[0];
        if (!std::isfinite(value)) throw TrainingFailure(step, "overfit_sanity: loss is not finite");
        trace.push_back(value);
        if (last) break;
        ag::backward(loss);
        BlockParams updated;
        for (const auto& [name, var] : vars) {
            const Tensor& w = var.value();
            const Tensor g = var.grad();
            std::vector<double> next(w.size());
            kernels::scale(g.raw(), -lr, next.data(), w.size());
            kernels::add(w.raw(), next.data(), next.data(), w.size());
            updated.add(name, Tensor(w.shape(), std::move(next)));
        }
        model.params = std::move(updated);
    }
    return trace;
}

}  // namespace gformer::analysis

#include <gtest/gtest.h>

#include "gformer/blocks.hpp"
#include "gformer/equivalence.hpp"
#include "gformer/errors.hpp"
#include "gformer/gformer.hpp"
#include "gformer/init.hpp"
#include "gformer/ops.hpp"

using namespace gformer;
using nlohmann::json;

namespace {

PresetDims small(std::size_t n, std::size_t d) {
    PresetDims dims;
    dims.d = d;
    dims.shape = {n, 1};
    return dims;
}

}  // namespace

TEST(Presets, Transformer) {
    const auto c = preset("transformer", small(4, 8));
    EXPECT_TRUE(std::holds_alternative<mixers::MultiHeadAttention>(c.spatial));
    EXPECT_TRUE(std::holds_alternative<mixers::Mlp>(c.channel));
    EXPECT_EQ(c.interaction, mixers::InteractionKind::none);
    EXPECT_TRUE(c.residual1);
    EXPECT_TRUE(c.residual2);
    EXPECT_FALSE(c.residual3);
    EXPECT_EQ(c.norm, NormKind::layer_norm);
    EXPECT_NO_THROW(assemble(c, 1));
}

TEST(Presets, MetaFormerIsPluggable) {
    auto dims = small(4, 8);
    const auto c = preset("metaformer", dims);
    EXPECT_EQ(c.interaction, mixers::InteractionKind::none);
    EXPECT_FALSE(c.residual3);
    EXPECT_TRUE(std::holds_alternative<mixers::SpatialMlp>(c.spatial));
    dims.metaformer_spatial = mixers::FourierMix{};
    EXPECT_TRUE(std::holds_alternative<mixers::FourierMix>(preset("metaformer", dims).spatial));
}

TEST(Presets, Cat) {
    const auto c = preset("cat");
    EXPECT_TRUE(std::holds_alternative<mixers::DepthwiseFullConv>(c.spatial));
    EXPECT_TRUE(std::holds_alternative<mixers::Pointwise>(c.channel));
    EXPECT_EQ(c.interaction, mixers::InteractionKind::hadamard_broadcast);
    EXPECT_FALSE(c.residual1 || c.residual2 || c.residual3);
    EXPECT_EQ(c.norm, NormKind::identity);
}

TEST(Presets, SqueezeExcite) {
    const auto c = preset("squeeze_excite");
    EXPECT_TRUE(std::holds_alternative<mixers::GlobalMeanPool>(c.spatial));
    EXPECT_TRUE(std::holds_alternative<mixers::SeGate>(c.channel));
    EXPECT_EQ(c.interaction, mixers::InteractionKind::hadamard_broadcast);
    EXPECT_FALSE(c.residual1 || c.residual2 || c.residual3);
}

TEST(Presets, MlpMixerAndFNet) {
    const auto m = preset("mlp_mixer");
    EXPECT_TRUE(std::holds_alternative<mixers::SpatialMlp>(m.spatial));
    EXPECT_TRUE(std::holds_alternative<mixers::Mlp>(m.channel));
    EXPECT_EQ(m.interaction, mixers::InteractionKind::none);
    EXPECT_FALSE(m.residual3);
    const auto f = preset("fnet");
    EXPECT_TRUE(std::holds_alternative<mixers::FourierMix>(f.spatial));
    EXPECT_TRUE(f.residual1 && f.residual2 && !f.residual3);
}

TEST(Presets, UnknownName) { EXPECT_THROW(preset("resnet"), ConfigError); }

TEST(Assemble, DeterministicPerSeed) {
    for (const auto name : preset_names()) {
        const auto c = preset(name);
        EXPECT_EQ(assemble(c, 11).params, assemble(c, 11).params) << name;
        EXPECT_FALSE(assemble(c, 11).params == assemble(c, 12).params) << name;
    }
}

TEST(Assemble, FanInUniformBoundsAndNormInit) {
    const auto c = preset("transformer");
    const auto ab = assemble(c, 3);
    for (const auto& spec : param_specs(c)) {
        const Tensor& t = ab.params.get(spec.name);
        if (spec.name.ends_with("gamma")) {
            for (double v : t.data()) EXPECT_EQ(v, 1.0);
        } else if (spec.name.ends_with("beta")) {
            for (double v : t.data()) EXPECT_EQ(v, 0.0);
        } else {
            const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
            for (double v : t.data()) EXPECT_LE(std::abs(v), bound);
        }
    }
}

TEST(Config, ConflictingFieldsAreNamed) {
    auto c = preset("cat");
    c.residual1 = true;
    try {
        c.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("residual1"), std::string::npos);
    }
    auto s = preset("squeeze_excite");
    s.interaction = mixers::InteractionKind::none;
    EXPECT_THROW(s.validate(), ConfigError);
    auto t = preset("transformer");
    t.spatial = mixers::MultiHeadAttention{3};
    EXPECT_THROW(t.validate(), ConfigError);
    EXPECT_THROW(assemble(t, 1), ConfigError);
}

TEST(Config, JsonRoundTripAllPresets) {
    for (const auto name : preset_names()) {
        const auto c = preset(name);
        EXPECT_EQ(config_from_json(json::parse(to_json(c).dump())), c) << name;
    }
}

TEST(Config, RejectsUnknownKeys) {
    json doc = to_json(preset("transformer"));
    doc["dropout"] = 0.1;
    EXPECT_THROW(config_from_json(doc), ConfigError);
    json nested = to_json(preset("transformer"));
    nested["spatial"]["window"] = 7;
    EXPECT_THROW(config_from_json(nested), ConfigError);
}

TEST(Forward, ShapeAndLayouts) {
    const auto ab = assemble(preset("fnet"), 5);
    Rng rng(6);
    const Tensor flat = rng.normal({16, 8});
    const Tensor cube = flat.reshape({4, 4, 8});
    const Tensor a = forward(ab.block, ab.params, flat);
    const Tensor b = forward(ab.block, ab.params, cube);
    EXPECT_EQ(a.shape(), flat.shape());
    EXPECT_EQ(b.shape(), cube.shape());
    EXPECT_EQ(max_abs_diff(a, b.reshape({16, 8})), 0.0);
    EXPECT_THROW(forward(ab.block, ab.params, rng.normal({15, 8})), DimensionError);
}

TEST(Forward, CatAveragingKernelIdentityPointwise) {
    const auto c = preset("cat");
    BlockParams p;
    p.add("spatial.kernel", Tensor::full({4, 4, 8}, 1.0 / 16.0));
    p.add("spatial.bias", Tensor({8}));
    p.add("channel.w", Tensor::identity(8));
    p.add("channel.b", Tensor({8}));
    Rng rng(7);
    const Tensor x = rng.normal({16, 8});
    const Tensor mean = ops::mean_rows(x);
    const Tensor expected = ops::hadamard(x, ops::broadcast_vector(mean.reshape({8}), 16, 1).reshape({16, 8}));
    EXPECT_LE(max_abs_diff(forward(Block{c}, p, x), expected), 1e-15);
}

TEST(Forward, SqueezeExciteZeroGateHalvesInput) {
    const auto c = preset("squeeze_excite");
    BlockParams p;
    for (const auto& s : param_specs(c)) p.add(s.name, Tensor(s.shape));
    Rng rng(8);
    const Tensor x = rng.normal({16, 8});
    const Tensor out = forward(Block{c}, p, x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(out[i], 0.5 * x[i]);
}

TEST(Forward, TransformerMatchesReferenceLayer) {
    const auto ab = assemble(preset("transformer"), 9);
    Rng rng(10);
    const Tensor x = rng.normal({16, 8});
    EXPECT_LE(max_abs_diff(forward(ab.block, ab.params, x),
                           blocks::transformer_encoder_layer(x, ab.params, 2, 16)),
              1e-10);
}

TEST(Forward, MissingParameterNamed) {
    auto ab = assemble(preset("cat"), 1);
    BlockParams partial;
    partial.add("spatial.kernel", ab.params.get("spatial.kernel"));
    try {
        forward(ab.block, partial, Tensor({16, 8}));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("spatial.bias"), std::string::npos);
    }
}

TEST(Equivalence, AllReferencePresetsWithinTolerance) {
    for (const auto name : reference_presets()) {
        const auto r = check_equivalence(name, 20, 77);
        EXPECT_EQ(r.trials, 20u);
        EXPECT_LE(r.max_deviation, 1e-10) << name;
    }
}

TEST(Equivalence, RandomDimsStayInRange) {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto d = random_dims(s);
        EXPECT_LE(d.shape.n(), 16u);
        EXPECT_LE(d.d, 8u);
        EXPECT_EQ(d.d % d.heads, 0u);
        EXPECT_EQ(d.d % d.se_reduction, 0u);
    }
    EXPECT_THROW(check_equivalence("metaformer", 1, 1), ConfigError);
}

#include <gtest/gtest.h>

#include <cmath>

#include "gformer/blocks.hpp"
#include "gformer/errors.hpp"
#include "gformer/gformer.hpp"
#include "gformer/init.hpp"
#include "gformer/ops.hpp"
#include "gformer/taff.hpp"
#include "oracles.hpp"

using namespace gformer;

namespace {

BlockParams random_params(const GFormerConfig& c, Rng& rng, double stddev = 1.0) {
    BlockParams p;
    for (const auto& s : param_specs(c)) p.add(s.name, rng.normal(s.shape, stddev));
    return p;
}

BlockParams zero_params(const GFormerConfig& c) {
    BlockParams p;
    for (const auto& s : param_specs(c))
        p.add(s.name, s.name.ends_with("gamma") ? Tensor::ones(s.shape) : Tensor(s.shape));
    return p;
}

PresetDims dims(std::size_t h, std::size_t w, std::size_t d) {
    PresetDims out;
    out.shape = {h, w};
    out.d = d;
    out.heads = 1;
    out.ffn_hidden = 3;
    out.token_hidden = 3;
    out.se_reduction = 2;
    return out;
}

}  // namespace

TEST(CatBlock, OnesWithAveragingKernel) {
    BlockParams p;
    p.add("spatial.kernel", Tensor::full({2, 3, 2}, 1.0 / 6.0));
    p.add("spatial.bias", Tensor({2}));
    p.add("channel.w", Tensor::identity(2));
    p.add("channel.b", Tensor({2}));
    const Tensor out = blocks::cat_block(Tensor::ones({2, 3, 2}), p);
    for (double v : out.data()) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(CatBlock, ZeroPointwiseAnnihilates) {
    Rng rng(1);
    BlockParams p;
    p.add("spatial.kernel", rng.normal({2, 2, 3}));
    p.add("spatial.bias", rng.normal({3}));
    p.add("channel.w", Tensor({3, 3}));
    p.add("channel.b", Tensor({3}));
    const Tensor out = blocks::cat_block(rng.normal({2, 2, 3}), p);
    for (double v : out.data()) EXPECT_EQ(v, 0.0);
}

TEST(CatBlock, LoopOracleTwoByTwoByTwo) {
    Rng rng(2);
    const Tensor x = rng.normal({2, 2, 2}), k = rng.normal({2, 2, 2}), kb = rng.normal({2});
    const Tensor w = rng.normal({2, 2}), b = rng.normal({2});
    BlockParams p;
    p.add("spatial.kernel", k);
    p.add("spatial.bias", kb);
    p.add("channel.w", w);
    p.add("channel.b", b);
    // Step 1: depthwise then pointwise. Step 2: repeat. Step 3: product.
    double global[2];
    for (int o = 0; o < 2; ++o) {
        global[o] = b[o];
        for (int c = 0; c < 2; ++c) {
            double s = kb[c];
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) s += x.at(i, j, c) * k.at(i, j, c);
            global[o] += s * w.at(c, o);
        }
    }
    const Tensor out = blocks::cat_block(x, p);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int c = 0; c < 2; ++c) EXPECT_NEAR(out.at(i, j, c), x.at(i, j, c) * global[c], 1e-14);
}

TEST(CatBlock, ShapeMismatch) {
    BlockParams p;
    p.add("spatial.kernel", Tensor({2, 2, 2}));
    p.add("spatial.bias", Tensor({2}));
    p.add("channel.w", Tensor({2, 2}));
    p.add("channel.b", Tensor({2}));
    EXPECT_THROW(blocks::cat_block(Tensor({3, 2, 2}), p), DimensionError);
}

TEST(TransformerLayer, ZeroWeightsIsIdentity) {
    const auto c = preset("transformer", dims(3, 1, 4));
    Rng rng(3);
    const Tensor x = rng.normal({3, 4});
    EXPECT_EQ(max_abs_diff(blocks::transformer_encoder_layer(x, zero_params(c), 1, 3), x), 0.0);
}

TEST(TransformerLayer, PermutationEquivariant) {
    auto d = dims(5, 1, 4);
    d.heads = 2;
    const auto c = preset("transformer", d);
    Rng rng(4);
    const auto p = random_params(c, rng, 0.5);
    const Tensor x = rng.normal({5, 4});
    const Tensor y = blocks::transformer_encoder_layer(x, p, 2, 3);
    const auto perm = rng.permutation(5);
    EXPECT_LE(max_abs_diff(blocks::transformer_encoder_layer(taff::permute_rows(x, perm), p, 2, 3),
                           taff::permute_rows(y, perm)),
              1e-12);
}

TEST(TransformerLayer, TwoTokenOracle) {
    const auto c = preset("transformer", dims(2, 1, 2));
    Rng rng(5);
    const auto p = random_params(c, rng);
    const Tensor x = rng.normal({2, 2});
    const Tensor mid = ops::add(
        x, oracle::attention(oracle::layer_norm(x, p.get("norm1.gamma"), p.get("norm1.beta"), 1e-5), p, 1));
    const Tensor hidden = oracle::swish(oracle::dense(
        oracle::layer_norm(mid, p.get("norm2.gamma"), p.get("norm2.beta"), 1e-5), p.get("channel.w1"),
        p.get("channel.b1")));
    const Tensor expected = ops::add(mid, oracle::dense(hidden, p.get("channel.w2"), p.get("channel.b2")));
    EXPECT_LE(max_abs_diff(blocks::transformer_encoder_layer(x, p, 1, 3), expected), 1e-13);
}

TEST(TransformerLayer, ConfigMismatch) {
    const auto c = preset("transformer", dims(2, 1, 4));
    Rng rng(6);
    const auto p = random_params(c, rng);
    EXPECT_THROW(blocks::transformer_encoder_layer(rng.normal({2, 4}), p, 3, 3), ConfigError);
    EXPECT_THROW(blocks::transformer_encoder_layer(rng.normal({2, 4}), p, 1, 5), ConfigError);
}

TEST(SqueezeExcite, ZeroGateIsHalf) {
    const auto c = preset("squeeze_excite", dims(2, 2, 4));
    Rng rng(7);
    const Tensor x = rng.normal({2, 2, 4});
    const Tensor out = blocks::squeeze_excite_block(x, zero_params(c), 2);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(out[i], 0.5 * x[i]);
}

TEST(SqueezeExcite, ConstantPerChannelClosedForm) {
    const auto c = preset("squeeze_excite", dims(2, 3, 4));
    Rng rng(8);
    const auto p = random_params(c, rng);
    const double chan[4] = {0.5, -1.0, 2.0, 0.25};
    std::vector<double> xs;
    for (int i = 0; i < 6; ++i) xs.insert(xs.end(), chan, chan + 4);
    const Tensor x({2, 3, 4}, xs);
    const Tensor& w1 = p.get("channel.w1");
    const Tensor& b1 = p.get("channel.b1");
    const Tensor& w2 = p.get("channel.w2");
    const Tensor& b2 = p.get("channel.b2");
    double h[2];
    for (int j = 0; j < 2; ++j) {
        h[j] = b1[j];
        for (int k = 0; k < 4; ++k) h[j] += chan[k] * w1.at(k, j);
        h[j] = std::max(h[j], 0.0);
    }
    const Tensor out = blocks::squeeze_excite_block(x, p, 2);
    for (int k = 0; k < 4; ++k) {
        const double gate = 1.0 / (1.0 + std::exp(-(b2[k] + h[0] * w2.at(0, k) + h[1] * w2.at(1, k))));
        EXPECT_NEAR(out.at(1, 2, k), chan[k] * gate, 1e-15);
    }
}

TEST(SqueezeExcite, NegativeSaturation) {
    const auto c = preset("squeeze_excite", dims(2, 2, 4));
    auto p = zero_params(c);
    p.set("channel.b2", Tensor::full({4}, -50.0));
    Rng rng(9);
    const Tensor x = rng.normal({2, 2, 4});
    const Tensor out = blocks::squeeze_excite_block(x, p, 2);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LE(std::abs(out[i]), std::abs(x[i]) * 2e-22);
}

TEST(MlpMixer, ZeroWeightsIsIdentity) {
    const auto c = preset("mlp_mixer", dims(3, 2, 4));
    Rng rng(10);
    const Tensor x = rng.normal({6, 4});
    EXPECT_EQ(max_abs_diff(blocks::mlp_mixer_block(x, zero_params(c)), x), 0.0);
}

TEST(MlpMixer, SingleTokenZeroInputWeights) {
    const auto c = preset("mlp_mixer", dims(1, 1, 4));
    Rng rng(11);
    auto p = zero_params(c);
    p.set("spatial.b1", rng.normal({3}));
    p.set("spatial.w2", rng.normal({3, 1}));
    p.set("spatial.b2", rng.normal({1}));
    const Tensor x = rng.normal({1, 4});
    const Tensor out = blocks::mlp_mixer_block(x, p);
    // With spatial.w1 = 0 the token MLP emits one constant shared by every channel.
    double token = p.get("spatial.b2")[0];
    for (int j = 0; j < 3; ++j) {
        const double a = p.get("spatial.b1")[j];
        token += a / (1.0 + std::exp(-a)) * p.get("spatial.w2")[j];
    }
    for (int c2 = 0; c2 < 4; ++c2) EXPECT_NEAR(out[c2], x[c2] + token, 1e-14);
}

TEST(MlpMixer, ComposedOracleThreeByTwo) {
    const auto c = preset("mlp_mixer", dims(3, 1, 2));
    Rng rng(12);
    const auto p = random_params(c, rng);
    const Tensor x = rng.normal({3, 2});
    const Tensor a = oracle::layer_norm(x, p.get("norm1.gamma"), p.get("norm1.beta"), 1e-5);
    const Tensor tok = oracle::dense(
        oracle::swish(oracle::dense(ops::transpose(a), p.get("spatial.w1"), p.get("spatial.b1"))),
        p.get("spatial.w2"), p.get("spatial.b2"));
    const Tensor u = ops::add(x, ops::transpose(tok));
    const Tensor b = oracle::layer_norm(u, p.get("norm2.gamma"), p.get("norm2.beta"), 1e-5);
    const Tensor ch = oracle::dense(oracle::swish(oracle::dense(b, p.get("channel.w1"), p.get("channel.b1"))),
                                    p.get("channel.w2"), p.get("channel.b2"));
    EXPECT_LE(max_abs_diff(blocks::mlp_mixer_block(x, p), ops::add(u, ch)), 1e-13);
}

TEST(FNet, ZerosAndUnitMixing) {
    EXPECT_EQ(max_abs_diff(ops::dft2_real(Tensor({3, 2})), Tensor({3, 2})), 0.0);
    const auto c = preset("fnet", dims(1, 1, 1));
    Rng rng(13);
    const auto p = random_params(c, rng);
    const Tensor x = rng.normal({1, 1});
    const Tensor a = oracle::layer_norm(x, p.get("norm1.gamma"), p.get("norm1.beta"), 1e-5);
    const Tensor u = ops::add(x, a);  // size-one mixing is the identity
    const Tensor b = oracle::layer_norm(u, p.get("norm2.gamma"), p.get("norm2.beta"), 1e-5);
    const Tensor ch = oracle::dense(oracle::swish(oracle::dense(b, p.get("channel.w1"), p.get("channel.b1"))),
                                    p.get("channel.w2"), p.get("channel.b2"));
    EXPECT_LE(max_abs_diff(blocks::fnet_block(x, p), ops::add(u, ch)), 1e-14);
}

TEST(FNet, DftOracleComposition) {
    const auto c = preset("fnet", dims(4, 1, 2));
    Rng rng(14);
    const auto p = random_params(c, rng);
    const Tensor x = rng.normal({4, 2});
    const Tensor a = oracle::layer_norm(x, p.get("norm1.gamma"), p.get("norm1.beta"), 1e-5);
    const Tensor u = ops::add(x, oracle::dft2_real(a));
    const Tensor b = oracle::layer_norm(u, p.get("norm2.gamma"), p.get("norm2.beta"), 1e-5);
    const Tensor ch = oracle::dense(oracle::swish(oracle::dense(b, p.get("channel.w1"), p.get("channel.b1"))),
                                    p.get("channel.w2"), p.get("channel.b2"));
    EXPECT_LE(max_abs_diff(blocks::fnet_block(x, p), ops::add(u, ch)), 1e-12);
}

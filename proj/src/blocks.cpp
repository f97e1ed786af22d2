#include "gformer/blocks.hpp"

#include <cmath>

#include "gformer/config.hpp"

namespace gformer::blocks {

namespace {

const ag::Var& checked(const ag::VarMap& params, const std::string& name, const Shape& shape) {
    const ag::Var& v = params.get(name);
    if (v.shape() != shape)
        throw DimensionError("parameter " + name + " has shape " + shape_str(v.shape()) +
                             ", block needs " + shape_str(shape));
    return v;
}

void require_rank(const ag::Var& x, std::size_t rank, const char* block) {
    if (x.shape().size() != rank)
        throw DimensionError(std::string(block) + ": input rank " + std::to_string(rank) +
                             " expected, got " + shape_str(x.shape()));
}

ag::Var vector_slice(const ag::Var& v, std::size_t start, std::size_t count) {
    const std::size_t d = v.value().size();
    return ag::reshape(ag::slice_cols(ag::reshape(v, {1, d}), start, count), {count});
}

ag::Var row_slice(const ag::Var& m, std::size_t start, std::size_t count) {
    return ag::transpose(ag::slice_cols(ag::transpose(m), start, count));
}

ag::Var norm(const ag::VarMap& p, const ag::Var& x, const char* which, std::size_t d) {
    const std::string pre(which);
    return ag::layer_norm(x, checked(p, pre + ".gamma", {d}), checked(p, pre + ".beta", {d}),
                          kLayerNormEps);
}

// FFN over rows of x, hidden width read from channel.w1.
ag::Var feed_forward(const ag::VarMap& p, const ag::Var& x, std::size_t d) {
    const ag::Var& w1 = p.get("channel.w1");
    if (w1.shape().size() != 2 || w1.shape()[0] != d)
        throw DimensionError("channel.w1 must be [d, hidden], got " + shape_str(w1.shape()));
    const std::size_t hidden = w1.shape()[1];
    const ag::Var h = ag::swish(ag::add_bias(ag::matmul(x, w1), checked(p, "channel.b1", {hidden})));
    return ag::add_bias(ag::matmul(h, checked(p, "channel.w2", {hidden, d})),
                        checked(p, "channel.b2", {d}));
}

// Per-head projections use column slices of the weight matrices; the output
// projection is accumulated head by head from row slices of Wo.
ag::Var attention(const ag::VarMap& p, const ag::Var& x, std::size_t d, std::size_t heads) {
    const std::size_t dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const ag::Var& wq = checked(p, "spatial.wq", {d, d});
    const ag::Var& wk = checked(p, "spatial.wk", {d, d});
    const ag::Var& wv = checked(p, "spatial.wv", {d, d});
    const ag::Var& wo = checked(p, "spatial.wo", {d, d});
    const ag::Var& bq = checked(p, "spatial.bq", {d});
    const ag::Var& bk = checked(p, "spatial.bk", {d});
    const ag::Var& bv = checked(p, "spatial.bv", {d});
    const ag::Var& bo = checked(p, "spatial.bo", {d});

    ag::Var acc;
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = h * dh;
        const ag::Var q = ag::add_bias(ag::matmul(x, ag::slice_cols(wq, off, dh)), vector_slice(bq, off, dh));
        const ag::Var k = ag::add_bias(ag::matmul(x, ag::slice_cols(wk, off, dh)), vector_slice(bk, off, dh));
        const ag::Var v = ag::add_bias(ag::matmul(x, ag::slice_cols(wv, off, dh)), vector_slice(bv, off, dh));
        const ag::Var weights = ag::softmax(ag::scale(ag::matmul(q, ag::transpose(k)), scale), 1);
        const ag::Var contribution = ag::matmul(ag::matmul(weights, v), row_slice(wo, off, dh));
        acc = h == 0 ? contribution : ag::add(acc, contribution);
    }
    return ag::add_bias(acc, bo);
}

template <typename F>
Tensor eval(F&& f) {
    ag::NoGradGuard guard;
    return f().value();
}

}  // namespace

ag::Var cat_block(const ag::Var& x, const ag::VarMap& p) {
    require_rank(x, 3, "cat_block");
    const std::size_t h = x.shape()[0], w = x.shape()[1], d = x.shape()[2];
    // Step 1: depthwise-separable filter yields the global vector.
    const ag::Var global = ag::pointwise_conv(
        ag::depthwise_conv_full(x, checked(p, "spatial.kernel", {h, w, d}),
                                checked(p, "spatial.bias", {d})),
        checked(p, "channel.w", {d, d}), checked(p, "channel.b", {d}));
    // Step 2: repeat it to (H, W, D). Step 3: elementwise product with x.
    return ag::hadamard(x, ag::broadcast_vector(global, h, w));
}

Tensor cat_block(const Tensor& x, const BlockParams& params) {
    return eval([&] { return cat_block(ag::constant(x), ag::VarMap::bind(params, false)); });
}

ag::Var transformer_encoder_layer(const ag::Var& x, const ag::VarMap& p, std::size_t heads,
                                  std::size_t ffn_hidden) {
    require_rank(x, 2, "transformer_encoder_layer");
    const std::size_t d = x.shape()[1];
    if (heads == 0 || d % heads != 0)
        throw ConfigError("transformer_encoder_layer: heads (" + std::to_string(heads) +
                          ") does not divide d (" + std::to_string(d) + ")");
    if (p.get("channel.w1").shape() != Shape{d, ffn_hidden})
        throw ConfigError("transformer_encoder_layer: channel.w1 is " +
                          shape_str(p.get("channel.w1").shape()) + ", ffn_hidden=" +
                          std::to_string(ffn_hidden) + " needs [" + std::to_string(d) + "x" +
                          std::to_string(ffn_hidden) + "]");
    const ag::Var mid = ag::add(x, attention(p, norm(p, x, "norm1", d), d, heads));
    return ag::add(mid, feed_forward(p, norm(p, mid, "norm2", d), d));
}

Tensor transformer_encoder_layer(const Tensor& x, const BlockParams& params, std::size_t heads,
                                 std::size_t ffn_hidden) {
    return eval([&] {
        return transformer_encoder_layer(ag::constant(x), ag::VarMap::bind(params, false), heads,
                                         ffn_hidden);
    });
}

ag::Var squeeze_excite_block(const ag::Var& x, const ag::VarMap& p, std::size_t reduction) {
    require_rank(x, 3, "squeeze_excite_block");
    const std::size_t h = x.shape()[0], w = x.shape()[1], c = x.shape()[2];
    if (reduction == 0 || c % reduction != 0)
        throw DimensionError("squeeze_excite_block: reduction " + std::to_string(reduction) +
                             " does not divide C=" + std::to_string(c));
    const std::size_t r = c / reduction;
    const ag::Var squeezed = ag::mean_rows(ag::reshape(x, {h * w, c}));
    const ag::Var hidden = ag::relu(ag::add_bias(ag::matmul(squeezed, checked(p, "channel.w1", {c, r})),
                                                 checked(p, "channel.b1", {r})));
    const ag::Var gate = ag::sigmoid(ag::add_bias(ag::matmul(hidden, checked(p, "channel.w2", {r, c})),
                                                  checked(p, "channel.b2", {c})));
    return ag::hadamard(x, ag::broadcast_vector(ag::reshape(gate, {c}), h, w));
}

Tensor squeeze_excite_block(const Tensor& x, const BlockParams& params, std::size_t reduction) {
    return eval([&] {
        return squeeze_excite_block(ag::constant(x), ag::VarMap::bind(params, false), reduction);
    });
}

ag::Var mlp_mixer_block(const ag::Var& x, const ag::VarMap& p) {
    require_rank(x, 2, "mlp_mixer_block");
    const std::size_t n = x.shape()[0], d = x.shape()[1];
    const ag::Var& w1 = p.get("spatial.w1");
    if (w1.shape().size() != 2 || w1.shape()[0] != n)
        throw DimensionError("spatial.w1 must be [n, hidden], got " + shape_str(w1.shape()));
    const std::size_t hidden = w1.shape()[1];
    // Token mixing acts on columns: each channel's length-n sequence is one row.
    const ag::Var columns = ag::transpose(norm(p, x, "norm1", d));
    const ag::Var t = ag::swish(ag::add_bias(ag::matmul(columns, w1), checked(p, "spatial.b1", {hidden})));
    const ag::Var mixed = ag::add_bias(ag::matmul(t, checked(p, "spatial.w2", {hidden, n})),
                                       checked(p, "spatial.b2", {n}));
    const ag::Var mid = ag::add(x, ag::transpose(mixed));
    return ag::add(mid, feed_forward(p, norm(p, mid, "norm2", d), d));
}

Tensor mlp_mixer_block(const Tensor& x, const BlockParams& params) {
    return eval([&] { return mlp_mixer_block(ag::constant(x), ag::VarMap::bind(params, false)); });
}

ag::Var fnet_block(const ag::Var& x, const ag::VarMap& p) {
    require_rank(x, 2, "fnet_block");
    const std::size_t d = x.shape()[1];
    const ag::Var mid = ag::add(x, ag::dft2_real(norm(p, x, "norm1", d)));
    return ag::add(mid, feed_forward(p, norm(p, mid, "norm2", d), d));
}

Tensor fnet_block(const Tensor& x, const BlockParams& params) {
    return eval([&] { return fnet_block(ag::constant(x), ag::VarMap::bind(params, false)); });
}

}  // namespace gformer::blocks

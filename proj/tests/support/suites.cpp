#include "suites.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gformer/autograd.hpp"
#include "gformer/gformer.hpp"
#include "gformer/init.hpp"
#include "gformer/ops.hpp"
#include "gformer/taff.hpp"

namespace suites {

using gformer::Rng;
using gformer::Shape;
using gformer::Tensor;
namespace ag = gformer::ag;
using Leaves = std::vector<std::pair<std::string, Tensor>>;

namespace {

// Values bounded away from the ReLU kink so central differences never straddle it.
Tensor off_kink(Rng& rng, Shape shape) {
    const Tensor u = rng.uniform(shape, -1.0, 1.0);
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = (u[i] < 0 ? -0.1 : 0.1) + u[i];
    return Tensor(std::move(shape), std::move(v));
}

gformer::GradCheckReport check_op(gformer::ops::Op op, Rng& rng, std::uint64_t probe) {
    using gformer::ops::Op;
    auto dim = [&](std::size_t lo, std::size_t hi) { return lo + rng.index(hi - lo + 1); };
    const std::size_t m = dim(1, 4), k = dim(1, 4);
    Leaves leaves;
    gformer::Differentiable f;
    switch (op) {
        case Op::matmul: {
            const std::size_t p = dim(1, 4);
            leaves = {{"a", rng.normal({m, k})}, {"b", rng.normal({k, p})}};
            f = [](auto v) { return ag::matmul(v[0], v[1]); };
            break;
        }
        case Op::softmax: {
            const std::size_t axis = rng.index(2);
            leaves = {{"x", rng.normal({m, k})}};
            f = [axis](auto v) { return ag::softmax(v[0], axis); };
            break;
        }
        case Op::layer_norm: {
            const std::size_t d = dim(2, 5);
            leaves = {{"x", rng.normal({m, d})}, {"gamma", rng.normal({d})}, {"beta", rng.normal({d})}};
            f = [](auto v) { return ag::layer_norm(v[0], v[1], v[2], 1e-5); };
            break;
        }
        case Op::depthwise_conv_full: {
            const std::size_t h = dim(1, 3), w = dim(1, 3);
            leaves = {{"x", rng.normal({h, w, k})},
                      {"kernel", rng.normal({h, w, k})},
                      {"bias", rng.normal({k})}};
            f = [](auto v) { return ag::depthwise_conv_full(v[0], v[1], v[2]); };
            break;
        }
        case Op::pointwise_conv: {
            const std::size_t h = dim(1, 3), co = dim(1, 4);
            leaves = {{"x", rng.normal({h, m, k})},
                      {"w", rng.normal({k, co})},
                      {"b", rng.normal({co})}};
            f = [](auto v) { return ag::pointwise_conv(v[0], v[1], v[2]); };
            break;
        }
        case Op::hadamard:
            leaves = {{"x", rng.normal({m, k})}, {"y", rng.normal({m, k})}};
            f = [](auto v) { return ag::hadamard(v[0], v[1]); };
            break;
        case Op::broadcast_vector: {
            const std::size_t h = dim(1, 3), w = dim(1, 3);
            leaves = {{"v", rng.normal({k})}};
            f = [h, w](auto v) { return ag::broadcast_vector(v[0], h, w); };
            break;
        }
        case Op::scale_rows:
            leaves = {{"x", rng.normal({m, k})}, {"v", rng.normal({k})}};
            f = [](auto v) { return ag::scale_rows(v[0], v[1]); };
            break;
        case Op::dft2_real:
            leaves = {{"x", rng.normal({dim(1, 6), dim(1, 6)})}};
            f = [](auto v) { return ag::dft2_real(v[0]); };
            break;
        case Op::relu:
            leaves = {{"x", off_kink(rng, {m, k})}};
            f = [](auto v) { return ag::relu(v[0]); };
            break;
        case Op::sigmoid:
            leaves = {{"x", rng.normal({m, k}, 2.0)}};
            f = [](auto v) { return ag::sigmoid(v[0]); };
            break;
        case Op::swish:
            leaves = {{"x", rng.normal({m, k}, 2.0)}};
            f = [](auto v) { return ag::swish(v[0]); };
            break;
        case Op::add:
            leaves = {{"x", rng.normal({m, k})}, {"y", rng.normal({m, k})}};
            f = [](auto v) { return ag::add(v[0], v[1]); };
            break;
        case Op::add_bias:
            leaves = {{"x", rng.normal({m, k})}, {"b", rng.normal({k})}};
            f = [](auto v) { return ag::add_bias(v[0], v[1]); };
            break;
        case Op::scale: {
            const double s = rng.uniform({1}, -2.0, 2.0)[0];
            leaves = {{"x", rng.normal({m, k})}};
            f = [s](auto v) { return ag::scale(v[0], s); };
            break;
        }
        case Op::transpose:
            leaves = {{"x", rng.normal({m, k})}};
            f = [](auto v) { return ag::transpose(v[0]); };
            break;
        case Op::reshape:
            leaves = {{"x", rng.normal({m, k})}};
            f = [m, k](auto v) { return ag::reshape(v[0], {k, m}); };
            break;
        case Op::slice_cols: {
            const std::size_t start = rng.index(k), count = 1 + rng.index(k - start);
            leaves = {{"x", rng.normal({m, k})}};
            f = [start, count](auto v) { return ag::slice_cols(v[0], start, count); };
            break;
        }
        case Op::concat_cols:
            leaves = {{"a", rng.normal({m, k})}, {"b", rng.normal({m, dim(1, 3)})}};
            f = [](auto v) { return ag::concat_cols(v); };
            break;
        case Op::concat_rows:
            leaves = {{"a", rng.normal({m, k})}, {"b", rng.normal({dim(1, 3), k})}};
            f = [](auto v) { return ag::concat_rows(v); };
            break;
        case Op::repeat_rows: {
            const std::size_t t = dim(1, 3);
            leaves = {{"x", rng.normal({m, k})}};
            f = [t](auto v) { return ag::repeat_rows(v[0], t); };
            break;
        }
        case Op::tile_rows: {
            const std::size_t t = dim(1, 3);
            leaves = {{"x", rng.normal({m, k})}};
            f = [t](auto v) { return ag::tile_rows(v[0], t); };
            break;
        }
        case Op::mean_rows:
            leaves = {{"x", rng.normal({m, k})}};
            f = [](auto v) { return ag::mean_rows(v[0]); };
            break;
        case Op::sum_all:
            leaves = {{"x", rng.normal({m, k})}};
            f = [](auto v) { return ag::sum_all(v[0]); };
            break;
        case Op::cross_entropy: {
            const std::size_t classes = dim(2, 5), label = rng.index(classes);
            leaves = {{"logits", rng.normal({1, classes})}};
            f = [label](auto v) { return ag::cross_entropy(v[0], label); };
            break;
        }
    }
    return gformer::check_gradients(f, leaves, probe);
}

}  // namespace

std::vector<GradResult> primitive_gradients(std::size_t instances, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<GradResult> out;
    for (const auto op : gformer::ops::all_ops()) {
        GradResult r{std::string(gformer::ops::op_name(op)), 0.0};
        for (std::size_t i = 0; i < instances; ++i)
            r.max_rel_error = std::max(r.max_rel_error, check_op(op, rng, seed + i).max_rel_error());
        out.push_back(r);
    }
    return out;
}

std::vector<GradResult> preset_gradients(std::uint64_t seed) {
    gformer::PresetDims dims;
    dims.d = 4;
    dims.shape = {2, 3};
    dims.heads = 2;
    dims.ffn_hidden = 6;
    dims.token_hidden = 5;
    dims.se_reduction = 2;
    std::vector<GradResult> out;
    for (const auto name : gformer::preset_names()) {
        const auto ab = gformer::assemble(gformer::preset(name, dims), seed);
        Rng rng(seed + 1);
        const Tensor x = rng.normal({dims.shape.n(), dims.d});
        const auto report = gformer::check_block_gradients(
            [&](const ag::VarMap& p, const ag::Var& in) { return gformer::forward(ab.block, p, in); },
            ab.params, x, seed + 2);
        out.push_back({std::string(name), report.max_rel_error()});
    }
    return out;
}

GradResult taff_gradient(std::uint64_t seed) {
    const std::vector<gformer::SpatialShape> extents{{2, 2}, {1, 1}};
    const std::vector<std::size_t> channels{3, 2};
    const std::size_t anchors = 2, d = 4, heads = 2, ffn = 5;
    const auto pyramid = gformer::taff::random_pyramid(extents, channels, anchors, seed);
    const auto proj = gformer::taff::init_projection_params(channels, anchors, d, seed + 1);
    const auto enc = gformer::taff::init_encoder_params(d, ffn, seed + 2);

    Leaves leaves;
    for (std::size_t i = 0; i < pyramid.levels.size(); ++i)
        leaves.emplace_back("level." + std::to_string(i), pyramid.levels[i].map);
    for (const auto& [name, t] : proj) leaves.emplace_back(name, t);
    for (const auto& [name, t] : enc) leaves.emplace_back("encoder." + name, t);
    const std::size_t levels = pyramid.levels.size();
    const auto f = [&](std::span<const ag::Var> v) {
        ag::VarMap pm, em;
        std::size_t i = levels;
        for (const auto& [name, t] : proj) pm.add(name, v[i++]);
        for (const auto& [name, t] : enc) em.add(name, v[i++]);
        return gformer::taff::fuse(gformer::taff::gather(v.subspan(0, levels), anchors, pm, d), em, heads);
    };
    return {"taff", gformer::check_gradients(f, leaves, seed + 3).max_rel_error()};
}

}  // namespace suites

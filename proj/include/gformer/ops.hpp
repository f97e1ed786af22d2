#pragma once

// Forward primitives and their vector-Jacobian products.
//
// All functions are pure: inputs are never modified and results are fresh
// tensors. Each forward primitive reports its FLOPs to flops::record().

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "gformer/tensor.hpp"

namespace gformer::ops {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax(const Tensor& x, std::size_t axis);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);
// x, kernel: [H, W, C]; bias: [C]. Single valid output position -> [1, 1, C].
Tensor depthwise_conv_full(const Tensor& x, const Tensor& kernel, const Tensor& bias);
// x: [H, W, C]; weights: [C, C']; bias: [C'] -> [H, W, C']
Tensor pointwise_conv(const Tensor& x, const Tensor& weights, const Tensor& bias);
Tensor hadamard(const Tensor& x, const Tensor& y);
// v: [D] or [1, 1, D] -> [H, W, D]
Tensor broadcast_vector(const Tensor& v, std::size_t h, std::size_t w);
// Real part of the 2-D DFT of a real [n, d] matrix.
Tensor dft2_real(const Tensor& x);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor swish(const Tensor& x);

// Structural helpers used to compose blocks.
Tensor add(const Tensor& x, const Tensor& y);
Tensor add_bias(const Tensor& x, const Tensor& bias);  // bias over the last axis
// out[.., c] = x[.., c] * v[c]; hadamard with a broadcast row, never materialized.
Tensor scale_rows(const Tensor& x, const Tensor& v);
Tensor scale(const Tensor& x, double s);
Tensor transpose(const Tensor& x);
Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);
Tensor repeat_rows(const Tensor& x, std::size_t times);  // row r*times+a = x[r]
Tensor tile_rows(const Tensor& x, std::size_t times);    // x stacked `times` times
Tensor mean_rows(const Tensor& x);                       // [n, d] -> [1, d]
Tensor sum_all(const Tensor& x);                         // -> [1]
// Softmax cross-entropy of a single logit row [C] or [1, C] against a label.
Tensor cross_entropy(const Tensor& logits, std::size_t label);

enum class Op {
    matmul,
    softmax,
    layer_norm,
    depthwise_conv_full,
    pointwise_conv,
    hadamard,
    broadcast_vector,
    dft2_real,
    relu,
    sigmoid,
    swish,
    add,
    add_bias,
    scale_rows,
    scale,
    transpose,
    reshape,
    slice_cols,
    concat_cols,
    concat_rows,
    repeat_rows,
    tile_rows,
    mean_rows,
    sum_all,
    cross_entropy,
};

// Non-tensor operands of an op; only the fields an op uses are read.
struct OpAttrs {
    std::size_t axis = 0;
    double eps = 1e-5;
    double factor = 1.0;
    std::size_t h = 1;
    std::size_t w = 1;
    std::size_t start = 0;
    std::size_t count = 0;
    std::size_t label = 0;
    Shape shape;
};

std::string_view op_name(Op op) noexcept;
// Throws UnsupportedOpError for unknown names.
Op op_from_name(std::string_view name);
std::span<const Op> all_ops() noexcept;

// Evaluates op on inputs (forward dispatch by tag).
Tensor apply(Op op, std::span<const Tensor> inputs, const OpAttrs& attrs = {});

// Exact analytic VJP: one cotangent per input, each shaped like its input.
std::vector<Tensor> vjp(Op op, std::span<const Tensor> inputs, const Tensor& cotangent,
                        const OpAttrs& attrs = {});
std::vector<Tensor> vjp(std::string_view op, std::span<const Tensor> inputs,
                        const Tensor& cotangent, const OpAttrs& attrs = {});

}  // namespace gformer::ops

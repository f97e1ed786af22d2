#pragma once

// Loop-level oracles written independently of the library kernels. Each one
// evaluates its definition directly with nested loops over plain vectors.

#include <cstddef>
#include <vector>

#include "gformer/params.hpp"
#include "gformer/tensor.hpp"

namespace oracle {

using gformer::Tensor;

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps);
Tensor depthwise_full(const Tensor& x, const Tensor& kernel, const Tensor& bias);
Tensor pointwise(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor swish(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

// Re( sum_{k,l} x[k,l] exp(-2 pi i (j k / n + m l / d)) ) for every (j, m).
Tensor dft2_real(const Tensor& x);

// Multi-head self-attention from scalar loops; weights applied as x * W.
Tensor attention(const Tensor& x, const gformer::BlockParams& p, std::size_t heads,
                 const char* prefix = "spatial.");
// dense(x) = x * w + b on [n, k] rows.
Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b);

}  // namespace oracle

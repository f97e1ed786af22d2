#pragma once

// Standalone reference blocks, written directly against the tensor primitives.
// They read the same parameter names as the matching gFormer presets so both
// can be evaluated on one BlockParams, but share no dataflow code with them.

#include <cstddef>

#include "gformer/autograd.hpp"
#include "gformer/params.hpp"

namespace gformer::blocks {

// x: [H, W, D]. g = pointwise(depthwise_full(x)); x * broadcast(g).
// Params: spatial.kernel [H,W,D], spatial.bias [D], channel.w [D,D], channel.b [D].
ag::Var cat_block(const ag::Var& x, const ag::VarMap& params);
Tensor cat_block(const Tensor& x, const BlockParams& params);

// Pre-norm encoder: x + MHA(LN(x)), then + FFN(LN(.)) with FFN = dense -> swish -> dense.
// Params: norm1.*, spatial.{wq,bq,wk,bk,wv,bv,wo,bo}, norm2.*, channel.{w1,b1,w2,b2}.
ag::Var transformer_encoder_layer(const ag::Var& x, const ag::VarMap& params, std::size_t heads,
                                  std::size_t ffn_hidden);
Tensor transformer_encoder_layer(const Tensor& x, const BlockParams& params, std::size_t heads,
                                 std::size_t ffn_hidden);

// x: [H, W, C]. x * broadcast(sigmoid(W2 relu(W1 mean_HW(x)))).
ag::Var squeeze_excite_block(const ag::Var& x, const ag::VarMap& params, std::size_t reduction);
Tensor squeeze_excite_block(const Tensor& x, const BlockParams& params, std::size_t reduction);

// x: [n, d]. x + tokenMLP(LN(x)), then + channelMLP(LN(.)); swish in both MLPs.
ag::Var mlp_mixer_block(const ag::Var& x, const ag::VarMap& params);
Tensor mlp_mixer_block(const Tensor& x, const BlockParams& params);

// x: [n, d]. x + dft2_real(LN(x)), then + FFN(LN(.)).
ag::Var fnet_block(const ag::Var& x, const ag::VarMap& params);
Tensor fnet_block(const Tensor& x, const BlockParams& params);

}  // namespace gformer::blocks

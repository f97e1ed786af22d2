#pragma once

// Tape-free reverse-mode differentiation over the ops primitives.
//
// Each Var owns a node holding its value; when gradients are enabled and any
// input requires them, the node also keeps its inputs and the op tag so that
// backward() can walk the graph and call ops::vjp. Under NoGradGuard no graph
// is retained and intermediates are released as soon as they go out of scope.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gformer/ops.hpp"
#include "gformer/params.hpp"
#include "gformer/tensor.hpp"

namespace gformer::ag {

namespace detail {
struct Node;
}

class Var {
public:
    Var();
    explicit Var(Tensor value, bool requires_grad = false);

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    bool requires_grad() const;
    // Accumulated gradient; zeros when backward never reached this Var.
    Tensor grad() const;

private:
    friend Var record(ops::Op, std::span<const Var>, const ops::OpAttrs&);
    friend void backward(const Var&, const Tensor&);
    explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

    std::shared_ptr<detail::Node> node_;
};

inline Var constant(Tensor t) { return Var(std::move(t), false); }
inline Var parameter(Tensor t) { return Var(std::move(t), true); }

bool grad_enabled() noexcept;

class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

// Applies op and, if needed, links the result into the graph.
Var record(ops::Op op, std::span<const Var> inputs, const ops::OpAttrs& attrs = {});

// Seeds root with ones (root must hold a single element) or the given cotangent.
void backward(const Var& root);
void backward(const Var& root, const Tensor& seed);

Var matmul(const Var& a, const Var& b);
Var softmax(const Var& x, std::size_t axis);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps);
Var depthwise_conv_full(const Var& x, const Var& kernel, const Var& bias);
Var pointwise_conv(const Var& x, const Var& weights, const Var& bias);
Var hadamard(const Var& x, const Var& y);
Var broadcast_vector(const Var& v, std::size_t h, std::size_t w);
Var scale_rows(const Var& x, const Var& v);
Var dft2_real(const Var& x);
Var relu(const Var& x);
Var sigmoid(const Var& x);
Var swish(const Var& x);
Var add(const Var& x, const Var& y);
Var add_bias(const Var& x, const Var& bias);
Var scale(const Var& x, double s);
Var transpose(const Var& x);
Var reshape(const Var& x, Shape shape);
Var slice_cols(const Var& x, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var repeat_rows(const Var& x, std::size_t times);
Var tile_rows(const Var& x, std::size_t times);
Var mean_rows(const Var& x);
Var sum_all(const Var& x);
Var cross_entropy(const Var& logits, std::size_t label);

// x . w + b
inline Var dense(const Var& x, const Var& w, const Var& b) { return add_bias(matmul(x, w), b); }

/// BlockParams bound as graph leaves.
class VarMap {
public:
    VarMap() = default;
    static VarMap bind(const BlockParams& params, bool trainable);

    // Throws ConfigError naming the missing parameter.
    const Var& get(std::string_view name) const;
    bool contains(std::string_view name) const noexcept;
    void add(std::string name, Var v);

    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }
    std::size_t size() const noexcept { return entries_.size(); }

    // Gradients of every entry, in binding order.
    BlockParams grads() const;

private:
    std::vector<std::pair<std::string, Var>> entries_;
};

}  // namespace gformer::ag

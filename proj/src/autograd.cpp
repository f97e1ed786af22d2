#include "gformer/autograd.hpp"

#include <algorithm>
#include <unordered_set>

#include "gformer/kernels.hpp"

namespace gformer::ag {

namespace detail {

struct Node {
    Tensor value;
    bool requires_grad = false;
    ops::Op op = ops::Op::add;
    ops::OpAttrs attrs;
    std::vector<std::shared_ptr<Node>> inputs;
    std::vector<double> grad;  // empty until a cotangent arrives

    void accumulate(const Tensor& g) {
        if (grad.empty()) {
            grad.assign(g.data().begin(), g.data().end());
        } else {
            kernels::add(grad.data(), g.raw(), grad.data(), grad.size());
        }
    }
};

}  // namespace detail

namespace {
thread_local bool g_grad_enabled = true;
}

Var::Var() : node_(std::make_shared<detail::Node>()) {}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<detail::Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

const Tensor& Var::value() const { return node_->value; }
bool Var::requires_grad() const { return node_->requires_grad; }

Tensor Var::grad() const {
    if (node_->grad.empty()) return Tensor::zeros(node_->value.shape());
    return Tensor(node_->value.shape(), node_->grad);
}

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Var record(ops::Op op, std::span<const Var> inputs, const ops::OpAttrs& attrs) {
    std::vector<Tensor> values;
    values.reserve(inputs.size());
    for (const auto& v : inputs) values.push_back(v.value());
    auto node = std::make_shared<detail::Node>();
    node->value = ops::apply(op, values, attrs);
    const bool track = g_grad_enabled && std::any_of(inputs.begin(), inputs.end(),
                                                     [](const Var& v) { return v.requires_grad(); });
    if (track) {
        node->requires_grad = true;
        node->op = op;
        node->attrs = attrs;
        for (const auto& v : inputs) node->inputs.push_back(v.node_);
    }
    return Var(std::move(node));
}

void backward(const Var& root) {
    if (root.value().size() != 1)
        throw DimensionError("backward: implicit seed needs a single-element root, got " +
                             shape_str(root.shape()));
    backward(root, Tensor::ones(root.shape()));
}

void backward(const Var& root, const Tensor& seed) {
    if (!seed.same_shape(root.value()))
        throw DimensionError("backward: seed " + shape_str(seed.shape()) + " vs root " +
                             shape_str(root.shape()));
    if (!root.requires_grad()) return;

    // Iterative post-order DFS gives a topological order.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> seen;
    std::vector<std::pair<detail::Node*, std::size_t>> stack{{root.node_.get(), 0}};
    seen.insert(root.node_.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            detail::Node* child = node->inputs[next++].get();
            if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root.node_->accumulate(seed);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* node = *it;
        if (node->inputs.empty() || node->grad.empty()) continue;
        std::vector<Tensor> primals;
        primals.reserve(node->inputs.size());
        for (const auto& in : node->inputs) primals.push_back(in->value);
        const Tensor g(node->value.shape(), node->grad);
        const auto cotangents = ops::vjp(node->op, primals, g, node->attrs);
        for (std::size_t i = 0; i < node->inputs.size(); ++i)
            if (node->inputs[i]->requires_grad) node->inputs[i]->accumulate(cotangents[i]);
    }
}

namespace {

Var unary(ops::Op op, const Var& x, const ops::OpAttrs& attrs = {}) {
    const Var in[] = {x};
    return record(op, in, attrs);
}

Var binary(ops::Op op, const Var& a, const Var& b) {
    const Var in[] = {a, b};
    return record(op, in);
}

Var ternary(ops::Op op, const Var& a, const Var& b, const Var& c, const ops::OpAttrs& attrs = {}) {
    const Var in[] = {a, b, c};
    return record(op, in, attrs);
}

}  // namespace

Var matmul(const Var& a, const Var& b) { return binary(ops::Op::matmul, a, b); }

Var softmax(const Var& x, std::size_t axis) {
    ops::OpAttrs at;
    at.axis = axis;
    return unary(ops::Op::softmax, x, at);
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
    ops::OpAttrs at;
    at.eps = eps;
    return ternary(ops::Op::layer_norm, x, gamma, beta, at);
}

Var depthwise_conv_full(const Var& x, const Var& kernel, const Var& bias) {
    return ternary(ops::Op::depthwise_conv_full, x, kernel, bias);
}

Var pointwise_conv(const Var& x, const Var& weights, const Var& bias) {
    return ternary(ops::Op::pointwise_conv, x, weights, bias);
}

Var hadamard(const Var& x, const Var& y) { return binary(ops::Op::hadamard, x, y); }

Var broadcast_vector(const Var& v, std::size_t h, std::size_t w) {
    ops::OpAttrs at;
    at.h = h;
    at.w = w;
    return unary(ops::Op::broadcast_vector, v, at);
}

Var dft2_real(const Var& x) { return unary(ops::Op::dft2_real, x); }
Var relu(const Var& x) { return unary(ops::Op::relu, x); }
Var sigmoid(const Var& x) { return unary(ops::Op::sigmoid, x); }
Var swish(const Var& x) { return unary(ops::Op::swish, x); }
Var add(const Var& x, const Var& y) { return binary(ops::Op::add, x, y); }
Var add_bias(const Var& x, const Var& bias) { return binary(ops::Op::add_bias, x, bias); }
Var scale_rows(const Var& x, const Var& v) { return binary(ops::Op::scale_rows, x, v); }

Var scale(const Var& x, double s) {
    ops::OpAttrs at;
    at.factor = s;
    return unary(ops::Op::scale, x, at);
}

Var transpose(const Var& x) { return unary(ops::Op::transpose, x); }

Var reshape(const Var& x, Shape shape) {
    ops::OpAttrs at;
    at.shape = std::move(shape);
    return unary(ops::Op::reshape, x, at);
}

Var slice_cols(const Var& x, std::size_t start, std::size_t count) {
    ops::OpAttrs at;
    at.start = start;
    at.count = count;
    return unary(ops::Op::slice_cols, x, at);
}

Var concat_cols(std::span<const Var> parts) { return record(ops::Op::concat_cols, parts); }
Var concat_rows(std::span<const Var> parts) { return record(ops::Op::concat_rows, parts); }

Var repeat_rows(const Var& x, std::size_t times) {
    ops::OpAttrs at;
    at.count = times;
    return unary(ops::Op::repeat_rows, x, at);
}

Var tile_rows(const Var& x, std::size_t times) {
    ops::OpAttrs at;
    at.count = times;
    return unary(ops::Op::tile_rows, x, at);
}

Var mean_rows(const Var& x) { return unary(ops::Op::mean_rows, x); }
Var sum_all(const Var& x) { return unary(ops::Op::sum_all, x); }

Var cross_entropy(const Var& logits, std::size_t label) {
    ops::OpAttrs at;
    at.label = label;
    return unary(ops::Op::cross_entropy, logits, at);
}

VarMap VarMap::bind(const BlockParams& params, bool trainable) {
    VarMap map;
    for (const auto& [name, t] : params) map.entries_.emplace_back(name, Var(t, trainable));
    return map;
}

const Var& VarMap::get(std::string_view name) const {
    for (const auto& [n, v] : entries_)
        if (n == name) return v;
    throw ConfigError("missing parameter: " + std::string(name));
}

bool VarMap::contains(std::string_view name) const noexcept {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const auto& e) { return e.first == name; });
}

void VarMap::add(std::string name, Var v) {
    if (contains(name)) throw ConfigError("duplicate parameter name: " + name);
    entries_.emplace_back(std::move(name), std::move(v));
}

BlockParams VarMap::grads() const {
    BlockParams out;
    for (const auto& [n, v] : entries_) out.add(n, v.grad());
    return out;
}

}  // namespace gformer::ag

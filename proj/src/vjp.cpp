#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "gformer/kernels.hpp"
#include "gformer/ops.hpp"

namespace gformer::ops {

namespace {

constexpr std::array kOps{
    std::pair{Op::matmul, std::string_view{"matmul"}},
    std::pair{Op::softmax, std::string_view{"softmax"}},
    std::pair{Op::layer_norm, std::string_view{"layer_norm"}},
    std::pair{Op::depthwise_conv_full, std::string_view{"depthwise_conv_full"}},
    std::pair{Op::pointwise_conv, std::string_view{"pointwise_conv"}},
    std::pair{Op::hadamard, std::string_view{"hadamard"}},
    std::pair{Op::broadcast_vector, std::string_view{"broadcast_vector"}},
    std::pair{Op::dft2_real, std::string_view{"dft2_real"}},
    std::pair{Op::relu, std::string_view{"relu"}},
    std::pair{Op::sigmoid, std::string_view{"sigmoid"}},
    std::pair{Op::swish, std::string_view{"swish"}},
    std::pair{Op::add, std::string_view{"add"}},
    std::pair{Op::add_bias, std::string_view{"add_bias"}},
    std::pair{Op::scale_rows, std::string_view{"scale_rows"}},
    std::pair{Op::scale, std::string_view{"scale"}},
    std::pair{Op::transpose, std::string_view{"transpose"}},
    std::pair{Op::reshape, std::string_view{"reshape"}},
    std::pair{Op::slice_cols, std::string_view{"slice_cols"}},
    std::pair{Op::concat_cols, std::string_view{"concat_cols"}},
    std::pair{Op::concat_rows, std::string_view{"concat_rows"}},
    std::pair{Op::repeat_rows, std::string_view{"repeat_rows"}},
    std::pair{Op::tile_rows, std::string_view{"tile_rows"}},
    std::pair{Op::mean_rows, std::string_view{"mean_rows"}},
    std::pair{Op::sum_all, std::string_view{"sum_all"}},
    std::pair{Op::cross_entropy, std::string_view{"cross_entropy"}},
};

constexpr auto kOpList = [] {
    std::array<Op, kOps.size()> list{};
    for (std::size_t i = 0; i < kOps.size(); ++i) list[i] = kOps[i].first;
    return list;
}();

void require_arity(Op op, std::span<const Tensor> inputs, std::size_t n) {
    if (inputs.size() != n) {
        throw DimensionError(std::string(op_name(op)) + ": expected " + std::to_string(n) +
                             " inputs, got " + std::to_string(inputs.size()));
    }
}

double sigmoid_scalar(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, F f) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return Tensor(a.shape(), std::move(out));
}

Tensor column_sums(const Tensor& g, std::size_t cols) {
    std::vector<double> out(cols);
    if (cols) kernels::col_sum(g.raw(), out.data(), g.size() / cols, cols);
    return Tensor({cols}, std::move(out));
}

std::vector<Tensor> layer_norm_vjp(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                                   const Tensor& g, double eps) {
    const std::size_t d = x.shape().back();
    const std::size_t rows = x.size() / d;
    std::vector<double> dx(x.size()), dgamma(d, 0.0), dbeta(d, 0.0);
    std::vector<double> xhat(d), dxhat(d);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = x.raw() + r * d;
        const double* grow = g.raw() + r * d;
        double mean = 0.0;
        for (std::size_t c = 0; c < d; ++c) mean += row[c];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t c = 0; c < d; ++c) var += (row[c] - mean) * (row[c] - mean);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + eps);
        double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            xhat[c] = (row[c] - mean) * inv;
            dxhat[c] = grow[c] * gamma[c];
            mean_dxhat += dxhat[c];
            mean_dxhat_xhat += dxhat[c] * xhat[c];
            dgamma[c] += grow[c] * xhat[c];
            dbeta[c] += grow[c];
        }
        mean_dxhat /= static_cast<double>(d);
        mean_dxhat_xhat /= static_cast<double>(d);
        for (std::size_t c = 0; c < d; ++c)
            dx[r * d + c] = inv * (dxhat[c] - mean_dxhat - xhat[c] * mean_dxhat_xhat);
    }
    return {Tensor(x.shape(), std::move(dx)), Tensor(gamma.shape(), std::move(dgamma)),
            Tensor(beta.shape(), std::move(dbeta))};
}

Tensor softmax_vjp(const Tensor& x, const Tensor& g, std::size_t axis) {
    const Tensor y = softmax(x, axis);
    const auto& s = x.shape();
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    const std::size_t len = s[axis];
    std::vector<double> dx(x.size());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * len * inner + i;
            double dot = 0.0;
            for (std::size_t j = 0; j < len; ++j) dot += g[base + j * inner] * y[base + j * inner];
            for (std::size_t j = 0; j < len; ++j)
                dx[base + j * inner] = y[base + j * inner] * (g[base + j * inner] - dot);
        }
    }
    return Tensor(s, std::move(dx));
}

}  // namespace

std::string_view op_name(Op op) noexcept {
    for (const auto& [o, name] : kOps)
        if (o == op) return name;
    return "unknown";
}

Op op_from_name(std::string_view name) {
    for (const auto& [o, n] : kOps)
        if (n == name) return o;
    throw UnsupportedOpError("unsupported op: " + std::string(name));
}

std::span<const Op> all_ops() noexcept { return kOpList; }

Tensor apply(Op op, std::span<const Tensor> in, const OpAttrs& at) {
    switch (op) {
        case Op::matmul: require_arity(op, in, 2); return matmul(in[0], in[1]);
        case Op::softmax: require_arity(op, in, 1); return softmax(in[0], at.axis);
        case Op::layer_norm: require_arity(op, in, 3); return layer_norm(in[0], in[1], in[2], at.eps);
        case Op::depthwise_conv_full:
            require_arity(op, in, 3);
            return depthwise_conv_full(in[0], in[1], in[2]);
        case Op::pointwise_conv: require_arity(op, in, 3); return pointwise_conv(in[0], in[1], in[2]);
        case Op::hadamard: require_arity(op, in, 2); return hadamard(in[0], in[1]);
        case Op::broadcast_vector: require_arity(op, in, 1); return broadcast_vector(in[0], at.h, at.w);
        case Op::dft2_real: require_arity(op, in, 1); return dft2_real(in[0]);
        case Op::relu: require_arity(op, in, 1); return relu(in[0]);
        case Op::sigmoid: require_arity(op, in, 1); return sigmoid(in[0]);
        case Op::swish: require_arity(op, in, 1); return swish(in[0]);
        case Op::add: require_arity(op, in, 2); return add(in[0], in[1]);
        case Op::add_bias: require_arity(op, in, 2); return add_bias(in[0], in[1]);
        case Op::scale_rows: require_arity(op, in, 2); return scale_rows(in[0], in[1]);
        case Op::scale: require_arity(op, in, 1); return scale(in[0], at.factor);
        case Op::transpose: require_arity(op, in, 1); return transpose(in[0]);
        case Op::reshape: require_arity(op, in, 1); return in[0].reshape(at.shape);
        case Op::slice_cols: require_arity(op, in, 1); return slice_cols(in[0], at.start, at.count);
        case Op::concat_cols: return concat_cols(in);
        case Op::concat_rows: return concat_rows(in);
        case Op::repeat_rows: require_arity(op, in, 1); return repeat_rows(in[0], at.count);
        case Op::tile_rows: require_arity(op, in, 1); return tile_rows(in[0], at.count);
        case Op::mean_rows: require_arity(op, in, 1); return mean_rows(in[0]);
        case Op::sum_all: require_arity(op, in, 1); return sum_all(in[0]);
        case Op::cross_entropy: require_arity(op, in, 1); return cross_entropy(in[0], at.label);
    }
    throw UnsupportedOpError("unsupported op");
}

std::vector<Tensor> vjp(Op op, std::span<const Tensor> in, const Tensor& g, const OpAttrs& at) {
    switch (op) {
        case Op::matmul: {
            require_arity(op, in, 2);
            return {matmul(g, transpose(in[1])), matmul(transpose(in[0]), g)};
        }
        case Op::softmax: require_arity(op, in, 1); return {softmax_vjp(in[0], g, at.axis)};
        case Op::layer_norm:
            require_arity(op, in, 3);
            return layer_norm_vjp(in[0], in[1], in[2], g, at.eps);
        case Op::depthwise_conv_full: {
            require_arity(op, in, 3);
            const std::size_t positions = in[0].dim(0) * in[0].dim(1), c = in[0].dim(2);
            std::vector<double> dx(in[0].size()), dk(in[1].size());
            kernels::mul_rows(in[1].raw(), g.raw(), dx.data(), positions, c);
            kernels::mul_rows(in[0].raw(), g.raw(), dk.data(), positions, c);
            return {Tensor(in[0].shape(), std::move(dx)), Tensor(in[1].shape(), std::move(dk)),
                    g.reshape(in[2].shape())};
        }
        case Op::pointwise_conv: {
            require_arity(op, in, 3);
            const std::size_t positions = in[0].dim(0) * in[0].dim(1);
            const Tensor x2 = in[0].reshape({positions, in[0].dim(2)});
            const Tensor g2 = g.reshape({positions, in[1].dim(1)});
            return {matmul(g2, transpose(in[1])).reshape(in[0].shape()), matmul(transpose(x2), g2),
                    column_sums(g2, in[1].dim(1)).reshape(in[2].shape())};
        }
        case Op::hadamard:
            require_arity(op, in, 2);
            return {hadamard(g, in[1]), hadamard(g, in[0])};
        case Op::broadcast_vector: {
            require_arity(op, in, 1);
            return {column_sums(g, in[0].size()).reshape(in[0].shape())};
        }
        case Op::dft2_real: require_arity(op, in, 1); return {dft2_real(g)};
        case Op::relu:
            require_arity(op, in, 1);
            return {zip(in[0], g, [](double x, double gi) { return x > 0.0 ? gi : 0.0; })};
        case Op::sigmoid:
            require_arity(op, in, 1);
            return {zip(in[0], g, [](double x, double gi) {
                const double s = sigmoid_scalar(x);
                return gi * s * (1.0 - s);
            })};
        case Op::swish:
            require_arity(op, in, 1);
            return {zip(in[0], g, [](double x, double gi) {
                const double s = sigmoid_scalar(x);
                return gi * (s + x * s * (1.0 - s));
            })};
        case Op::add: require_arity(op, in, 2); return {g, g};
        case Op::add_bias:
            require_arity(op, in, 2);
            return {g, column_sums(g, in[1].size()).reshape(in[1].shape())};
        case Op::scale_rows: {
            require_arity(op, in, 2);
            const std::size_t d = in[1].size();
            const std::size_t rows = d ? g.size() / d : 0;
            std::vector<double> gv(d);
            if (d) kernels::col_dot(g.raw(), in[0].raw(), gv.data(), rows, d);
            return {scale_rows(g, in[1]), Tensor(in[1].shape(), std::move(gv))};
        }
        case Op::scale: {
            require_arity(op, in, 1);
            std::vector<double> out(g.size());
            kernels::scale(g.raw(), at.factor, out.data(), g.size());
            return {Tensor(g.shape(), std::move(out))};
        }
        case Op::transpose: require_arity(op, in, 1); return {transpose(g)};
        case Op::reshape: require_arity(op, in, 1); return {g.reshape(in[0].shape())};
        case Op::slice_cols: {
            require_arity(op, in, 1);
            const std::size_t m = in[0].dim(0), n = in[0].dim(1);
            std::vector<double> out(m * n, 0.0);
            for (std::size_t i = 0; i < m; ++i)
                std::copy_n(g.raw() + i * at.count, at.count, out.begin() + i * n + at.start);
            return {Tensor(in[0].shape(), std::move(out))};
        }
        case Op::concat_cols: {
            std::vector<Tensor> out;
            std::size_t offset = 0;
            for (const auto& p : in) {
                out.push_back(slice_cols(g, offset, p.dim(1)));
                offset += p.dim(1);
            }
            return out;
        }
        case Op::concat_rows: {
            std::vector<Tensor> out;
            std::size_t offset = 0;
            for (const auto& p : in) {
                std::vector<double> part(g.raw() + offset, g.raw() + offset + p.size());
                out.emplace_back(p.shape(), std::move(part));
                offset += p.size();
            }
            return out;
        }
        case Op::repeat_rows: {
            require_arity(op, in, 1);
            const std::size_t m = in[0].dim(0), d = in[0].dim(1);
            std::vector<double> out(m * d, 0.0);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t a = 0; a < at.count; ++a)
                    for (std::size_t c = 0; c < d; ++c) out[r * d + c] += g[(r * at.count + a) * d + c];
            return {Tensor(in[0].shape(), std::move(out))};
        }
        case Op::tile_rows: {
            require_arity(op, in, 1);
            const std::size_t block = in[0].size();
            std::vector<double> out(block, 0.0);
            for (std::size_t t = 0; t < at.count; ++t)
                for (std::size_t i = 0; i < block; ++i) out[i] += g[t * block + i];
            return {Tensor(in[0].shape(), std::move(out))};
        }
        case Op::mean_rows: {
            require_arity(op, in, 1);
            const std::size_t n = in[0].dim(0), d = in[0].dim(1);
            std::vector<double> out(n * d);
            const double inv = 1.0 / static_cast<double>(n);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < d; ++c) out[r * d + c] = g[c] * inv;
            return {Tensor(in[0].shape(), std::move(out))};
        }
        case Op::sum_all:
            require_arity(op, in, 1);
            return {Tensor::full(in[0].shape(), g[0])};
        case Op::cross_entropy: {
            require_arity(op, in, 1);
            const Tensor& z = in[0];
            const Tensor p = softmax(z.reshape({z.size()}), 0);
            std::vector<double> out(z.size());
            for (std::size_t i = 0; i < z.size(); ++i)
                out[i] = g[0] * (p[i] - (i == at.label ? 1.0 : 0.0));
            return {Tensor(z.shape(), std::move(out))};
        }
    }
    throw UnsupportedOpError("unsupported op");
}

std::vector<Tensor> vjp(std::string_view op, std::span<const Tensor> inputs, const Tensor& cotangent,
                        const OpAttrs& attrs) {
    return vjp(op_from_name(op), inputs, cotangent, attrs);
}

}  // namespace gformer::ops

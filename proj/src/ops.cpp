#include "gformer/ops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "gformer/fft.hpp"
#include "gformer/flops.hpp"
#include "gformer/kernels.hpp"

namespace gformer::flops {

namespace {
thread_local std::uint64_t g_counter = 0;
}

std::uint64_t counter() noexcept { return g_counter; }
void record(std::uint64_t n) noexcept { g_counter += n; }

}  // namespace gformer::flops

namespace gformer::ops {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* what) {
    if (t.rank() != rank) {
        throw DimensionError(std::string(op) + ": " + what + " must have rank " +
                             std::to_string(rank) + ", got " + shape_str(t.shape()));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    }
}

template <typename F>
Tensor map_unary(const Tensor& x, F f) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
    return Tensor(x.shape(), std::move(out));
}

double sigmoid_scalar(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul", "lhs");
    require_rank(b, 2, "matmul", "rhs");
    if (a.dim(1) != b.dim(0)) {
        throw DimensionError("matmul: inner dimensions differ for " + shape_str(a.shape()) +
                             " and " + shape_str(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
    std::vector<double> out(m * p);
    kernels::gemm(a.raw(), b.raw(), out.data(), m, k, p);
    flops::record(flops::kMac * m * k * p);
    return Tensor({m, p}, std::move(out));
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) {
        throw DimensionError("softmax: axis " + std::to_string(axis) + " out of range for " +
                             shape_str(x.shape()));
    }
    if (!all_finite(x)) throw NumericError("softmax: non-finite input");
    const auto& s = x.shape();
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    const std::size_t len = s[axis];
    std::vector<double> out(x.size());
    const double* in = x.raw();
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * len * inner + i;
            double mx = in[base];
            for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, in[base + j * inner]);
            double sum = 0.0;
            for (std::size_t j = 0; j < len; ++j) {
                const double e = std::exp(in[base + j * inner] - mx);
                out[base + j * inner] = e;
                sum += e;
            }
            for (std::size_t j = 0; j < len; ++j) out[base + j * inner] /= sum;
        }
    }
    flops::record(flops::kSoftmax * x.size());
    return Tensor(s, std::move(out));
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
    if (!(eps > 0.0)) throw ConfigError("layer_norm: eps must be positive");
    const std::size_t d = x.shape().back();
    if (d == 0) throw DimensionError("layer_norm: feature dimension is 0");
    if (gamma.size() != d || beta.size() != d) {
        throw DimensionError("layer_norm: affine parameters " + shape_str(gamma.shape()) + ", " +
                             shape_str(beta.shape()) + " do not match feature dim of " +
                             shape_str(x.shape()));
    }
    const std::size_t rows = x.size() / d;
    std::vector<double> out(x.size());
    const double* in = x.raw();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = in + r * d;
        double mean = 0.0;
        for (std::size_t c = 0; c < d; ++c) mean += row[c];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t c = 0; c < d; ++c) var += (row[c] - mean) * (row[c] - mean);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + eps);
        for (std::size_t c = 0; c < d; ++c)
            out[r * d + c] = (row[c] - mean) * inv * gamma[c] + beta[c];
    }
    flops::record(flops::kLayerNorm * x.size());
    return Tensor(x.shape(), std::move(out));
}

Tensor depthwise_conv_full(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
    require_rank(x, 3, "depthwise_conv_full", "input");
    if (!x.same_shape(kernel)) {
        throw DimensionError("depthwise_conv_full: kernel extent " + shape_str(kernel.shape()) +
                             " must equal input extent " + shape_str(x.shape()));
    }
    const std::size_t positions = x.dim(0) * x.dim(1), c = x.dim(2);
    if (bias.size() != c) {
        throw DimensionError("depthwise_conv_full: bias " + shape_str(bias.shape()) +
                             " does not match channels of " + shape_str(x.shape()));
    }
    std::vector<double> acc(c);
    kernels::col_dot(x.raw(), kernel.raw(), acc.data(), positions, c);
    std::vector<double> out(c);
    kernels::add(acc.data(), bias.raw(), out.data(), c);
    flops::record(flops::kMac * positions * c);
    return Tensor({1, 1, c}, std::move(out));
}

Tensor pointwise_conv(const Tensor& x, const Tensor& weights, const Tensor& bias) {
    require_rank(x, 3, "pointwise_conv", "input");
    require_rank(weights, 2, "pointwise_conv", "weights");
    const std::size_t positions = x.dim(0) * x.dim(1), c = x.dim(2), co = weights.dim(1);
    if (weights.dim(0) != c) {
        throw DimensionError("pointwise_conv: weights " + shape_str(weights.shape()) +
                             " do not match channels of " + shape_str(x.shape()));
    }
    if (bias.size() != co) {
        throw DimensionError("pointwise_conv: bias " + shape_str(bias.shape()) +
                             " does not match output channels " + std::to_string(co));
    }
    std::vector<double> prod(positions * co);
    kernels::gemm(x.raw(), weights.raw(), prod.data(), positions, c, co);
    std::vector<double> out(positions * co);
    kernels::add_rows(prod.data(), bias.raw(), out.data(), positions, co);
    flops::record(flops::kMac * positions * c * co);
    return Tensor({x.dim(0), x.dim(1), co}, std::move(out));
}

Tensor hadamard(const Tensor& x, const Tensor& y) {
    require_same_shape(x, y, "hadamard");
    std::vector<double> out(x.size());
    kernels::mul(x.raw(), y.raw(), out.data(), x.size());
    flops::record(flops::kProduct * x.size());
    return Tensor(x.shape(), std::move(out));
}

Tensor broadcast_vector(const Tensor& v, std::size_t h, std::size_t w) {
    const bool flat = v.rank() == 1;
    const bool cube = v.rank() == 3 && v.dim(0) == 1 && v.dim(1) == 1;
    if (!flat && !cube) {
        throw DimensionError("broadcast_vector: expected [D] or [1x1xD], got " +
                             shape_str(v.shape()));
    }
    if (h == 0 || w == 0) throw DimensionError("broadcast_vector: target extents must be positive");
    const std::size_t d = v.size();
    std::vector<double> out(h * w * d);
    for (std::size_t p = 0; p < h * w; ++p) std::copy_n(v.raw(), d, out.begin() + p * d);
    return Tensor({h, w, d}, std::move(out));
}

Tensor dft2_real(const Tensor& x) {
    require_rank(x, 2, "dft2_real", "input");
    const std::size_t n = x.dim(0), d = x.dim(1);
    std::vector<std::complex<double>> buf(n * d);
    for (std::size_t i = 0; i < n * d; ++i) buf[i] = x[i];
    std::uint64_t executed = 0;
    const FftPlan along_features(d);
    for (std::size_t r = 0; r < n; ++r) executed += along_features.forward(buf.data() + r * d);
    const FftPlan along_sequence(n);
    std::vector<std::complex<double>> column(n);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t r = 0; r < n; ++r) column[r] = buf[r * d + c];
        executed += along_sequence.forward(column.data());
        for (std::size_t r = 0; r < n; ++r) buf[r * d + c] = column[r];
    }
    std::vector<double> out(n * d);
    for (std::size_t i = 0; i < n * d; ++i) out[i] = buf[i].real();
    flops::record(executed);
    return Tensor(x.shape(), std::move(out));
}

Tensor relu(const Tensor& x) {
    flops::record(flops::kRelu * x.size());
    return map_unary(x, [](double v) { return v > 0.0 ? v : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
    flops::record(flops::kSigmoid * x.size());
    return map_unary(x, sigmoid_scalar);
}

Tensor swish(const Tensor& x) {
    flops::record(flops::kSwish * x.size());
    return map_unary(x, [](double v) { return v * sigmoid_scalar(v); });
}

Tensor add(const Tensor& x, const Tensor& y) {
    require_same_shape(x, y, "add");
    std::vector<double> out(x.size());
    kernels::add(x.raw(), y.raw(), out.data(), x.size());
    return Tensor(x.shape(), std::move(out));
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
    const std::size_t d = x.shape().back();
    if (bias.size() != d) {
        throw DimensionError("add_bias: bias " + shape_str(bias.shape()) +
                             " does not match last axis of " + shape_str(x.shape()));
    }
    std::vector<double> out(x.size());
    if (d) kernels::add_rows(x.raw(), bias.raw(), out.data(), x.size() / d, d);
    return Tensor(x.shape(), std::move(out));
}

Tensor scale_rows(const Tensor& x, const Tensor& v) {
    const std::size_t d = x.rank() ? x.shape().back() : 0;
    if (x.rank() == 0 || v.size() != d) {
        throw DimensionError("scale_rows: row " + shape_str(v.shape()) +
                             " does not match last axis of " + shape_str(x.shape()));
    }
    std::vector<double> out(x.size());
    if (d) kernels::mul_rows(x.raw(), v.raw(), out.data(), x.size() / d, d);
    flops::record(flops::kProduct * x.size());
    return Tensor(x.shape(), std::move(out));
}

Tensor scale(const Tensor& x, double s) {
    std::vector<double> out(x.size());
    kernels::scale(x.raw(), s, out.data(), x.size());
    flops::record(flops::kProduct * x.size());
    return Tensor(x.shape(), std::move(out));
}

Tensor transpose(const Tensor& x) {
    require_rank(x, 2, "transpose", "input");
    const std::size_t m = x.dim(0), n = x.dim(1);
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j * m + i] = x[i * n + j];
    return Tensor({n, m}, std::move(out));
}

Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count) {
    require_rank(x, 2, "slice_cols", "input");
    const std::size_t m = x.dim(0), n = x.dim(1);
    if (start + count > n) {
        throw DimensionError("slice_cols: columns [" + std::to_string(start) + ", " +
                             std::to_string(start + count) + ") out of range for " +
                             shape_str(x.shape()));
    }
    std::vector<double> out(m * count);
    for (std::size_t i = 0; i < m; ++i)
        std::copy_n(x.raw() + i * n + start, count, out.begin() + i * count);
    return Tensor({m, count}, std::move(out));
}

Tensor concat_cols(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no inputs");
    const std::size_t m = parts[0].dim(0);
    std::size_t total = 0;
    for (const auto& p : parts) {
        require_rank(p, 2, "concat_cols", "part");
        if (p.dim(0) != m) throw DimensionError("concat_cols: row counts differ");
        total += p.dim(1);
    }
    std::vector<double> out(m * total);
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const std::size_t w = p.dim(1);
        for (std::size_t i = 0; i < m; ++i)
            std::copy_n(p.raw() + i * w, w, out.begin() + i * total + offset);
        offset += w;
    }
    return Tensor({m, total}, std::move(out));
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_rows: no inputs");
    const std::size_t n = parts[0].dim(1);
    std::size_t rows = 0;
    for (const auto& p : parts) {
        require_rank(p, 2, "concat_rows", "part");
        if (p.dim(1) != n) throw DimensionError("concat_rows: column counts differ");
        rows += p.dim(0);
    }
    std::vector<double> out;
    out.reserve(rows * n);
    for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
    return Tensor({rows, n}, std::move(out));
}

Tensor repeat_rows(const Tensor& x, std::size_t times) {
    require_rank(x, 2, "repeat_rows", "input");
    const std::size_t m = x.dim(0), d = x.dim(1);
    std::vector<double> out(m * times * d);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t a = 0; a < times; ++a)
            std::copy_n(x.raw() + r * d, d, out.begin() + (r * times + a) * d);
    return Tensor({m * times, d}, std::move(out));
}

Tensor tile_rows(const Tensor& x, std::size_t times) {
    require_rank(x, 2, "tile_rows", "input");
    std::vector<double> out;
    out.reserve(x.size() * times);
    for (std::size_t t = 0; t < times; ++t) out.insert(out.end(), x.data().begin(), x.data().end());
    return Tensor({x.dim(0) * times, x.dim(1)}, std::move(out));
}

Tensor mean_rows(const Tensor& x) {
    require_rank(x, 2, "mean_rows", "input");
    const std::size_t n = x.dim(0), d = x.dim(1);
    if (n == 0) throw DimensionError("mean_rows: no rows");
    std::vector<double> sum(d);
    kernels::col_sum(x.raw(), sum.data(), n, d);
    std::vector<double> out(d);
    kernels::scale(sum.data(), 1.0 / static_cast<double>(n), out.data(), d);
    flops::record(flops::kMeanPerInput * n * d);
    return Tensor({1, d}, std::move(out));
}

Tensor sum_all(const Tensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    return Tensor::scalar(s);
}

Tensor cross_entropy(const Tensor& logits, std::size_t label) {
    const std::size_t c = logits.size();
    if (!(logits.rank() == 1 || (logits.rank() == 2 && logits.dim(0) == 1)))
        throw DimensionError("cross_entropy: expected a single logit row, got " +
                             shape_str(logits.shape()));
    if (label >= c) throw DimensionError("cross_entropy: label out of range");
    if (!all_finite(logits)) throw NumericError("cross_entropy: non-finite logits");
    double mx = logits[0];
    for (std::size_t i = 1; i < c; ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) sum += std::exp(logits[i] - mx);
    return Tensor::scalar(mx + std::log(sum) - logits[label]);
}

}  // namespace gformer::ops

#include "gformer/fft.hpp"

#include <numbers>
#include <utility>

#include "gformer/flops.hpp"

namespace gformer {

namespace {
bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

// Plain product; std::complex operator* goes through the Annex G NaN-recovery path.
inline std::complex<double> cmul(std::complex<double> a, std::complex<double> b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}
}  // namespace

FftPlan::FftPlan(std::size_t length) : length_(length), radix2_(is_pow2(length)) {
    const double step = -2.0 * std::numbers::pi / static_cast<double>(length_ ? length_ : 1);
    if (radix2_) {
        twiddles_.resize(length_ / 2);
        for (std::size_t k = 0; k < length_ / 2; ++k)
            twiddles_[k] = std::polar(1.0, step * static_cast<double>(k));
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < length_) ++bits;
        bit_reverse_.resize(length_);
        for (std::size_t i = 0; i < length_; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            bit_reverse_[i] = r;
        }
    } else {
        twiddles_.resize(length_);
        for (std::size_t k = 0; k < length_; ++k)
            twiddles_[k] = std::polar(1.0, step * static_cast<double>(k));
    }
}

std::uint64_t FftPlan::forward(std::complex<double>* data) const {
    const std::size_t n = length_;
    if (n <= 1) return 0;
    std::uint64_t performed = 0;
    if (!radix2_) {
        std::vector<std::complex<double>> out(n);
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += cmul(data[j], twiddles_[(j * k) % n]);
            out[k] = acc;
        }
        performed = flops::kComplexMac * n * n;
        std::copy(out.begin(), out.end(), data);
        return performed;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (i < bit_reverse_[i]) std::swap(data[i], data[bit_reverse_[i]]);
    std::uint64_t butterflies = 0;
    for (std::size_t half = 1; half < n; half <<= 1) {
        const std::size_t stride = n / (2 * half);
        for (std::size_t start = 0; start < n; start += 2 * half) {
            for (std::size_t j = 0; j < half; ++j) {
                const std::complex<double> t = cmul(twiddles_[j * stride], data[start + j + half]);
                const std::complex<double> u = data[start + j];
                data[start + j] = u + t;
                data[start + j + half] = u - t;
            }
            butterflies += half;
        }
    }
    return butterflies * flops::kButterfly;
}

}  // namespace gformer

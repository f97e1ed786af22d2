#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace gformer {

// Forward DFT of a fixed length: X[k] = sum_j x[j] exp(-2 pi i jk / L).
// Power-of-two lengths use an iterative radix-2 transform; other lengths fall
// back to the direct O(L^2) sum.
class FftPlan {
public:
    explicit FftPlan(std::size_t length);

    std::size_t length() const noexcept { return length_; }

    // Transforms data[0..length) in place and returns the FLOPs executed.
    std::uint64_t forward(std::complex<double>* data) const;

private:
    std::size_t length_;
    bool radix2_;
    std::vector<std::complex<double>> twiddles_;
    std::vector<std::size_t> bit_reverse_;
};

}  // namespace gformer

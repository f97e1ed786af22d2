#pragma once

#include <cstdint>

// FLOP convention shared by the instrumented counter (ops) and the closed-form
// counter (analysis). One multiply-accumulate is 2 FLOPs. Bias and residual
// additions, reshapes, transposes, slicing and broadcasts are free.
namespace gformer::flops {

inline constexpr std::uint64_t kMac = 2;
inline constexpr std::uint64_t kProduct = 1;        // elementwise product or scalar scale
inline constexpr std::uint64_t kMeanPerInput = 1;   // mean reduction, per input element
inline constexpr std::uint64_t kSoftmax = 4;        // per element, includes exp
inline constexpr std::uint64_t kLayerNorm = 5;      // per element
inline constexpr std::uint64_t kRelu = 1;
inline constexpr std::uint64_t kSigmoid = 4;
inline constexpr std::uint64_t kSwish = 5;          // sigmoid + product
inline constexpr std::uint64_t kButterfly = 10;     // radix-2: complex mul + two complex adds
inline constexpr std::uint64_t kComplexMac = 8;     // direct DFT term

// Per-thread running total, incremented by every forward primitive.
std::uint64_t counter() noexcept;
void record(std::uint64_t n) noexcept;

// Counts FLOPs executed on this thread while alive.
class Scope {
public:
    Scope() noexcept : start_(counter()) {}
    std::uint64_t count() const noexcept { return counter() - start_; }

private:
    std::uint64_t start_;
};

}  // namespace gformer::flops

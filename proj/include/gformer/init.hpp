#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "gformer/tensor.hpp"

namespace gformer {

// Seeded source for parameter initialization and synthetic data.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    Tensor uniform(Shape shape, double lo, double hi);
    // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
    Tensor fan_in_uniform(Shape shape, std::size_t fan_in);
    Tensor normal(Shape shape, double stddev = 1.0);
    std::size_t index(std::size_t n);
    std::vector<std::size_t> permutation(std::size_t n);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace gformer

#include "gformer/init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gformer {

Tensor Rng::uniform(Shape shape, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = dist(engine_);
    return Tensor(std::move(shape), std::move(data));
}

Tensor Rng::fan_in_uniform(Shape shape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    return uniform(std::move(shape), -bound, bound);
}

Tensor Rng::normal(Shape shape, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    std::vector<double> data(shape_size(shape));
    for (auto& v : data) v = dist(engine_);
    return Tensor(std::move(shape), std::move(data));
}

std::size_t Rng::index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), std::size_t{0});
    std::shuffle(p.begin(), p.end(), engine_);
    return p;
}

}  // namespace gformer

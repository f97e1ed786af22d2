#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gformer/autograd.hpp"
#include "gformer/params.hpp"

namespace gformer {

inline constexpr double kGradStep = 1e-5;
inline constexpr double kGradTolerance = 1e-4;
inline constexpr double kGradFloor = 1e-8;

struct GradCheckEntry {
    std::string name;
    std::size_t elements = 0;
    double max_rel_error = 0.0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;

    double max_rel_error() const;
    bool passed(double tol = kGradTolerance) const { return max_rel_error() <= tol; }
};

// |analytic - numeric|_inf / max(|analytic|_inf, |numeric|_inf, floor)
double relative_error(const Tensor& analytic, const Tensor& numeric, double floor = kGradFloor);

using Differentiable = std::function<ag::Var(std::span<const ag::Var>)>;

// Compares backward() against central finite differences for every leaf. Each
// entry is |analytic - numeric|_inf over that leaf divided by the largest
// gradient magnitude across all leaves (floored).
// The scalar loss is sum(f(leaves) * probe) with a seeded random probe.
GradCheckReport check_gradients(const Differentiable& f,
                                std::span<const std::pair<std::string, Tensor>> leaves,
                                std::uint64_t probe_seed, double step = kGradStep);

using BlockFn = std::function<ag::Var(const ag::VarMap&, const ag::Var&)>;

// Leaves are the block parameters (in enumeration order) followed by "input".
GradCheckReport check_block_gradients(const BlockFn& block, const BlockParams& params,
                                      const Tensor& x, std::uint64_t probe_seed,
                                      double step = kGradStep);

}  // namespace gformer

#include "gformer/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "gformer/init.hpp"

namespace gformer {

double GradCheckReport::max_rel_error() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_error);
    return m;
}

namespace {

double max_abs(const Tensor& t) {
    double m = 0.0;
    for (double v : t.data()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

double relative_error(const Tensor& analytic, const Tensor& numeric, double floor) {
    double diff = 0.0, scale = floor;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
        scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
    }
    return diff / scale;
}

GradCheckReport check_gradients(const Differentiable& f,
                                std::span<const std::pair<std::string, Tensor>> leaves,
                                std::uint64_t probe_seed, double step) {
    std::vector<ag::Var> vars;
    for (const auto& [_, t] : leaves) vars.push_back(ag::parameter(t));
    const ag::Var out = f(vars);
    Rng rng(probe_seed);
    const Tensor probe = rng.uniform(out.shape(), -1.0, 1.0);
    ag::backward(ag::sum_all(ag::hadamard(out, ag::constant(probe))));

    auto output_at = [&](std::size_t leaf, std::size_t element, double value) {
        ag::NoGradGuard guard;
        std::vector<ag::Var> inputs;
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            if (i != leaf) {
                inputs.push_back(ag::constant(leaves[i].second));
                continue;
            }
            std::vector<double> data = leaves[i].second.to_vector();
            data[element] = value;
            inputs.push_back(ag::constant(Tensor(leaves[i].second.shape(), std::move(data))));
        }
        return f(inputs).value();
    };

    std::vector<Tensor> numerics;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
        const Tensor& value = leaves[i].second;
        std::vector<double> numeric(value.size());
        for (std::size_t e = 0; e < value.size(); ++e) {
            const double hi = value[e] + step, lo = value[e] - step;
            const Tensor up = output_at(i, e, hi), down = output_at(i, e, lo);
            // Outputs independent of the perturbed element cancel exactly.
            double delta = 0.0;
            for (std::size_t k = 0; k < up.size(); ++k) delta += probe[k] * (up[k] - down[k]);
            numeric[e] = delta / (hi - lo);
        }
        numerics.emplace_back(value.shape(), std::move(numeric));
    }

    // One scale for the whole VJP, shared by every leaf.
    double scale = kGradFloor;
    for (std::size_t i = 0; i < leaves.size(); ++i)
        scale = std::max({scale, max_abs(vars[i].grad()), max_abs(numerics[i])});
    GradCheckReport report;
    for (std::size_t i = 0; i < leaves.size(); ++i)
        report.entries.push_back({leaves[i].first, leaves[i].second.size(),
                                  max_abs_diff(vars[i].grad(), numerics[i]) / scale});
    return report;
}

GradCheckReport check_block_gradients(const BlockFn& block, const BlockParams& params,
                                      const Tensor& x, std::uint64_t probe_seed, double step) {
    std::vector<std::pair<std::string, Tensor>> leaves(params.begin(), params.end());
    leaves.emplace_back("input", x);
    const std::size_t count = params.size();
    std::vector<std::string> names;
    for (const auto& [n, _] : params) names.push_back(n);
    auto f = [&](std::span<const ag::Var> vars) {
        ag::VarMap map;
        for (std::size_t i = 0; i < count; ++i) map.add(names[i], vars[i]);
        return block(map, vars[count]);
    };
    return check_gradients(f, leaves, probe_seed, step);
}

}  // namespace gformer

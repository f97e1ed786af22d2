#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>

#include "gformer/analysis.hpp"
#include "gformer/init.hpp"
#include "gformer/kernels.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace gformer::analysis {

namespace {

constexpr std::array<std::string_view, 7> kSubjects{
    "attention", "transformer", "metaformer", "cat", "squeeze_excite", "mlp_mixer", "fnet"};

using Clock = std::chrono::steady_clock;

// Smallest observable positive tick of the steady clock.
double timer_resolution_ns() {
    double best = 1e18;
    for (int i = 0; i < 64; ++i) {
        const auto a = Clock::now();
        auto b = Clock::now();
        while (b == a) b = Clock::now();
        best = std::min(best, std::chrono::duration<double, std::nano>(b - a).count());
    }
    return best;
}

// Freed activation buffers stay on the heap; timed passes never fault in fresh
// mmap chunks.
void pin_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

// Streams a scratch buffer through the cache hierarchy, displacing the block's
// working set from the private caches.
double evict(std::vector<double>& scratch) {
    double acc = 0.0;
    for (double& v : scratch) {
        v += 1.0;
        acc += v;
    }
    return acc;
}

}  // namespace

std::span<const std::string_view> bench_subjects() noexcept { return kSubjects; }

GFormerConfig bench_config(std::string_view subject, std::size_t n, std::size_t d) {
    PresetDims dims;
    dims.d = d;
    dims.shape = {n, 1};
    dims.heads = d % 4 == 0 ? 4 : 1;
    dims.ffn_hidden = d;
    dims.token_hidden = d;
    dims.se_reduction = d % 4 == 0 ? 4 : 1;
    if (subject == "attention") {
        GFormerConfig c;
        c.d = d;
        c.spatial_shape = dims.shape;
        c.spatial = mixers::MultiHeadAttention{dims.heads};
        c.channel = mixers::Pointwise{};
        c.interaction = mixers::InteractionKind::none;
        c.residual1 = c.residual2 = c.residual3 = false;
        c.norm = NormKind::identity;
        c.validate();
        return c;
    }
    return preset(subject, dims);
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double upper = values[mid];
    if (values.size() % 2) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

double median_abs_deviation(const std::vector<double>& values) {
    const double m = median(values);
    std::vector<double> dev;
    dev.reserve(values.size());
    for (double v : values) dev.push_back(std::abs(v - m));
    return median(std::move(dev));
}

BenchReport bench_latency(std::string name, const ConfigForN& config_for_n,
                          std::span<const std::size_t> n_values, const BenchOptions& opt) {
    if (opt.reps < 30) throw ConfigError("bench: reps must be at least 30");
    if (opt.warmup < 5) throw ConfigError("bench: warmup must be at least 5");
    if (n_values.empty()) throw ConfigError("bench: no n values");

    BenchReport report;
    report.preset = std::move(name);
    report.reps = opt.reps;
    report.warmup = opt.warmup;
    report.seed = opt.seed;
    report.kernel_backend = std::string(kernels::backend_name(kernels::active_backend()));
    const double resolution = timer_resolution_ns();
    pin_allocator();
    std::vector<double> scratch(opt.evict_bytes / sizeof(double));

    struct Subject {
        AssembledBlock ab;
        Tensor x;
    };
    std::vector<Subject> subjects;
    for (std::size_t n : n_values) {
        const GFormerConfig config = config_for_n(n);
        report.d = config.d;
        AssembledBlock ab = assemble(config, opt.seed);
        Rng rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
        Tensor x = rng.normal({n, config.d});
        BenchPoint point;
        point.n = n;
        point.flops = count_flops(config, n);
        point.params = count_params(ab.params);
        point.samples_ns.reserve(opt.reps);
        report.points.push_back(std::move(point));
        subjects.push_back({std::move(ab), std::move(x)});
    }

    double sink = 0.0;
    for (const auto& s : subjects)
        for (std::size_t i = 0; i < opt.warmup; ++i) sink += forward(s.ab.block, s.ab.params, s.x)[0];
    // Repetitions visit every n in turn; drift in machine state lands on all sizes alike.
    for (std::size_t rep = 0; rep < opt.reps; ++rep) {
        for (std::size_t k = 0; k < subjects.size(); ++k) {
            const auto& s = subjects[k];
            if (!scratch.empty()) sink += evict(scratch) * 0.0;
            const auto start = Clock::now();
            const Tensor y = forward(s.ab.block, s.ab.params, s.x);
            const auto stop = Clock::now();
            sink += y[0];
            report.points[k].samples_ns.push_back(
                std::chrono::duration<double, std::nano>(stop - start).count());
        }
    }
    if (!std::isfinite(sink)) report.warnings.push_back("non-finite block output");
    for (auto& point : report.points) {
        point.median_ns = median(point.samples_ns);
        point.mad_ns = median_abs_deviation(point.samples_ns);
        if (resolution >= point.median_ns)
            report.warnings.push_back("timer resolution (" + std::to_string(resolution) +
                                      " ns) is coarser than the median at n=" + std::to_string(point.n));
    }
    std::vector<std::size_t> distinct(n_values.begin(), n_values.end());
    std::sort(distinct.begin(), distinct.end());
    if (std::unique(distinct.begin(), distinct.end()) - distinct.begin() >= 3) {
        const ScalingFit fit = fit_report(report);
        report.slope = fit.slope;
        report.r2 = fit.r2;
    } else {
        report.warnings.push_back("fewer than 3 distinct n values; no scaling fit");
    }
    return report;
}

BenchReport bench_latency(std::string_view subject, std::size_t d,
                          std::span<const std::size_t> n_values, const BenchOptions& options) {
    bench_config(subject, n_values.empty() ? 1 : n_values.front(), d);  // validate early
    return bench_latency(std::string(subject),
                         [&](std::size_t n) { return bench_config(subject, n, d); }, n_values,
                         options);
}

}  // namespace gformer::analysis

#pragma once

// FLOP and parameter accounting, latency benchmarks, log-log scaling fits and
// the overfit sanity trainer.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gformer/gformer.hpp"
#include "gformer/params.hpp"

namespace gformer::analysis {

inline constexpr std::string_view kFlopConvention =
    "1 MAC = 2 FLOPs; bias/residual adds free; softmax 4 FLOPs/element";

// FLOPs of a length-L complex DFT as executed by FftPlan.
std::uint64_t dft_flops(std::size_t length);

// Closed-form FLOPs of one forward pass with n positions (overrides
// config.spatial_shape). Matches the instrumented flops::Scope count exactly.
std::uint64_t count_flops(const GFormerConfig& config, std::size_t n);

std::uint64_t count_params(const BlockParams& params);

// Block geometry used for benchmarks: flat n positions, channel dim d.
// Subjects are the preset names plus "attention" (multi-head attention token
// mixer followed by a pointwise channel mixer, no residuals or norms).
std::span<const std::string_view> bench_subjects() noexcept;
GFormerConfig bench_config(std::string_view subject, std::size_t n, std::size_t d);

struct BenchPoint {
    std::size_t n = 0;
    std::vector<double> samples_ns;
    double median_ns = 0.0;
    double mad_ns = 0.0;
    std::uint64_t flops = 0;
    std::uint64_t params = 0;
};

struct BenchReport {
    std::string preset;
    std::size_t d = 0;
    std::size_t reps = 0;
    std::size_t warmup = 0;
    std::uint64_t seed = 0;
    std::string kernel_backend;
    std::vector<BenchPoint> points;
    double slope = 0.0;
    double r2 = 0.0;
    std::vector<std::string> warnings;
};

struct BenchOptions {
    std::size_t reps = 30;
    std::size_t warmup = 5;
    std::uint64_t seed = 42;
    // Bytes streamed through a scratch buffer before every timed pass so each
    // n starts from the same cache level; 0 disables the eviction.
    std::size_t evict_bytes = std::size_t{8} << 20;
};

using ConfigForN = std::function<GFormerConfig(std::size_t n)>;

// Single-threaded wall-clock benchmark; throws ConfigError if reps < 30 or warmup < 5.
BenchReport bench_latency(std::string name, const ConfigForN& config_for_n,
                          std::span<const std::size_t> n_values, const BenchOptions& options);
BenchReport bench_latency(std::string_view subject, std::size_t d,
                          std::span<const std::size_t> n_values, const BenchOptions& options);

double median(std::vector<double> values);
double median_abs_deviation(const std::vector<double>& values);

struct ScalingFit {
    double slope = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares on (log n, log t). Needs >= 3 distinct n.
ScalingFit fit_scaling(std::span<const std::pair<double, double>> points);
ScalingFit fit_report(const BenchReport& report);

nlohmann::json to_json(const BenchReport& report);
BenchReport report_from_json(const nlohmann::json& doc);
// Columns: preset, n, median_ns, mad_ns, flops, params, slope, r2.
std::string to_tsv(const BenchReport& report);

// Documented per-preset learning rate for overfit_sanity.
double default_overfit_lr(std::string_view preset);

// One block (8x8 spatial grid, d = 8) -> global mean pool -> dense classifier
// over 4 classes, trained by full-batch SGD on 8 fixed synthetic samples.
// Returns steps + 1 cross-entropy values (before each update and after the last).
std::vector<double> overfit_sanity(std::string_view preset, std::size_t steps, double lr,
                                   std::uint64_t seed);

}  // namespace gformer::analysis

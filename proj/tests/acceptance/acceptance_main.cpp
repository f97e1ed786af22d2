// Acceptance runner: one PASS/FAIL line per headline criterion.
//
// Usage: gformer_acceptance [criterion ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gformer/analysis.hpp"
#include "gformer/equivalence.hpp"
#include "gformer/flops.hpp"
#include "gformer/init.hpp"
#include "gformer/ops.hpp"
#include "gformer/taff.hpp"
#include "gformer/tensor_io.hpp"
#include "oracles.hpp"
#include "suites.hpp"

using namespace gformer;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

constexpr std::uint64_t kSeed = 42;

Outcome preset_equivalence() {
    Outcome o{true, ""};
    for (const auto name : reference_presets()) {
        const auto r = check_equivalence(name, 20, kSeed);
        o.passed = o.passed && r.trials == 20 && r.max_deviation <= 1e-10;
        o.detail += std::string(name) + "=" + fmt(r.max_deviation) + " ";
    }
    o.detail += "(tol 1e-10, 20 instances each)";
    return o;
}

Outcome gradient_suite() {
    double worst = 0.0;
    std::string worst_name;
    std::size_t subjects = 0;
    auto take = [&](const suites::GradResult& r) {
        ++subjects;
        if (r.max_rel_error >= worst) {
            worst = r.max_rel_error;
            worst_name = r.subject;
        }
    };
    for (const auto& r : suites::primitive_gradients(20, kSeed)) take(r);
    for (const auto& r : suites::preset_gradients(kSeed)) take(r);
    take(suites::taff_gradient(kSeed));
    return {worst <= kGradTolerance, std::to_string(subjects) + " subjects, max rel error " + fmt(worst) +
                                         " (" + worst_name + "), tol 1e-4 floor 1e-8"};
}

Outcome complexity_slopes() {
    const std::vector<std::size_t> ns{256, 512, 1024, 2048, 4096};
    const analysis::BenchOptions opt{30, 5, kSeed};
    const auto cat = analysis::bench_latency("cat", 64, ns, opt);
    const auto fnet = analysis::bench_latency("fnet", 64, ns, opt);
    const auto att = analysis::bench_latency("attention", 64, ns, opt);
    const bool cat_ok = cat.slope >= 0.75 && cat.slope <= 1.25;
    const bool att_ok = att.slope >= 1.7 && att.slope <= 2.3;
    const bool fnet_ok = fnet.slope > cat.slope && fnet.slope < att.slope;
    const bool r2_ok = cat.r2 >= 0.98 && fnet.r2 >= 0.98 && att.r2 >= 0.98;
    std::string warn;
    for (const auto* r : {&cat, &fnet, &att})
        for (const auto& w : r->warnings) warn += " [" + r->preset + ": " + w + "]";
    return {cat_ok && att_ok && fnet_ok && r2_ok,
            "cat " + fmt(cat.slope) + " (R2 " + fmt(cat.r2) + "), fnet " + fmt(fnet.slope) + " (R2 " +
                fmt(fnet.r2) + "), attention " + fmt(att.slope) + " (R2 " + fmt(att.r2) + "), d=64, " +
                cat.kernel_backend + warn};
}

Outcome flop_accounting() {
    std::size_t cases = 0, exact = 0;
    for (const auto subject : analysis::bench_subjects())
        for (std::size_t n : {4, 16, 64})
            for (std::size_t d : {4, 8}) {
                const auto c = analysis::bench_config(subject, n, d);
                const auto ab = assemble(c, kSeed);
                Rng rng(kSeed);
                const Tensor x = rng.normal({n, d});
                flops::Scope scope;
                forward(ab.block, ab.params, x);
                ++cases;
                exact += scope.count() == analysis::count_flops(c, n);
            }
    const double ratio =
        static_cast<double>(analysis::count_flops(analysis::bench_config("cat", 4096, 64), 4096)) /
        static_cast<double>(analysis::count_flops(analysis::bench_config("attention", 4096, 64), 4096));
    return {exact == cases && ratio <= 0.05, std::to_string(exact) + "/" + std::to_string(cases) +
                                                 " exact; cat/attention FLOPs at n=4096 d=64 = " +
                                                 fmt(ratio) + " (max 0.05)"};
}

Outcome parameter_accounting() {
    std::size_t cases = 0, exact = 0;
    Rng rng(kSeed);
    for (int t = 0; t < 20; ++t) {
        const std::size_t heads = 1 + rng.index(3), d = heads * (1 + rng.index(4));
        const std::size_t ffn = 1 + rng.index(16), anchors = 1 + rng.index(4);
        std::vector<std::size_t> channels(rng.index(4));
        for (auto& c : channels) c = 1 + rng.index(32);
        BlockParams stack = taff::init_projection_params(channels, anchors, d, kSeed);
        stack.merge(taff::init_encoder_params(d, ffn, kSeed), "encoder.");
        ++cases;
        exact += taff::taff_param_count(d, heads, ffn, channels, anchors) == analysis::count_params(stack);
    }
    const auto s = taff::surrogate_from_json(read_json_file(GFORMER_FIXTURE_DIR "/detector_surrogate.json"));
    BlockParams stack = taff::init_projection_params(s.level_channels(), s.anchors, s.d, kSeed);
    stack.merge(taff::init_encoder_params(s.d, s.ffn, kSeed), "encoder.");
    ++cases;
    exact += s.taff_param_count() == analysis::count_params(stack);
    return {exact == cases, std::to_string(exact) + "/" + std::to_string(cases) +
                                " exact; surrogate detector " + std::to_string(s.base_param_count()) +
                                " params + TAFF " + std::to_string(s.taff_param_count()) + " = +" +
                                fmt(100.0 * s.relative_overhead()) + "%"};
}

Outcome taff_properties() {
    const std::vector<SpatialShape> extents{{4, 4}, {2, 2}, {1, 1}};
    const std::vector<std::size_t> channels{8, 16, 32};
    const std::size_t anchors = 3, d = 8, heads = 2;
    const auto pyramid = taff::random_pyramid(extents, channels, anchors, kSeed);
    const auto proj = taff::init_projection_params(channels, anchors, d, kSeed + 1);
    const auto enc = taff::init_encoder_params(d, 16, kSeed + 2);
    const auto fs = taff::gather(pyramid, proj, d);
    const Tensor fused = taff::fuse(fs, enc, heads).seq;

    double dev = 0.0;
    Rng rng(kSeed + 3);
    for (int t = 0; t < 20; ++t) {
        const auto perm = rng.permutation(fs.seq.dim(0));
        taff::FusedSequence p = fs;
        p.seq = taff::permute_rows(fs.seq, perm);
        dev = std::max(dev, max_abs_diff(taff::fuse(p, enc, heads).seq, taff::permute_rows(fused, perm)));
    }

    // Index-walk oracle: rows are level-major, row-major location, anchor-minor.
    const auto maps = taff::scatter(fs);
    bool exact = true;
    std::size_t r = 0;
    for (std::size_t l = 0; l < extents.size(); ++l)
        for (std::size_t y = 0; y < extents[l].h; ++y)
            for (std::size_t x = 0; x < extents[l].w; ++x)
                for (std::size_t a = 0; a < anchors; ++a, ++r)
                    for (std::size_t c = 0; c < d; ++c)
                        exact = exact && maps[l].at(y, x, a * d + c) == fs.seq.at(r, c);
    exact = exact && r == fs.seq.dim(0);
    return {dev <= 1e-10 && exact, "permutation max deviation " + fmt(dev) + " over 20 permutations (tol 1e-10); round-trip " +
                                       (exact ? "exact" : "NOT exact") + " over " + std::to_string(r) + " rows"};
}

Outcome overfit_sanity() {
    Outcome o{true, ""};
    for (const char* name : {"transformer", "cat", "fnet", "mlp_mixer"}) {
        const auto start = std::chrono::steady_clock::now();
        const double lr = analysis::default_overfit_lr(name);
        const auto trace = analysis::overfit_sanity(name, 500, lr, kSeed);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const double frac = trace.back() / trace.front();
        o.passed = o.passed && frac <= 0.10 && secs < 120.0;
        o.detail += std::string(name) + " " + fmt(trace.front()) + "->" + fmt(trace.back()) + " (" +
                    fmt(100.0 * frac) + "%, lr " + fmt(lr) + ", " + fmt(secs) + "s) ";
    }
    o.detail += "seed 42, 500 steps";
    return o;
}

Outcome dft_oracle() {
    Rng rng(kSeed);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 8; ++n)
        for (std::size_t d = 1; d <= 8; ++d) {
            const Tensor x = rng.normal({n, d});
            worst = std::max(worst, max_abs_diff(ops::dft2_real(x), oracle::dft2_real(x)));
        }
    return {worst <= 1e-8, "64 shapes n,d <= 8, max abs deviation " + fmt(worst) + " (tol 1e-8)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"preset_equivalence", 10, preset_equivalence},
        {"gradient_suite", 60, gradient_suite},
        {"complexity_slopes", 300, complexity_slopes},
        {"flop_accounting", 60, flop_accounting},
        {"parameter_accounting", 60, parameter_accounting},
        {"taff_properties", 60, taff_properties},
        {"overfit_sanity", 480, overfit_sanity},
        {"dft_oracle", 60, dft_oracle},
    };
    const std::vector<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = o.passed && secs <= c.budget_s;
        failures += !ok;
        std::cout << (ok ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << fmt(secs) << "s of "
                  << fmt(c.budget_s) << "s budget]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}

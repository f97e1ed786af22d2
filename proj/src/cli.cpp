#include "gformer/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "gformer/analysis.hpp"
#include "gformer/equivalence.hpp"
#include "gformer/gformer.hpp"
#include "gformer/gradcheck.hpp"
#include "gformer/init.hpp"
#include "gformer/taff.hpp"
#include "gformer/tensor_io.hpp"

namespace gformer::cli {

using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

std::vector<std::size_t> parse_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != item.size() || v == 0) throw ConfigError("malformed n list entry '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw ConfigError("empty n list");
    return out;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << text;
}

struct Options {
    std::uint64_t seed = kDefaultSeed;
    std::string preset;
    std::size_t n = 16;
    std::size_t d = 8;
    std::size_t trials = 20;
    double tol = 1e-10;
    double grad_tol = kGradTolerance;
    std::string config_path;
    std::string input_path;
    std::string output_path;
    std::string n_list = "256,512,1024,2048,4096";
    std::size_t reps = 30;
    std::size_t warmup = 5;
    std::string format = "json";
    std::string report_path;
    double min_slope = -1e300;
    double max_slope = 1e300;
    double min_r2 = -1e300;
    std::string levels;
    std::string pyramid_path;
    std::string surrogate_path;
    std::size_t heads = 1;
    std::size_t ffn = 0;
    std::size_t anchors = 1;
    std::size_t steps = 500;
    double lr = -1.0;
};

int cmd_presets(const Options& o, std::ostream& out) {
    PresetDims dims;
    dims.d = o.d;
    dims.shape = {o.n, 1};
    json doc = json::object();
    for (auto name : preset_names()) doc[std::string(name)] = to_json(preset(name, dims));
    out << doc.dump(2) << '\n';
    return kExitOk;
}

int cmd_forward(const Options& o, std::ostream& out) {
    const GFormerConfig config = config_from_json(read_json_file(o.config_path));
    const Tensor x = tensor_from_json(read_json_file(o.input_path));
    const AssembledBlock ab = assemble(config, o.seed);
    write_text(o.output_path, to_json(forward(ab.block, ab.params, x)).dump() + "\n", out);
    return kExitOk;
}

int cmd_equiv(const Options& o, std::ostream& out) {
    const EquivalenceResult r = check_equivalence(o.preset, o.trials, o.seed);
    const bool ok = r.max_deviation <= o.tol;
    out << json{{"preset", o.preset},
                {"trials", r.trials},
                {"tolerance", o.tol},
                {"max_deviation", r.max_deviation},
                {"passed", ok}}
               .dump()
        << '\n';
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
    PresetDims dims;
    dims.d = 4;
    dims.shape = {2, 2};
    dims.heads = 2;
    dims.ffn_hidden = 6;
    dims.token_hidden = 5;
    dims.se_reduction = 2;
    const AssembledBlock ab = assemble(preset(o.preset, dims), o.seed);
    Rng rng(o.seed + 1);
    const Tensor x = rng.normal({dims.shape.n(), dims.d});
    const GradCheckReport report = check_block_gradients(
        [&](const ag::VarMap& p, const ag::Var& in) { return forward(ab.block, p, in); }, ab.params, x,
        o.seed + 2);
    for (const auto& e : report.entries)
        out << e.name << '\t' << e.elements << '\t' << e.max_rel_error << '\n';
    const bool ok = report.passed(o.grad_tol);
    out << "max_rel_error\t" << report.max_rel_error() << '\t' << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_flops(const Options& o, std::ostream& out) {
    out << analysis::count_flops(analysis::bench_config(o.preset, o.n, o.d), o.n) << '\n';
    return kExitOk;
}

int cmd_params(const Options& o, std::ostream& out) {
    const AssembledBlock ab = assemble(analysis::bench_config(o.preset, o.n, o.d), o.seed);
    out << analysis::count_params(ab.params) << '\n';
    return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
    if (o.format != "json" && o.format != "tsv") throw ConfigError("--format must be json or tsv");
    const auto ns = parse_list(o.n_list);
    analysis::BenchOptions opt{o.reps, o.warmup, o.seed};
    const analysis::BenchReport report = analysis::bench_latency(o.preset, o.d, ns, opt);
    write_text(o.output_path,
               o.format == "json" ? analysis::to_json(report).dump(2) + "\n" : analysis::to_tsv(report),
               out);
    return kExitOk;
}

int cmd_scaling(const Options& o, std::ostream& out) {
    const analysis::BenchReport report = analysis::report_from_json(read_json_file(o.report_path));
    const analysis::ScalingFit fit = analysis::fit_report(report);
    const bool ok = fit.slope >= o.min_slope && fit.slope <= o.max_slope && fit.r2 >= o.min_r2;
    out << json{{"preset", report.preset}, {"slope", fit.slope}, {"r2", fit.r2}, {"passed", ok}}.dump()
        << '\n';
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_taff_demo(Options o, std::ostream& out) {
    std::optional<taff::DetectorSurrogate> surrogate;
    std::vector<taff::LevelSpec> specs;
    if (!o.surrogate_path.empty()) {
        surrogate = taff::surrogate_from_json(read_json_file(o.surrogate_path));
        specs = surrogate->levels;
        o.anchors = surrogate->anchors;
        o.d = surrogate->d;
        o.heads = surrogate->heads;
        o.ffn = surrogate->ffn;
    } else if (!o.levels.empty()) {
        specs = taff::parse_level_spec(o.levels);
    }
    if (o.ffn == 0) o.ffn = 2 * o.d;

    taff::FeaturePyramid pyramid;
    if (!o.pyramid_path.empty()) {
        pyramid = taff::pyramid_from_json(read_json_file(o.pyramid_path));
    } else {
        if (specs.empty()) throw ConfigError("taff-demo needs --levels, --pyramid or --surrogate");
        std::vector<SpatialShape> extents;
        std::vector<std::size_t> channels;
        for (const auto& l : specs) {
            extents.push_back(l.extent);
            channels.push_back(l.channels);
        }
        pyramid = taff::random_pyramid(extents, channels, o.anchors, o.seed);
    }
    const std::vector<std::size_t> channels = pyramid.level_channels();
    const BlockParams proj = taff::init_projection_params(channels, pyramid.anchors, o.d, o.seed + 1);
    const BlockParams encoder = taff::init_encoder_params(o.d, o.ffn, o.seed + 2);

    const taff::FusedSequence gathered = taff::gather(pyramid, proj, o.d);
    const taff::FusedSequence fused = taff::fuse(gathered, encoder, o.heads);

    // Layout check: every scattered slot holds the row its index names.
    bool roundtrip_exact = true;
    const auto maps = taff::scatter(gathered);
    for (std::size_t r = 0; r < gathered.index.size(); ++r) {
        const auto& ix = gathered.index[r];
        const Tensor& m = maps[ix.level];
        for (std::size_t c = 0; c < o.d; ++c)
            roundtrip_exact = roundtrip_exact &&
                              m.at(ix.y, ix.x, ix.anchor * o.d + c) == gathered.seq.at(r, c);
    }
    const auto fused_maps = taff::scatter(fused);

    Rng rng(o.seed + 3);
    double perm_dev = 0.0;
    const std::size_t n = gathered.seq.dim(0);
    for (std::size_t t = 0; t < o.trials; ++t) {
        const auto perm = rng.permutation(n);
        taff::FusedSequence permuted = gathered;
        permuted.seq = taff::permute_rows(gathered.seq, perm);
        const Tensor lhs = taff::fuse(permuted, encoder, o.heads).seq;
        const Tensor rhs = taff::permute_rows(fused.seq, perm);
        perm_dev = std::max(perm_dev, max_abs_diff(lhs, rhs));
    }

    BlockParams stack;
    stack.merge(proj);
    stack.merge(encoder, "encoder.");
    const std::uint64_t formula = taff::taff_param_count(o.d, o.heads, o.ffn, channels, pyramid.anchors);
    const std::uint64_t enumerated = analysis::count_params(stack);
    const bool ok = roundtrip_exact && perm_dev <= o.tol && formula == enumerated;

    json levels = json::array();
    for (const auto& m : fused_maps) levels.push_back(m.shape());
    json doc{{"sequence_length", n},
                {"d", o.d},
                {"heads", o.heads},
                {"anchors", pyramid.anchors},
                {"fused_level_shapes", levels},
                {"permutation_trials", o.trials},
                {"permutation_max_deviation", perm_dev},
                {"roundtrip_exact", roundtrip_exact},
                {"taff_param_count", formula},
                {"enumerated_params", enumerated},
                {"passed", ok}};
    if (surrogate) {
        doc["surrogate"] = {{"name", surrogate->name},
                            {"base_params", surrogate->base_param_count()},
                            {"taff_params", surrogate->taff_param_count()},
                            {"relative_overhead", surrogate->relative_overhead()}};
    }
    out << doc.dump(2) << '\n';
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_overfit(const Options& o, std::ostream& out) {
    const double lr = o.lr >= 0.0 ? o.lr : analysis::default_overfit_lr(o.preset);
    const auto trace = analysis::overfit_sanity(o.preset, o.steps, lr, o.seed);
    out << json{{"preset", o.preset},
                {"steps", o.steps},
                {"lr", lr},
                {"seed", o.seed},
                {"initial_loss", trace.front()},
                {"final_loss", trace.back()},
                {"loss", trace}}
               .dump()
        << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"gFormer block toolkit: assembly, oracle checks, FLOP/parameter accounting, "
                 "benchmarks and TAFF fusion"};
    app.name("gformer");
    app.require_subcommand(1);

    Options o;
    if (const char* env = std::getenv("GFORMER_SEED")) {
        try {
            o.seed = std::stoull(env);
        } catch (const std::exception&) {
            err << "GFORMER_SEED is not an unsigned integer: " << env << '\n';
            return kExitUsage;
        }
    }
    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "random seed"); };

    auto* presets = app.add_subcommand("presets", "list preset configs as JSON");
    presets->add_option("--d", o.d, "channel dimension");
    presets->add_option("--n", o.n, "sequence length (flat spatial shape)");

    auto* fwd = app.add_subcommand("forward", "run a block on a tensor file");
    fwd->add_option("--config", o.config_path, "GFormerConfig JSON")->required();
    fwd->add_option("--input", o.input_path, "input tensor JSON")->required();
    fwd->add_option("--output", o.output_path, "output file (default stdout)");
    add_seed(fwd);

    auto* equiv = app.add_subcommand("equiv", "gFormer preset vs reference block");
    equiv->add_option("--preset", o.preset)->required();
    equiv->add_option("--trials", o.trials);
    equiv->add_option("--tol", o.tol);
    add_seed(equiv);

    auto* grad = app.add_subcommand("gradcheck", "finite-difference check per parameter");
    grad->add_option("--preset", o.preset)->required();
    grad->add_option("--tol", o.grad_tol);
    add_seed(grad);

    auto* fl = app.add_subcommand("flops", "closed-form FLOP count");
    auto* pa = app.add_subcommand("params", "parameter count");
    for (auto* sub : {fl, pa}) {
        sub->add_option("--preset", o.preset)->required();
        sub->add_option("--n", o.n)->required();
        sub->add_option("--d", o.d)->required();
    }
    add_seed(pa);

    auto* bench = app.add_subcommand("bench", "latency benchmark report");
    bench->add_option("--preset", o.preset)->required();
    bench->add_option("--n-list", o.n_list, "comma-separated sequence lengths");
    bench->add_option("--reps", o.reps);
    bench->add_option("--warmup", o.warmup);
    bench->add_option("--d", o.d)->default_val(64);
    bench->add_option("--format", o.format, "json or tsv");
    bench->add_option("--output", o.output_path);
    add_seed(bench);

    auto* scaling = app.add_subcommand("scaling", "log-log slope fit of a saved report");
    scaling->add_option("--report", o.report_path)->required();
    scaling->add_option("--min-slope", o.min_slope);
    scaling->add_option("--max-slope", o.max_slope);
    scaling->add_option("--min-r2", o.min_r2);

    auto* taff_demo = app.add_subcommand("taff-demo", "gather -> fuse -> scatter on a pyramid");
    taff_demo->add_option("--levels", o.levels, "HxWxC[,HxWxC...]");
    taff_demo->add_option("--pyramid", o.pyramid_path, "pyramid JSON fixture");
    taff_demo->add_option("--surrogate", o.surrogate_path,
                          "detector surrogate JSON; supplies levels, anchors, d, heads and ffn");
    taff_demo->add_option("--d", o.d, "model dimension");
    taff_demo->add_option("--heads", o.heads, "attention heads");
    taff_demo->add_option("--ffn", o.ffn, "encoder FFN width (default 2*d)");
    taff_demo->add_option("--anchors", o.anchors);
    taff_demo->add_option("--trials", o.trials);
    taff_demo->add_option("--tol", o.tol);
    add_seed(taff_demo);

    auto* overfit = app.add_subcommand("overfit", "SGD overfit sanity run");
    overfit->add_option("--preset", o.preset)->required();
    overfit->add_option("--steps", o.steps);
    overfit->add_option("--lr", o.lr, "learning rate (default: documented per preset)");
    add_seed(overfit);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return kExitOk;
        err << app.help();
        return kExitUsage;
    }

    try {
        if (*presets) return cmd_presets(o, out);
        if (*fwd) return cmd_forward(o, out);
        if (*equiv) return cmd_equiv(o, out);
        if (*grad) return cmd_gradcheck(o, out);
        if (*fl) return cmd_flops(o, out);
        if (*pa) return cmd_params(o, out);
        if (*bench) return cmd_bench(o, out);
        if (*scaling) return cmd_scaling(o, out);
        if (*taff_demo) return cmd_taff_demo(o, out);
        if (*overfit) return cmd_overfit(o, out);
    } catch (const TrainingFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitCheckFailed;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace gformer::cli

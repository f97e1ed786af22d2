#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gformer/analysis.hpp"
#include "gformer/cli.hpp"
#include "gformer/gformer.hpp"
#include "gformer/init.hpp"
#include "gformer/tensor_io.hpp"

using namespace gformer;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / ("gformer_cli_" + name);
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST(Cli, UnknownSubcommandIsUsageError) {
    const auto r = run({"frobnicate"});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE((r.out + r.err).find("Usage"), std::string::npos);
    EXPECT_EQ(run({}).code, cli::kExitUsage);
}

TEST(Cli, MissingRequiredFlag) { EXPECT_EQ(run({"equiv"}).code, cli::kExitUsage); }

TEST(Cli, HelpSucceeds) { EXPECT_EQ(run({"--help"}).code, cli::kExitOk); }

TEST(Cli, PresetsRoundTripThroughConfigParser) {
    const auto r = run({"presets"});
    ASSERT_EQ(r.code, cli::kExitOk);
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc.size(), preset_names().size());
    for (const auto& [name, cfg] : doc.items()) EXPECT_NO_THROW(config_from_json(cfg)) << name;
}

TEST(Cli, EquivPassAndFail) {
    const auto ok = run({"equiv", "--preset", "transformer", "--trials", "20", "--tol", "1e-10"});
    EXPECT_EQ(ok.code, cli::kExitOk);
    EXPECT_TRUE(json::parse(ok.out).contains("max_deviation"));
    EXPECT_EQ(run({"equiv", "--preset", "transformer", "--tol", "-1"}).code, cli::kExitCheckFailed);
    EXPECT_EQ(run({"equiv", "--preset", "resnet"}).code, cli::kExitUsage);
}

TEST(Cli, FlopsMatchesClosedForm) {
    const auto r = run({"flops", "--preset", "cat", "--n", "1024", "--d", "64"});
    ASSERT_EQ(r.code, cli::kExitOk);
    EXPECT_EQ(std::stoull(r.out), analysis::count_flops(analysis::bench_config("cat", 1024, 64), 1024));
    const auto p = run({"params", "--preset", "attention", "--n", "16", "--d", "8"});
    EXPECT_EQ(std::stoull(p.out), 4u * (64 + 8) + 64 + 8);
}

TEST(Cli, GradcheckReportsPerParameter) {
    const auto r = run({"gradcheck", "--preset", "cat"});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_NE(r.out.find("spatial.kernel"), std::string::npos);
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
    EXPECT_EQ(run({"gradcheck", "--preset", "cat", "--tol", "0"}).code, cli::kExitCheckFailed);
}

TEST(Cli, ForwardReadsAndWritesTensorFiles) {
    const auto c = preset("fnet");
    Rng rng(1);
    const Tensor x = rng.normal({16, 8});
    const auto cfg = temp_file("cfg.json", to_json(c).dump());
    const auto in = temp_file("x.json", to_json(x).dump());
    const auto r = run({"forward", "--config", cfg.string(), "--input", in.string(), "--seed", "9"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto ab = assemble(c, 9);
    EXPECT_EQ(max_abs_diff(tensor_from_json(json::parse(r.out)), forward(ab.block, ab.params, x)), 0.0);
    const auto bad = temp_file("bad.json", R"({"shape":[2],"data":[1,2],"dtype":"f64"})");
    EXPECT_EQ(run({"forward", "--config", cfg.string(), "--input", bad.string()}).code, cli::kExitUsage);
}

TEST(Cli, BenchThenScaling) {
    const auto report = std::filesystem::temp_directory_path() / "gformer_cli_report.json";
    const auto b = run({"bench", "--preset", "cat", "--n-list", "8,16,32", "--d", "4", "--output",
                        report.string()});
    ASSERT_EQ(b.code, cli::kExitOk) << b.err;
    const auto s = run({"scaling", "--report", report.string()});
    EXPECT_EQ(s.code, cli::kExitOk);
    EXPECT_TRUE(json::parse(s.out).contains("slope"));
    EXPECT_EQ(run({"scaling", "--report", report.string(), "--min-slope", "10"}).code,
              cli::kExitCheckFailed);
    EXPECT_EQ(run({"bench", "--preset", "cat", "--reps", "3"}).code, cli::kExitUsage);
    EXPECT_EQ(run({"bench", "--preset", "cat", "--n-list", "8,x"}).code, cli::kExitUsage);
    const auto tsv = run({"bench", "--preset", "cat", "--n-list", "8,16,32", "--d", "4", "--format", "tsv"});
    EXPECT_EQ(tsv.out.rfind("# flop convention", 0), 0u);
}

TEST(Cli, TaffDemo) {
    const auto r = run({"taff-demo", "--levels", "4x4x8,2x2x16", "--d", "8", "--heads", "2", "--anchors", "2"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const json doc = json::parse(r.out);
    EXPECT_EQ(doc["sequence_length"], 40);
    EXPECT_TRUE(doc["roundtrip_exact"].get<bool>());
    EXPECT_EQ(doc["taff_param_count"], doc["enumerated_params"]);
    EXPECT_LE(doc["permutation_max_deviation"].get<double>(), 1e-10);
    const auto s = run({"taff-demo", "--surrogate", GFORMER_FIXTURE_DIR "/detector_surrogate.json"});
    ASSERT_EQ(s.code, cli::kExitOk) << s.err;
    EXPECT_GT(json::parse(s.out)["surrogate"]["relative_overhead"].get<double>(), 0.0);
    EXPECT_EQ(run({"taff-demo", "--levels", "4x4", "--d", "8", "--heads", "2"}).code, cli::kExitUsage);
}

TEST(Cli, OverfitTraceAndSeedEnv) {
    const auto a = run({"overfit", "--preset", "cat", "--steps", "3", "--seed", "5"});
    ASSERT_EQ(a.code, cli::kExitOk);
    EXPECT_EQ(json::parse(a.out)["loss"].size(), 4u);
    ::setenv("GFORMER_SEED", "5", 1);
    const auto b = run({"overfit", "--preset", "cat", "--steps", "3"});
    ::unsetenv("GFORMER_SEED");
    EXPECT_EQ(a.out, b.out);
    const auto c = run({"overfit", "--preset", "cat", "--steps", "3"});
    EXPECT_NE(a.out, c.out);
    EXPECT_EQ(run({"overfit", "--preset", "fnet", "--steps", "50", "--lr", "50"}).code,
              cli::kExitCheckFailed);
}

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gformer/analysis.hpp"

namespace gformer::analysis {

using nlohmann::json;

ScalingFit fit_scaling(std::span<const std::pair<double, double>> points) {
    std::set<double> distinct;
    for (const auto& [n, t] : points) {
        if (!(n > 0.0) || !(t > 0.0)) throw NumericError("fit_scaling: n and time must be positive");
        distinct.insert(n);
    }
    if (distinct.size() < 3)
        throw InsufficientDataError("fit_scaling: need at least 3 distinct n values, got " +
                                    std::to_string(distinct.size()));
    const double count = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [n, t] : points) {
        mx += std::log(n);
        my += std::log(t);
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [n, t] : points) {
        const double dx = std::log(n) - mx, dy = std::log(t) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    ScalingFit fit;
    fit.slope = sxy / sxx;
    const double intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (const auto& [n, t] : points) {
        const double r = std::log(t) - (intercept + fit.slope * std::log(n));
        ss_res += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

ScalingFit fit_report(const BenchReport& report) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : report.points)
        pts.emplace_back(static_cast<double>(p.n), p.median_ns);
    return fit_scaling(pts);
}

json to_json(const BenchReport& r) {
    json points = json::array();
    for (const auto& p : r.points) {
        points.push_back({{"n", p.n},
                          {"samples_ns", p.samples_ns},
                          {"median_ns", p.median_ns},
                          {"mad_ns", p.mad_ns},
                          {"flops", p.flops},
                          {"params", p.params}});
    }
    return json{{"flop_convention", std::string(kFlopConvention)},
                {"preset", r.preset},
                {"d", r.d},
                {"reps", r.reps},
                {"warmup", r.warmup},
                {"seed", r.seed},
                {"kernel_backend", r.kernel_backend},
                {"points", points},
                {"slope", r.slope},
                {"r2", r.r2},
                {"warnings", r.warnings}};
}

BenchReport report_from_json(const json& doc) {
    try {
        BenchReport r;
        r.preset = doc.at("preset").get<std::string>();
        r.d = doc.at("d").get<std::size_t>();
        r.reps = doc.at("reps").get<std::size_t>();
        r.warmup = doc.at("warmup").get<std::size_t>();
        r.seed = doc.at("seed").get<std::uint64_t>();
        r.kernel_backend = doc.value("kernel_backend", std::string{});
        for (const auto& p : doc.at("points")) {
            BenchPoint bp;
            bp.n = p.at("n").get<std::size_t>();
            bp.samples_ns = p.at("samples_ns").get<std::vector<double>>();
            bp.median_ns = p.at("median_ns").get<double>();
            bp.mad_ns = p.at("mad_ns").get<double>();
            bp.flops = p.at("flops").get<std::uint64_t>();
            bp.params = p.at("params").get<std::uint64_t>();
            r.points.push_back(std::move(bp));
        }
        r.slope = doc.at("slope").get<double>();
        r.r2 = doc.at("r2").get<double>();
        r.warnings = doc.value("warnings", std::vector<std::string>{});
        return r;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bench report: ") + e.what());
    }
}

std::string to_tsv(const BenchReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << "# flop convention: " << kFlopConvention << '\n';
    os << "preset\tn\tmedian_ns\tmad_ns\tflops\tparams\tslope\tr2\n";
    for (const auto& p : r.points) {
        os << r.preset << '\t' << p.n << '\t' << p.median_ns << '\t' << p.mad_ns << '\t' << p.flops
           << '\t' << p.params << '\t' << r.slope << '\t' << r.r2 << '\n';
    }
    return os.str();
}

}  // namespace gformer::analysis

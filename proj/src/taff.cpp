#include "gformer/taff.hpp"

#include <algorithm>
#include <sstream>

#include "gformer/blocks.hpp"
#include "gformer/init.hpp"

namespace gformer::taff {

using nlohmann::json;

void FeaturePyramid::validate() const {
    if (levels.empty()) throw ConfigError("feature pyramid has no levels");
    if (anchors == 0) throw ConfigError("anchors_per_location must be positive");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& l = levels[i];
        if (l.h == 0 || l.w == 0 || l.c == 0)
            throw ConfigError("pyramid level " + std::to_string(i) + " has a zero extent");
        if (l.map.shape() != Shape{l.h, l.w, l.c})
            throw ConfigError("pyramid level " + std::to_string(i) + " map is " +
                              shape_str(l.map.shape()) + ", expected " +
                              shape_str({l.h, l.w, l.c}));
    }
}

std::size_t FeaturePyramid::sequence_length() const {
    std::size_t positions = 0;
    for (const auto& l : levels) positions += l.h * l.w;
    return anchors * positions;
}

std::vector<std::size_t> FeaturePyramid::level_channels() const {
    std::vector<std::size_t> out;
    for (const auto& l : levels) out.push_back(l.c);
    return out;
}

std::vector<RowIndex> sequence_index(const FeaturePyramid& pyramid) {
    std::vector<RowIndex> index;
    index.reserve(pyramid.sequence_length());
    for (std::size_t i = 0; i < pyramid.levels.size(); ++i)
        for (std::size_t y = 0; y < pyramid.levels[i].h; ++y)
            for (std::size_t x = 0; x < pyramid.levels[i].w; ++x)
                for (std::size_t a = 0; a < pyramid.anchors; ++a) index.push_back({i, y, x, a});
    return index;
}

BlockParams init_projection_params(std::span<const std::size_t> level_channels, std::size_t anchors,
                                   std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    BlockParams p;
    for (std::size_t i = 0; i < level_channels.size(); ++i) {
        const std::string pre = "proj." + std::to_string(i) + ".";
        p.add(pre + "w", rng.fan_in_uniform({level_channels[i], d}, level_channels[i]));
        p.add(pre + "anchor_bias", rng.fan_in_uniform({anchors, d}, level_channels[i]));
    }
    return p;
}

BlockParams init_encoder_params(std::size_t d, std::size_t ffn_hidden, std::uint64_t seed) {
    Rng rng(seed);
    BlockParams p;
    p.add("norm1.gamma", Tensor::ones({d}));
    p.add("norm1.beta", Tensor::zeros({d}));
    for (const char* which : {"q", "k", "v", "o"}) {
        p.add(std::string("spatial.w") + which, rng.fan_in_uniform({d, d}, d));
        p.add(std::string("spatial.b") + which, rng.fan_in_uniform({d}, d));
    }
    p.add("norm2.gamma", Tensor::ones({d}));
    p.add("norm2.beta", Tensor::zeros({d}));
    p.add("channel.w1", rng.fan_in_uniform({d, ffn_hidden}, d));
    p.add("channel.b1", rng.fan_in_uniform({ffn_hidden}, d));
    p.add("channel.w2", rng.fan_in_uniform({ffn_hidden, d}, ffn_hidden));
    p.add("channel.b2", rng.fan_in_uniform({d}, ffn_hidden));
    return p;
}

ag::Var gather(std::span<const ag::Var> level_maps, std::size_t anchors, const ag::VarMap& proj,
               std::size_t d) {
    if (level_maps.empty()) throw ConfigError("gather: no pyramid levels");
    std::vector<ag::Var> parts;
    parts.reserve(level_maps.size());
    for (std::size_t i = 0; i < level_maps.size(); ++i) {
        const Shape& s = level_maps[i].shape();
        if (s.size() != 3) throw DimensionError("gather: level map must be [H, W, C]");
        const std::size_t positions = s[0] * s[1], c = s[2];
        const std::string pre = "proj." + std::to_string(i) + ".";
        if (!proj.contains(pre + "w") || !proj.contains(pre + "anchor_bias"))
            throw ConfigError("gather: missing projection for pyramid level " + std::to_string(i));
        const ag::Var& w = proj.get(pre + "w");
        const ag::Var& bias = proj.get(pre + "anchor_bias");
        if (w.shape() != Shape{c, d})
            throw ConfigError("gather: " + pre + "w is " + shape_str(w.shape()) + ", expected " +
                              shape_str({c, d}));
        if (bias.shape() != Shape{anchors, d})
            throw ConfigError("gather: " + pre + "anchor_bias is " + shape_str(bias.shape()) +
                              ", expected " + shape_str({anchors, d}));
        const ag::Var projected = ag::matmul(ag::reshape(level_maps[i], {positions, c}), w);
        parts.push_back(ag::add(ag::repeat_rows(projected, anchors), ag::tile_rows(bias, positions)));
    }
    return parts.size() == 1 ? parts.front() : ag::concat_rows(parts);
}

FusedSequence gather(const FeaturePyramid& pyramid, const BlockParams& proj_params, std::size_t d) {
    pyramid.validate();
    ag::NoGradGuard guard;
    std::vector<ag::Var> maps;
    for (const auto& l : pyramid.levels) maps.push_back(ag::constant(l.map));
    FusedSequence fs;
    fs.seq = gather(maps, pyramid.anchors, ag::VarMap::bind(proj_params, false), d).value();
    fs.index = sequence_index(pyramid);
    for (const auto& l : pyramid.levels) fs.extents.push_back({l.h, l.w});
    fs.anchors = pyramid.anchors;
    return fs;
}

ag::Var fuse(const ag::Var& seq, const ag::VarMap& encoder, std::size_t heads) {
    if (seq.shape().size() != 2) throw DimensionError("fuse: sequence must be [n, d]");
    const std::size_t d = seq.shape()[1];
    if (heads == 0 || d % heads != 0)
        throw ConfigError("fuse: heads (" + std::to_string(heads) + ") does not divide d (" +
                          std::to_string(d) + ")");
    const Shape& w1 = encoder.get("channel.w1").shape();
    if (w1.size() != 2) throw ConfigError("fuse: channel.w1 must be a matrix");
    return blocks::transformer_encoder_layer(seq, encoder, heads, w1[1]);
}

FusedSequence fuse(const FusedSequence& fs, const BlockParams& encoder_params, std::size_t heads) {
    ag::NoGradGuard guard;
    FusedSequence out = fs;
    out.seq = fuse(ag::constant(fs.seq), ag::VarMap::bind(encoder_params, false), heads).value();
    return out;
}

std::vector<Tensor> scatter(const FusedSequence& fs) {
    if (fs.seq.rank() != 2) throw IntegrityError("scatter: sequence is not [n, d]");
    const std::size_t n = fs.seq.dim(0), d = fs.seq.dim(1), a_count = fs.anchors;
    std::size_t expected = 0;
    for (const auto& e : fs.extents) expected += e.n() * a_count;
    if (fs.index.size() != n || expected != n)
        throw IntegrityError("scatter: index covers " + std::to_string(fs.index.size()) +
                             " rows, sequence has " + std::to_string(n) + ", pyramid implies " +
                             std::to_string(expected));
    std::vector<std::vector<double>> out;
    std::vector<std::vector<bool>> filled;
    for (const auto& e : fs.extents) {
        out.emplace_back(e.n() * a_count * d, 0.0);
        filled.emplace_back(e.n() * a_count, false);
    }
    for (std::size_t r = 0; r < n; ++r) {
        const RowIndex& ix = fs.index[r];
        if (ix.level >= fs.extents.size() || ix.y >= fs.extents[ix.level].h ||
            ix.x >= fs.extents[ix.level].w || ix.anchor >= a_count)
            throw IntegrityError("scatter: row " + std::to_string(r) + " points outside the pyramid");
        const std::size_t slot = (ix.y * fs.extents[ix.level].w + ix.x) * a_count + ix.anchor;
        if (filled[ix.level][slot])
            throw IntegrityError("scatter: two rows map to the same coordinate (row " +
                                 std::to_string(r) + ")");
        filled[ix.level][slot] = true;
        std::copy_n(fs.seq.raw() + r * d, d, out[ix.level].begin() + slot * d);
    }
    std::vector<Tensor> maps;
    for (std::size_t i = 0; i < fs.extents.size(); ++i)
        maps.emplace_back(Shape{fs.extents[i].h, fs.extents[i].w, a_count * d}, std::move(out[i]));
    return maps;
}

std::uint64_t taff_param_count(std::size_t d, std::size_t /*heads*/, std::size_t ffn_hidden,
                               std::span<const std::size_t> level_channels, std::size_t anchors) {
    std::uint64_t total = 0;
    for (auto c : level_channels) total += c * d + anchors * d;
    total += 4 * (d * d + d);
    total += d * ffn_hidden + ffn_hidden;
    total += ffn_hidden * d + d;
    total += 2 * (2 * d);
    return total;
}

Tensor permute_rows(const Tensor& x, std::span<const std::size_t> perm) {
    if (x.rank() != 2 || perm.size() != x.dim(0))
        throw DimensionError("permute_rows: permutation of length " + std::to_string(perm.size()) +
                             " for " + shape_str(x.shape()));
    const std::size_t d = x.dim(1);
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (perm[i] >= perm.size()) throw DimensionError("permute_rows: index out of range");
        std::copy_n(x.raw() + perm[i] * d, d, out.begin() + i * d);
    }
    return Tensor(x.shape(), std::move(out));
}

FeaturePyramid random_pyramid(std::span<const SpatialShape> extents,
                              std::span<const std::size_t> channels, std::size_t anchors,
                              std::uint64_t seed) {
    if (extents.size() != channels.size())
        throw ConfigError("random_pyramid: extents and channels differ in length");
    Rng rng(seed);
    FeaturePyramid p;
    p.anchors = anchors;
    for (std::size_t i = 0; i < extents.size(); ++i)
        p.levels.push_back({extents[i].h, extents[i].w, channels[i],
                            rng.normal({extents[i].h, extents[i].w, channels[i]})});
    p.validate();
    return p;
}

std::vector<LevelSpec> parse_level_spec(const std::string& spec) {
    std::vector<LevelSpec> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t h = 0, w = 0, c = 0;
        char x1 = 0, x2 = 0;
        std::istringstream is(item);
        if (!(is >> h >> x1 >> w >> x2 >> c) || x1 != 'x' || x2 != 'x' || !is.eof() || !h || !w || !c)
            throw ConfigError("malformed level spec '" + item + "', expected HxWxC");
        out.push_back({{h, w}, c});
    }
    if (out.empty()) throw ConfigError("empty level spec");
    return out;
}

json to_json(const FeaturePyramid& pyramid) {
    json levels = json::array();
    for (const auto& l : pyramid.levels)
        levels.push_back({{"h", l.h}, {"w", l.w}, {"c", l.c}, {"data", l.map.to_vector()}});
    return json{{"levels", levels}, {"anchors", pyramid.anchors}};
}

FeaturePyramid pyramid_from_json(const json& doc) {
    try {
        if (!doc.is_object()) throw ConfigError("pyramid: expected a JSON object");
        for (const auto& [key, _] : doc.items())
            if (key != "levels" && key != "anchors")
                throw ConfigError("pyramid: unknown key '" + key + "'");
        FeaturePyramid p;
        p.anchors = doc.at("anchors").get<std::size_t>();
        for (const auto& l : doc.at("levels")) {
            for (const auto& [key, _] : l.items())
                if (key != "h" && key != "w" && key != "c" && key != "data")
                    throw ConfigError("pyramid level: unknown key '" + key + "'");
            const auto h = l.at("h").get<std::size_t>();
            const auto w = l.at("w").get<std::size_t>();
            const auto c = l.at("c").get<std::size_t>();
            auto data = l.at("data").get<std::vector<double>>();
            if (data.size() != h * w * c)
                throw ConfigError("pyramid level data has " + std::to_string(data.size()) +
                                  " values, expected " + std::to_string(h * w * c));
            p.levels.push_back({h, w, c, Tensor({h, w, c}, std::move(data))});
        }
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("pyramid: ") + e.what());
    }
}

std::vector<std::size_t> DetectorSurrogate::level_channels() const {
    std::vector<std::size_t> out;
    for (const auto& l : levels) out.push_back(l.channels);
    return out;
}

std::uint64_t DetectorSurrogate::base_param_count() const {
    std::uint64_t total = 0;
    for (const auto& [name, shape] : base_layers) total += shape_size(shape);
    return total;
}

std::uint64_t DetectorSurrogate::taff_param_count() const {
    return taff::taff_param_count(d, heads, ffn, level_channels(), anchors);
}

double DetectorSurrogate::relative_overhead() const {
    const std::uint64_t base = base_param_count();
    if (base == 0) throw ConfigError("detector surrogate has no base parameters");
    return static_cast<double>(taff_param_count()) / static_cast<double>(base);
}

DetectorSurrogate surrogate_from_json(const json& doc) {
    static constexpr std::string_view kKeys[] = {"name", "levels", "anchors", "d",
                                                 "heads", "ffn", "base_layers"};
    try {
        if (!doc.is_object()) throw ConfigError("surrogate: expected a JSON object");
        for (const auto& [key, _] : doc.items())
            if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys))
                throw ConfigError("surrogate: unknown key '" + key + "'");
        DetectorSurrogate s;
        s.name = doc.at("name").get<std::string>();
        s.levels = parse_level_spec(doc.at("levels").get<std::string>());
        s.anchors = doc.at("anchors").get<std::size_t>();
        s.d = doc.at("d").get<std::size_t>();
        s.heads = doc.at("heads").get<std::size_t>();
        s.ffn = doc.at("ffn").get<std::size_t>();
        for (const auto& layer : doc.at("base_layers")) {
            for (const auto& [key, _] : layer.items())
                if (key != "name" && key != "shape")
                    throw ConfigError("surrogate layer: unknown key '" + key + "'");
            s.base_layers.emplace_back(layer.at("name").get<std::string>(),
                                       layer.at("shape").get<Shape>());
        }
        if (s.anchors == 0 || s.d == 0 || s.heads == 0 || s.d % s.heads != 0)
            throw ConfigError("surrogate: need anchors > 0 and heads dividing d");
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("surrogate: ") + e.what());
    }
}

}  // namespace gformer::taff

#pragma once

// Multi-resolution anchor-feature fusion with one transformer encoder layer.
//
// gather() projects every (level, location, anchor) of a feature pyramid to a
// common d-dimensional row; fuse() runs a positional-encoding-free encoder over
// the whole sequence; scatter() lays the rows back out per level.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gformer/autograd.hpp"
#include "gformer/mixers.hpp"
#include "gformer/params.hpp"

namespace gformer::taff {

struct PyramidLevel {
    std::size_t h = 1;
    std::size_t w = 1;
    std::size_t c = 1;
    Tensor map;  // [h, w, c]
};

struct FeaturePyramid {
    std::vector<PyramidLevel> levels;
    std::size_t anchors = 1;

    // Throws ConfigError on empty levels, zero extents or a map of the wrong shape.
    void validate() const;
    std::size_t sequence_length() const;
    std::vector<std::size_t> level_channels() const;
};

struct RowIndex {
    std::size_t level = 0;
    std::size_t y = 0;
    std::size_t x = 0;
    std::size_t anchor = 0;
    friend bool operator==(const RowIndex&, const RowIndex&) = default;
};

struct FusedSequence {
    Tensor seq;                          // [n, d]
    std::vector<RowIndex> index;         // row -> source coordinate
    std::vector<SpatialShape> extents;   // per level
    std::size_t anchors = 1;
};

// Row order: level-major, then row-major location, anchor-minor.
std::vector<RowIndex> sequence_index(const FeaturePyramid& pyramid);

// Per level i: proj.<i>.w [C_i, d] and proj.<i>.anchor_bias [A, d].
BlockParams init_projection_params(std::span<const std::size_t> level_channels, std::size_t anchors,
                                   std::size_t d, std::uint64_t seed);
// Encoder layer parameters with the transformer block's names.
BlockParams init_encoder_params(std::size_t d, std::size_t ffn_hidden, std::uint64_t seed);

// Each anchor row is the location's projected feature plus that anchor's bias.
FusedSequence gather(const FeaturePyramid& pyramid, const BlockParams& proj_params, std::size_t d);
ag::Var gather(std::span<const ag::Var> level_maps, std::size_t anchors, const ag::VarMap& proj_params,
               std::size_t d);

// The encoder's FFN width is read from channel.w1.
FusedSequence fuse(const FusedSequence& fs, const BlockParams& encoder_params, std::size_t heads);
ag::Var fuse(const ag::Var& seq, const ag::VarMap& encoder_params, std::size_t heads);

// Per level [H_i, W_i, A * d]; throws IntegrityError when the index is not a
// bijection onto the sequence rows.
std::vector<Tensor> scatter(const FusedSequence& fs);

// Projections sum_i (C_i d + A d) + attention 4(d^2 + d) + FFN (d h + h) + (h d + d)
// + two layer norms 2(2d). With A = 1 the projection term is sum_i (C_i d + d).
std::uint64_t taff_param_count(std::size_t d, std::size_t heads, std::size_t ffn_hidden,
                               std::span<const std::size_t> level_channels, std::size_t anchors = 1);

// out[i] = x[perm[i]] for an [n, d] sequence.
Tensor permute_rows(const Tensor& x, std::span<const std::size_t> perm);

FeaturePyramid random_pyramid(std::span<const SpatialShape> extents,
                              std::span<const std::size_t> channels, std::size_t anchors,
                              std::uint64_t seed);

struct LevelSpec {
    SpatialShape extent;
    std::size_t channels;
};
// "HxWxC[,HxWxC...]"; throws ConfigError on malformed input.
std::vector<LevelSpec> parse_level_spec(const std::string& spec);

// {"levels":[{"h":..,"w":..,"c":..,"data":[...]}],"anchors":A}
nlohmann::json to_json(const FeaturePyramid& pyramid);
FeaturePyramid pyramid_from_json(const nlohmann::json& doc);

// A detector described only by its parameter tensors, plus the TAFF layer that
// would be inserted between its neck and heads.
struct DetectorSurrogate {
    std::string name;
    std::vector<LevelSpec> levels;
    std::size_t anchors = 1;
    std::size_t d = 0;
    std::size_t heads = 1;
    std::size_t ffn = 0;
    std::vector<std::pair<std::string, Shape>> base_layers;

    std::vector<std::size_t> level_channels() const;
    std::uint64_t base_param_count() const;
    std::uint64_t taff_param_count() const;
    // TAFF parameters divided by the base detector's.
    double relative_overhead() const;
};

// {"name":..,"levels":"HxWxC,..","anchors":A,"d":D,"heads":H,"ffn":F,
//  "base_layers":[{"name":..,"shape":[..]}]}; unknown keys are rejected.
DetectorSurrogate surrogate_from_json(const nlohmann::json& doc);

}  // namespace gformer::taff

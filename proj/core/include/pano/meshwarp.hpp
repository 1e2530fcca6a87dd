#pragma once

// Local alignment of a target layer against a reference layer on the canvas.
// The overlap is cut into horizontal strips of blocks; each block finds the
// horizontal displacement d that maximizes NCC between reference(p) and
// target(p + (d, 0)). Strips are grouped into regions of consistent
// disparity, refined from each region's most confident strip, and turned
// into per-region affine models that deform a mesh over the target layer.

#include "pano/geometry.hpp"
#include "pano/image.hpp"
#include "pano/warp.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace pano {

struct DegenerateBlockError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct RankDeficientError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kNccEpsilon = 1e-8;

/// Zero-mean normalized cross-correlation of two equally sized samples.
/// Throws DegenerateBlockError when either standard deviation is <= 1e-8
/// and std::invalid_argument on a size mismatch.
double ncc(std::span<const double> a, std::span<const double> b);

/// Non-throwing variant; nullopt for degenerate input.
std::optional<double> try_ncc(std::span<const double> a, std::span<const double> b);

/// Strips and blocks tiling a box. Edge blocks are clipped to the box.
struct BlockGrid {
    Box box;
    int block_width = 32;
    int block_height = 32;

    BlockGrid() = default;
    BlockGrid(Box box, int block_width, int block_height);

    int strips() const;
    int blocks_per_strip() const;
    Box strip(int i) const;
    Box block(int i, int j) const;
};

struct ConfidenceWeights {
    double consistency = 0.4;
    double support = 0.2;
    double similarity = 0.4;
};

struct MeshWarpParams {
    int block_width = 32;
    int block_height = 32;
    int search_radius = 32;
    double disparity_threshold = 2.0;
    double consistency_scale = 2.0;
    ConfidenceWeights weights;
};

/// Result of matching one block.
struct BlockMatch {
    bool matched = false;
    int disparity = 0;
    double score = 0.0;      ///< NCC at the chosen disparity
    double support = 0.0;    ///< fraction of block pixels valid in both layers
    double confidence = 0.0;
};

/// Best integer displacement of a reference block into the target within
/// [-radius, radius]. Candidates are visited as 0, -1, +1, -2, +2, ... and
/// only a strictly better score replaces the incumbent, so ties go to the
/// smaller |d| and then to the negative side. nullopt when every candidate
/// is degenerate.
struct DisparityMatch {
    int disparity = 0;
    double score = 0.0;
    double support = 0.0;
};
std::optional<DisparityMatch> initial_disparity(const GrayImage &reference, const Mask &reference_valid,
                                                const GrayImage &target, const Mask &target_valid, Box block,
                                                int radius);

/// weights.consistency * exp(-|d - mean| / scale) + weights.support * support
/// + weights.similarity * max(score, 0). A missing score contributes 0.
double confidence(double disparity, double neighborhood_mean, double support, std::optional<double> score,
                  const ConfidenceWeights &weights = {}, double scale = 2.0);

/// Inclusive range of strip indices.
struct Region {
    int first = 0;
    int last = 0;
    bool operator==(const Region &) const = default;
};

/// Greedy top-to-bottom grouping: a row joins the current region iff its
/// disparity is within `threshold` of the region mean.
std::vector<Region> group_regions(std::span<const double> row_disparities, double threshold = 2.0);

struct ExpansionResult {
    std::vector<int> disparities;
    std::vector<double> scores;
    int sweeps = 0;
    /// Sum of row scores after each sweep.
    std::vector<double> total_score;
};

/// Refines per-row disparities inside each region. The seed row is the
/// region's most confident row; the other rows are re-matched over whole
/// strips with candidates restricted to seed +/- threshold, walking outward
/// from the seed, and a row changes only when its score strictly improves.
/// Sweeps repeat until no row changes.
ExpansionResult expand_regions(const GrayImage &reference, const Mask &reference_valid, const GrayImage &target,
                               const Mask &target_valid, const BlockGrid &grid, std::span<const Region> regions,
                               std::span<const int> row_disparities, std::span<const double> row_confidences,
                               double threshold = 2.0);

/// p' = A p + t.
struct AffineModel {
    Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
    Vec2 offset = Vec2::Zero();
    int region = -1;

    Vec2 apply(const Vec2 &p) const { return linear * p + offset; }
    static AffineModel translation(const Vec2 &t, int region = -1);
};

/// Least-squares affine fit. Throws RankDeficientError for fewer than three
/// points or collinear points, std::invalid_argument on a size mismatch.
AffineModel fit_affine(std::span<const Vec2> from, std::span<const Vec2> to);

/// Vertex positions of a deformation mesh. Each vertex stores the location
/// in the source layer that lands on it.
struct DeformMesh {
    std::vector<double> xs;
    std::vector<double> ys;
    Grid<Vec2> source;
};

/// Mesh over the whole canvas with vertices on the block-grid lines. Vertices
/// on strips of a region take that region's model (models[k] belongs to
/// regions[k]); all others stay at identity.
DeformMesh build_mesh(int width, int height, const BlockGrid &grid, std::span<const Region> regions,
                      std::span<const AffineModel> models);

/// Resamples color and validity through the mesh. Sets `foldover` when a
/// cell's mapping reverses orientation; the warp is applied regardless.
WarpedLayer apply_mesh_warp(const WarpedLayer &layer, const DeformMesh &mesh);
WarpedLayer apply_mesh_warp(const WarpedLayer &layer, const BlockGrid &grid, std::span<const Region> regions,
                            std::span<const AffineModel> models);

struct MeshWarpResult {
    BlockGrid grid;
    std::vector<BlockMatch> blocks;  ///< strips() x blocks_per_strip(), row-major
    std::vector<std::optional<int>> row_disparity;
    std::vector<double> row_confidence;
    std::vector<Region> regions;
    ExpansionResult expansion;
    std::vector<AffineModel> models;
    WarpedLayer warped;
    bool applied = false;
};

/// Full local alignment of `target` against `reference`. Returns the target
/// unchanged (applied = false) when the layers do not overlap or no strip
/// finds a match.
MeshWarpResult mesh_align(const WarpedLayer &reference, const WarpedLayer &target, const MeshWarpParams &params = {});

/// Mean absolute luminance difference over the pixels valid in both layers;
/// nullopt when they do not overlap.
std::optional<double> overlap_mae(const WarpedLayer &a, const WarpedLayer &b);

}  // namespace pano

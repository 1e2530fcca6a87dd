#pragma once

// Multi-image seam selection. Every canvas pixel covered by two or more
// warped layers receives the label of the layer it will be taken from. The
// labeling minimizes
//
//   E = sum_p D(p, M(p)) + sum_{(p,q) 4-adjacent} V(p, q, M(p), M(q))
//
// where D is 0 for a layer valid at p and a large surrogate for infinity
// otherwise, and V is 0 for equal labels and C_ab(p) + C_ab(q) for labels
// a != b, with C_ab = F_color + F_gradient * F_ratio computed for the
// specific layer pair {a, b}.

#include "pano/image.hpp"
#include "pano/warp.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace pano {

inline constexpr int kNoLabel = -1;
/// Finite stand-in for an infinite data cost.
inline constexpr double kInfiniteCost = 1e12;

using LabelMap = Grid<int>;

struct CostParams {
    double ratio_alpha = 4.0;
    int ratio_window = 5;
    double ratio_eps = 1e-6;
};

/// Pairwise cost maps restricted to a canvas box. Values outside the pair's
/// overlap are 0 (color, gradient, cost) and 1 (ratio).
struct CostMaps {
    Box box;
    Mask overlap;
    ScalarMap color;
    ScalarMap gradient;
    ScalarMap ratio;
    ScalarMap cost;
};

/// ||I_a(p) - I_b(p)|| over RGB on the pair overlap, 0 elsewhere. Canvas-sized.
ScalarMap color_diff_map(const WarpedLayer &a, const WarpedLayer &b);

/// |grad I_a| + |grad I_b| on the pair overlap, 0 elsewhere. Gradients are
/// 3x3 Sobel responses on luminance scaled by 1/8; taps that fall outside a
/// layer's valid region read the center value instead.
ScalarMap gradient_map(const WarpedLayer &a, const WarpedLayer &b);

/// 1 + alpha * s_w(p) / (mean(s_w) + eps) where s_w is the standard deviation
/// of `color_diff` over the overlap pixels of a w x w window and the mean is
/// taken over the overlap. 1 outside the overlap.
ScalarMap texture_ratio_map(const ScalarMap &color_diff, const Mask &overlap, const CostParams &params = {});

inline double pixel_cost(double f_color, double f_gradient, double f_ratio) { return f_color + f_gradient * f_ratio; }

/// All pairwise maps, restricted to `box` (whole canvas when box is empty).
CostMaps compute_cost_maps(const WarpedLayer &a, const WarpedLayer &b, const CostParams &params = {}, Box box = {});

/// Holds the layers and a lazily filled, thread-safe cache of per-pair costs.
/// The layers must outlive the problem.
class SeamProblem {
public:
    static constexpr int kMaxLayers = 64;

    explicit SeamProblem(std::span<const WarpedLayer> layers, CostParams params = {});

    int width() const { return width_; }
    int height() const { return height_; }
    int layer_count() const { return static_cast<int>(layers_.size()); }
    std::span<const WarpedLayer> layers() const { return layers_; }
    const CostParams &params() const { return params_; }

    bool valid(int layer, int x, int y) const { return (coverage_bits_(x, y) >> layer) & 1u; }
    std::uint64_t coverage_bits(int x, int y) const { return coverage_bits_(x, y); }
    int coverage_count(int x, int y) const;

    /// 0 when `label` is valid at (x, y), kInfiniteCost otherwise.
    double data(int x, int y, int label) const;

    /// C_ab at (x, y); 0 outside the overlap of a and b.
    double cost(int a, int b, int x, int y) const;

    /// V for two 4-adjacent pixels p and q with labels lp and lq.
    double smoothness(int px, int py, int qx, int qy, int lp, int lq) const;

    /// E = data + smoothness over the whole canvas. A kNoLabel pixel that some
    /// layer covers costs kInfiniteCost.
    double total_energy(const LabelMap &labels) const;

    /// Maps for one layer pair, computed on first use.
    const CostMaps &pair_maps(int a, int b) const;

    /// Fills the cache for every overlapping pair in parallel.
    void precompute_pairs() const;

    /// Pairs (a < b) with a nonempty overlap, in lexicographic order.
    const std::vector<std::pair<int, int>> &overlapping_pairs() const { return pairs_; }

    Mask coverage() const;

private:
    std::span<const WarpedLayer> layers_;
    CostParams params_;
    int width_ = 0;
    int height_ = 0;
    Grid<std::uint64_t> coverage_bits_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<Box> pair_boxes_;

    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<int, int>, std::unique_ptr<CostMaps>> cache_;
};

struct SeamLabeling {
    LabelMap labels;
    /// total_energy(labels), evaluated on the returned labeling.
    double energy = 0.0;
    /// Energy before optimization followed by the energy after each accepted
    /// expansion move.
    std::vector<double> energy_history;
    int sweeps = 0;
    int accepted_moves = 0;
    int components = 0;
};

struct SeamSolverOptions {
    /// Safety cap on label sweeps per component.
    int max_sweeps = 100;
    /// Components with three or more candidate labels are also solved from
    /// one extra start per label (that label wherever valid) and the lowest
    /// energy wins.
    bool restarts = true;
};

/// Alpha-expansion with a max-flow solve per move. Pixels covered by a
/// single layer are fixed to it; each 4-connected component of multiply
/// covered pixels is optimized on its own, starting from the lowest-index
/// covering layer. A sweep of expansions that yields no strict decrease is
/// followed by alpha-beta swaps over all label pairs; the component ends
/// when neither finds an improvement.
SeamLabeling solve_labels(const SeamProblem &problem, const SeamSolverOptions &options = {});

/// Seam-free fallback: every covered pixel takes its lowest-index valid layer.
SeamLabeling first_valid_labeling(const SeamProblem &problem);

/// mask_i(p) = 1 iff label(p) = i.
std::vector<Mask> labels_to_masks(const LabelMap &labels, int layer_count);

/// Label map rendered with one distinct color per source, black where empty.
ColorImage label_visualization(const LabelMap &labels, int layer_count);

}  // namespace pano

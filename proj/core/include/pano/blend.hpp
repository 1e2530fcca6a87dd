#pragma once

#include "pano/image.hpp"
#include "pano/warp.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pano {

enum class BlendMode { None, Feather, Multiband };

std::string blend_mode_name(BlendMode mode);
/// Accepts "none", "feather" and "multiband".
BlendMode blend_mode_from_name(std::string_view name);

struct BlendConfig {
    BlendMode mode = BlendMode::Feather;
    /// Pyramid levels for multiband; 0 picks a default from the overlap size.
    int bands = 0;
    /// Exponent applied to feather distances.
    double feather_sharpness = 1.0;
    /// How far (pixels) a layer's weight reaches past its own seam.
    double feather_radius = 16.0;
    Rgb background = Rgb::Zero();
};

struct BlendResult {
    ColorImage image;
    /// Union of the layers' validity masks.
    Mask coverage;
};

/// Exact Euclidean distance from every pixel to the nearest set pixel of
/// `features` (pixel centers). +infinity when `features` is empty.
ScalarMap distance_transform(const Mask &features);

/// Largest band count the canvas supports: floor(log2(min(w, h))).
int max_bands(int width, int height);

/// min(5, floor(log2(min overlap extent))) over all overlapping layer pairs,
/// at least 1 and never above max_bands.
int default_bands(std::span<const WarpedLayer> layers);

/// Per-layer feather weights. Inside its own seam mask a layer's distance is
/// its distance to the seam; outside it falls off linearly and vanishes
/// `radius` pixels past the seam. Both are capped by the distance to the
/// layer's validity boundary. weight_i = d_i^s / sum_j d_j^s, which sums to 1
/// on every covered pixel.
std::vector<ScalarMap> feather_weights(std::span<const Mask> masks, std::span<const WarpedLayer> layers,
                                       double sharpness = 1.0, double radius = 16.0);

/// Convex combination of layer colors under feather_weights.
BlendResult feather_blend(std::span<const WarpedLayer> layers, std::span<const Mask> masks,
                          const BlendConfig &config = {});

/// Every pixel takes the color of the layer whose mask is set there.
BlendResult hard_blend(std::span<const WarpedLayer> layers, std::span<const Mask> masks,
                       const BlendConfig &config = {});

/// Laplacian levels followed by the low-pass residual; levels.size() == bands.
struct LaplacianPyramid {
    std::vector<ColorImage> levels;
};

/// One Gaussian step: 5-tap binomial blur, then keep even pixels.
ColorImage pyramid_reduce(const ColorImage &image);
ScalarMap pyramid_reduce(const ScalarMap &map);
/// Zero-insertion upsampling to (width, height) followed by the same blur
/// (scaled by 4).
ColorImage pyramid_expand(const ColorImage &image, int width, int height);

/// Throws std::invalid_argument when bands < 1 or the image is too small.
LaplacianPyramid build_laplacian_pyramid(const ColorImage &image, int bands);
ColorImage collapse_pyramid(const LaplacianPyramid &pyramid);

/// Band-wise blend of Laplacian pyramids with Gaussian-pyramid mask weights.
/// Colors are extended past each layer's support by nearest valid value
/// before the pyramids are built. Output clamped to [0, 1].
BlendResult multiband_blend(std::span<const WarpedLayer> layers, std::span<const Mask> masks,
                            const BlendConfig &config = {});

/// Dispatches on config.mode.
BlendResult blend_layers(std::span<const WarpedLayer> layers, std::span<const Mask> masks,
                         const BlendConfig &config = {});

}  // namespace pano

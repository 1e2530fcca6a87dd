#pragma once

#include "pano/bundle.hpp"
#include "pano/geometry.hpp"
#include "pano/image.hpp"
#include "pano/warp.hpp"

#include <random>
#include <vector>

namespace pano::fixtures {

/// Uniformly distributed unit vector.
Vec3 random_unit(std::mt19937_64 &rng);

/// Uniformly distributed rotation.
Rotation random_rotation(std::mt19937_64 &rng);

/// Rotation by a uniformly random axis and an angle drawn from [0, max_angle].
Rotation random_jitter(std::mt19937_64 &rng, double max_angle);

/// Random pinhole camera of the given size with focal in [lo, hi] and a
/// principal point within 10% of the center.
Camera random_camera(std::mt19937_64 &rng, int width, int height, double focal_lo, double focal_hi);

/// Matches between camera pairs generated from the true cameras: `per_pair`
/// random pixels of camera i whose reprojection lands inside camera j.
MatchSet synthesize_matches(const std::vector<Camera> &cameras, const std::vector<std::pair<int, int>> &pairs,
                            int per_pair, std::mt19937_64 &rng);

/// Grayscale textured image with detail down to a few pixels.
ColorImage textured_image(int width, int height, unsigned seed);

/// Reference/target pair on a canvas where the target shows the reference
/// content shifted right by `top_shift` px in the upper half and
/// `bottom_shift` px in the lower half. The reference covers
/// [0, ref_end) and the target [target_begin, width).
struct ParallaxPair {
    WarpedLayer reference;
    WarpedLayer target;
};
ParallaxPair two_plane_pair(int width, int height, int ref_end, int target_begin, int top_shift, int bottom_shift,
                            unsigned seed = 11);

/// Layer with the given color and validity everywhere it is set.
WarpedLayer constant_layer(int width, int height, const Rgb &color, const Mask &valid, int index = 0);

}  // namespace pano::fixtures

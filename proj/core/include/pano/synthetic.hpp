#pragma once

#include "pano/geometry.hpp"
#include "pano/image.hpp"

#include <cstdint>
#include <vector>

namespace pano {

/// Smooth, seamless color texture on the sphere stored as an ERP image
/// (width = 2 * height). Built from a fixed set of plane waves over 3D
/// directions, so it is continuous across the date line and the poles.
/// `max_frequency` bounds the spatial frequency in cycles per radian.
ColorImage procedural_erp(int width, int height, std::uint32_t seed = 7, double max_frequency = 6.0);

/// Bilinear ERP lookup that wraps horizontally and clamps vertically.
Rgb sample_erp(const ColorImage &erp, double u, double v);

/// Intrinsics with the principal point at the image center and the given
/// horizontal field of view (radians).
Intrinsics intrinsics_from_fov(int width, int height, double horizontal_fov);

/// Renders one perspective view per camera by looking up every pixel's ray
/// in the ERP. Throws std::invalid_argument unless width = 2 * height.
std::vector<ColorImage> render_synthetic_scene(const ColorImage &erp, const std::vector<Camera> &cameras);

/// `count` cameras with yaw spacing `spacing` (radians) starting at yaw 0.
std::vector<Camera> ring_cameras(int count, double spacing, const Intrinsics &intrinsics);

}  // namespace pano

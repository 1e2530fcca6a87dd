#pragma once

#include "pano/canvas.hpp"
#include "pano/geometry.hpp"
#include "pano/image.hpp"

namespace pano {

/// One input image resampled onto the panorama canvas.
struct WarpedLayer {
    ColorImage color;  ///< canvas-sized; finite everywhere, meaningful where valid
    Mask valid;        ///< 1 where the source image covers the canvas pixel
    int source_index = 0;
    /// Set by a local mesh warp that produced a cell with a negative Jacobian.
    bool foldover = false;

    int width() const { return color.width(); }
    int height() const { return color.height(); }
};

/// Inverse-maps every canvas pixel into the source camera and samples it
/// bilinearly. A pixel is valid iff its ray is in front of the camera and all
/// four bilinear taps lie inside the image. Rows are processed in parallel;
/// the result does not depend on the thread count.
///
/// Throws std::invalid_argument when the image size differs from the camera
/// intrinsics' resolution.
WarpedLayer warp_image(const ColorImage &image, const Camera &cam, const PanoramaCanvas &canvas, int source_index = 0);

}  // namespace pano

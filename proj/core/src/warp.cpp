#include "pano/warp.hpp"

#include "pano/parallel.hpp"

#include <sstream>

namespace pano {

WarpedLayer warp_image(const ColorImage &image, const Camera &cam, const PanoramaCanvas &canvas, int source_index) {
    cam.intrinsics.validate();
    if (image.width() != cam.intrinsics.width || image.height() != cam.intrinsics.height) {
        std::ostringstream msg;
        msg << "warp_image: image is " << image.width() << "x" << image.height() << " but intrinsics describe "
            << cam.intrinsics.width << "x" << cam.intrinsics.height;
        throw std::invalid_argument(msg.str());
    }

    WarpedLayer layer;
    layer.source_index = source_index;
    layer.color = ColorImage(canvas.width(), canvas.height(), Rgb::Zero());
    layer.valid = Mask(canvas.width(), canvas.height(), 0);

    parallel_for(0, canvas.height(), [&](int y) {
        for (int x = 0; x < canvas.width(); ++x) {
            const auto dir = canvas.pixel_to_dir(x, y);
            if (!dir) continue;
            const auto src = ray_to_pixel(cam, *dir);
            if (!src) continue;
            const auto c = sample_bilinear(image, src->x(), src->y());
            if (!c) continue;
            layer.color(x, y) = *c;
            layer.valid(x, y) = 1;
        }
    });
    return layer;
}

}  // namespace pano

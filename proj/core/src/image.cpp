#include "pano/image.hpp"

namespace pano {

GrayImage to_gray(const ColorImage &image) {
    GrayImage out(image.width(), image.height());
    for (std::size_t i = 0; i < image.size(); ++i) out[i] = luminance(image[i]);
    return out;
}

Box bounding_box(const Mask &mask) {
    Box box{mask.width(), mask.height(), 0, 0};
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask(x, y)) continue;
            box.x0 = std::min(box.x0, x);
            box.y0 = std::min(box.y0, y);
            box.x1 = std::max(box.x1, x + 1);
            box.y1 = std::max(box.y1, y + 1);
        }
    }
    if (box.x1 <= box.x0) return Box{};
    return box;
}

std::size_t count_set(const Mask &mask) {
    return static_cast<std::size_t>(std::count_if(mask.data().begin(), mask.data().end(),
                                                  [](std::uint8_t v) { return v != 0; }));
}

Mask mask_and(const Mask &a, const Mask &b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw std::invalid_argument("mask_and: shape mismatch");
    }
    Mask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] && b[i]) ? 1 : 0;
    return out;
}

Mask mask_or(const Mask &a, const Mask &b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw std::invalid_argument("mask_or: shape mismatch");
    }
    Mask out(a.width(), a.height());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
    return out;
}

}  // namespace pano

#pragma once

#include "pano/image.hpp"

#include <stdexcept>
#include <string>

namespace pano {

struct ImageIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reads an 8- or 16-bit PNG/JPEG as RGB in [0, 1]. Throws ImageIoError.
ColorImage load_image(const std::string &path);

/// Reads a single-channel image; nonzero pixels are set.
Mask load_mask(const std::string &path);

/// 8-bit RGB PNG (or whatever the extension selects). Throws ImageIoError.
void save_image(const std::string &path, const ColorImage &image);
void save_mask(const std::string &path, const Mask &mask);
/// Linear map of [0, max] to 8-bit gray.
void save_scalar_map(const std::string &path, const ScalarMap &map);

/// Quantizes to 8 bits and back, exactly what a save/load cycle does.
ColorImage quantize(const ColorImage &image);

}  // namespace pano

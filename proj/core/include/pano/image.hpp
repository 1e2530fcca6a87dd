#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace pano {

/// Dense row-major 2D grid of values. Pixel (x, y) sits at continuous
/// coordinate (x, y); x grows to the right, y grows downward.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(int width, int height, const T &fill = T{})
        : width_(width), height_(height) {
        if (width < 0 || height < 0) {
            throw std::invalid_argument("Grid dimensions must be non-negative");
        }
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::size_t index(int x, int y) const {
        assert(contains(x, y));
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    T &operator()(int x, int y) { return data_[index(x, y)]; }
    const T &operator()(int x, int y) const { return data_[index(x, y)]; }

    T &operator[](std::size_t i) { return data_[i]; }
    const T &operator[](std::size_t i) const { return data_[i]; }

    std::vector<T> &data() { return data_; }
    const std::vector<T> &data() const { return data_; }

    void fill(const T &v) { std::fill(data_.begin(), data_.end(), v); }

    bool operator==(const Grid &other) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using Rgb = Eigen::Array3f;
/// Linear RGB image with channels in [0, 1].
using ColorImage = Grid<Rgb>;
/// Binary mask; nonzero means set.
using Mask = Grid<std::uint8_t>;
using ScalarMap = Grid<double>;
using GrayImage = Grid<float>;

/// Axis-aligned pixel rectangle [x0, x1) x [y0, y1).
struct Box {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool empty() const { return x1 <= x0 || y1 <= y0; }
    bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

inline float luminance(const Rgb &c) { return 0.299f * c[0] + 0.587f * c[1] + 0.114f * c[2]; }

GrayImage to_gray(const ColorImage &image);

/// Bounding box of the nonzero pixels; empty box when the mask is empty.
Box bounding_box(const Mask &mask);

std::size_t count_set(const Mask &mask);

Mask mask_and(const Mask &a, const Mask &b);
Mask mask_or(const Mask &a, const Mask &b);

/// Bilinear interpolation that refuses any out-of-bounds tap.
///
/// A coordinate within 1e-9 px of the last row/column is treated as lying on
/// it so that integer-exact lookups along the far edges remain valid.
template <typename T>
std::optional<T> sample_bilinear(const Grid<T> &img, double x, double y) {
    constexpr double kEdgeTol = 1e-9;
    const int w = img.width();
    const int h = img.height();
    if (w == 0 || h == 0) return std::nullopt;
    if (!(x >= -kEdgeTol && y >= -kEdgeTol && x <= w - 1 + kEdgeTol && y <= h - 1 + kEdgeTol)) {
        return std::nullopt;
    }
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    int x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
    int y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const T &a = img(x0, y0);
    const T &b = img(x1, y0);
    const T &c = img(x0, y1);
    const T &d = img(x1, y1);
    if constexpr (std::is_floating_point_v<T>) {
        const double top = a + (b - a) * fx;
        const double bot = c + (d - c) * fx;
        return static_cast<T>(top + (bot - top) * fy);
    } else {
        const T top = a + (b - a) * static_cast<float>(fx);
        const T bot = c + (d - c) * static_cast<float>(fx);
        return T(top + (bot - top) * static_cast<float>(fy));
    }
}

/// Quantize to 8 bits the way PNG output does.
inline std::uint8_t to_byte(float v) {
    return static_cast<std::uint8_t>(std::clamp(v, 0.0f, 1.0f) * 255.0f + 0.5f);
}

}  // namespace pano

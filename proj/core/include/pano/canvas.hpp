#pragma once

#include "pano/geometry.hpp"
#include "pano/projection.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pano {

// Scale parameters set to 0 are resolved from the canvas size when the
// canvas is constructed (see PanoramaCanvas).

struct PlanarFormat {
    double focal = 0.0;  ///< 0: width / 2 (90 degree horizontal field of view)
};
struct EquirectFormat {};
struct CubemapFormat {
    int face_size = 0;  ///< 0: height / 2. Faces are laid out in a 3 x 2 grid.
};
struct TangentFormat {
    LonLat center;
    double focal = 0.0;  ///< 0: width / 2
};
struct PaniniFormat {
    double d = 1.0;
    double focal = 0.0;  ///< 0: fits +-90 degrees of longitude (+-60 for d = 0)
};
struct LittlePlanetFormat {
    double scale = 0.0;  ///< 0: min(width, height) / 4, the equator radius
};
struct CylindricalFormat {
    double focal = 0.0;  ///< 0: width / (2 pi), a full turn across the canvas
};
struct FisheyeFormat {
    double focal = 0.0;  ///< 0: a 180 degree circle inscribed in the canvas
};
struct PolyhedronFormat {
    int level = 0;
};

using ProjectionFormat = std::variant<PlanarFormat, EquirectFormat, CubemapFormat, TangentFormat, PaniniFormat,
                                      LittlePlanetFormat, CylindricalFormat, FisheyeFormat, PolyhedronFormat>;

/// Exact CLI names: planar, erp, cubemap, tangent, panini, littleplanet,
/// cylindrical, fisheye, polyhedron.
std::string format_name(const ProjectionFormat &format);
/// Default-parameterized format for a CLI name; throws std::invalid_argument
/// for unknown names.
ProjectionFormat format_from_name(std::string_view name);
const std::vector<std::string> &format_names();

/// Output canvas: a projection format bound to a pixel grid.
///
/// The world frame (the first camera) looks at the canvas center for every
/// format except little planet, which puts the nadir at the center.
class PanoramaCanvas {
public:
    /// Throws std::invalid_argument on non-positive sizes, an equirect canvas
    /// with width != 2 * height, or a cubemap canvas that is not 3 x 2 faces.
    PanoramaCanvas(ProjectionFormat format, int width, int height);

    const ProjectionFormat &format() const { return format_; }
    std::string name() const { return format_name(format_); }
    int width() const { return width_; }
    int height() const { return height_; }

    /// Viewing direction for a canvas position; nullopt where the canvas
    /// shows nothing (outside a fisheye circle, outside polyhedron tiles...).
    std::optional<Vec3> pixel_to_dir(double x, double y) const;

    /// Canvas position of a direction; nullopt on the format's singular set.
    std::optional<Vec2> dir_to_pixel(const Vec3 &dir) const;

    /// Resolved scale (focal, face size or planet radius) in pixels.
    double scale() const { return scale_; }

    const std::vector<PolyhedronFace> &polyhedron() const { return faces_; }

private:
    struct Tile {
        int x0 = 0;
        int y0 = 0;
        double scale = 1.0;
    };

    ProjectionFormat format_;
    int width_;
    int height_;
    double scale_ = 1.0;
    // Polyhedron layout.
    std::vector<PolyhedronFace> faces_;
    std::vector<Tile> tiles_;
    int tile_size_ = 0;
    int tile_cols_ = 0;
};

}  // namespace pano

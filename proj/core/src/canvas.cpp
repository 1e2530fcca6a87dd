#include "pano/canvas.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pano {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string format_name(const ProjectionFormat &format) {
    return std::visit(Overloaded{
                          [](const PlanarFormat &) { return std::string("planar"); },
                          [](const EquirectFormat &) { return std::string("erp"); },
                          [](const CubemapFormat &) { return std::string("cubemap"); },
                          [](const TangentFormat &) { return std::string("tangent"); },
                          [](const PaniniFormat &) { return std::string("panini"); },
                          [](const LittlePlanetFormat &) { return std::string("littleplanet"); },
                          [](const CylindricalFormat &) { return std::string("cylindrical"); },
                          [](const FisheyeFormat &) { return std::string("fisheye"); },
                          [](const PolyhedronFormat &) { return std::string("polyhedron"); },
                      },
                      format);
}

const std::vector<std::string> &format_names() {
    static const std::vector<std::string> names = {"planar",       "erp",         "cubemap", "tangent",   "panini",
                                                   "littleplanet", "cylindrical", "fisheye", "polyhedron"};
    return names;
}

ProjectionFormat format_from_name(std::string_view name) {
    if (name == "planar") return PlanarFormat{};
    if (name == "erp") return EquirectFormat{};
    if (name == "cubemap") return CubemapFormat{};
    if (name == "tangent") return TangentFormat{};
    if (name == "panini") return PaniniFormat{};
    if (name == "littleplanet") return LittlePlanetFormat{};
    if (name == "cylindrical") return CylindricalFormat{};
    if (name == "fisheye") return FisheyeFormat{};
    if (name == "polyhedron") return PolyhedronFormat{};
    throw std::invalid_argument("unknown projection format '" + std::string(name) + "'");
}

PanoramaCanvas::PanoramaCanvas(ProjectionFormat format, int width, int height)
    : format_(std::move(format)), width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("canvas dimensions must be positive");
    const double w = width;
    const double h = height;

    std::visit(Overloaded{
                   [&](PlanarFormat &f) {
                       if (f.focal <= 0.0) f.focal = 0.5 * w;
                       scale_ = f.focal;
                   },
                   [&](EquirectFormat &) {
                       if (width != 2 * height) {
                           std::ostringstream msg;
                           msg << "equirect canvas must have width = 2 * height (got " << width << "x" << height
                               << ")";
                           throw std::invalid_argument(msg.str());
                       }
                       scale_ = w / (2.0 * kPi);
                   },
                   [&](CubemapFormat &f) {
                       if (f.face_size <= 0) f.face_size = height / 2;
                       if (width != 3 * f.face_size || height != 2 * f.face_size) {
                           throw std::invalid_argument("cubemap canvas must be 3 x 2 faces of face_size pixels");
                       }
                       scale_ = f.face_size;
                   },
                   [&](TangentFormat &f) {
                       if (f.focal <= 0.0) f.focal = 0.5 * w;
                       scale_ = f.focal;
                   },
                   [&](PaniniFormat &f) {
                       if (f.d < 0.0) throw std::invalid_argument("panini d must be >= 0");
                       if (f.focal <= 0.0) {
                           const double lon_max = f.d > 0.0 ? kPi / 2 : kPi / 3;
                           const auto edge = panini_forward(lon_max, 0.0, f.d);
                           f.focal = 0.5 * w / edge->x();
                       }
                       scale_ = f.focal;
                   },
                   [&](LittlePlanetFormat &f) {
                       if (f.scale <= 0.0) f.scale = 0.25 * std::min(w, h);
                       scale_ = f.scale;
                   },
                   [&](CylindricalFormat &f) {
                       if (f.focal <= 0.0) f.focal = w / (2.0 * kPi);
                       scale_ = f.focal;
                   },
                   [&](FisheyeFormat &f) {
                       if (f.focal <= 0.0) f.focal = 0.5 * std::min(w, h) / (kPi / 2);
                       scale_ = f.focal;
                   },
                   [&](PolyhedronFormat &f) {
                       faces_ = polyhedron_faces(f.level);
                       const int n = static_cast<int>(faces_.size());
                       tile_cols_ = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
                       const int rows = (n + tile_cols_ - 1) / tile_cols_;
                       tile_size_ = std::min(width / tile_cols_, height / rows);
                       if (tile_size_ < 2) throw std::invalid_argument("polyhedron canvas too small for its level");
                       tiles_.resize(faces_.size());
                       for (int i = 0; i < n; ++i) {
                           const PolyhedronFace &face = faces_[i];
                           double extent = 0.0;
                           for (const Vec3 &v : face.vertices) {
                               const auto uv = tangent_forward(v, face.center_lonlat);
                               extent = std::max({extent, std::abs(uv->x()), std::abs(uv->y())});
                           }
                           Tile &t = tiles_[i];
                           t.x0 = (i % tile_cols_) * tile_size_;
                           t.y0 = (i / tile_cols_) * tile_size_;
                           // Leave a one-pixel margin so triangle vertices stay inside the tile.
                           t.scale = 0.5 * (tile_size_ - 2) / extent;
                       }
                       scale_ = tile_size_;
                   },
               },
               format_);
}

std::optional<Vec3> PanoramaCanvas::pixel_to_dir(double x, double y) const {
    const double cx = 0.5 * width_;
    const double cy = 0.5 * height_;
    return std::visit(
        Overloaded{
            [&](const PlanarFormat &f) -> std::optional<Vec3> {
                return Vec3((x - cx) / f.focal, (y - cy) / f.focal, 1.0).normalized();
            },
            [&](const EquirectFormat &) -> std::optional<Vec3> { return erp_inverse(x, y, width_, height_); },
            [&](const CubemapFormat &f) -> std::optional<Vec3> {
                const int fs = f.face_size;
                const int col = std::clamp(static_cast<int>(std::floor(x / fs)), 0, 2);
                const int row = std::clamp(static_cast<int>(std::floor(y / fs)), 0, 1);
                CubeFaceCoord c;
                c.face = row * 3 + col;
                c.u = (x - col * fs) / (0.5 * fs) - 1.0;
                c.v = (y - row * fs) / (0.5 * fs) - 1.0;
                return cubemap_inverse(c);
            },
            [&](const TangentFormat &f) -> std::optional<Vec3> {
                return tangent_inverse_dir(Vec2((x - cx) / f.focal, -(y - cy) / f.focal), f.center);
            },
            [&](const PaniniFormat &f) -> std::optional<Vec3> {
                const auto ll = panini_inverse(Vec2((x - cx) / f.focal, -(y - cy) / f.focal), f.d);
                if (!ll) return std::nullopt;
                return lonlat_to_dir(*ll);
            },
            [&](const LittlePlanetFormat &f) -> std::optional<Vec3> {
                return zenith_frame_to_world(little_planet_inverse(Vec2((x - cx) / f.scale, (y - cy) / f.scale)));
            },
            [&](const CylindricalFormat &f) -> std::optional<Vec3> {
                const double lon = (x - cx) / f.focal;
                if (std::abs(lon) > kPi) return std::nullopt;
                return cylindrical_inverse(Vec2(x - cx, -(y - cy)), f.focal);
            },
            [&](const FisheyeFormat &f) -> std::optional<Vec3> {
                return fisheye_inverse(Vec2(x - cx, y - cy), f.focal);
            },
            [&](const PolyhedronFormat &) -> std::optional<Vec3> {
                if (x < 0.0 || y < 0.0) return std::nullopt;
                const int col = static_cast<int>(x) / tile_size_;
                const int row = static_cast<int>(y) / tile_size_;
                if (col >= tile_cols_) return std::nullopt;
                const int idx = row * tile_cols_ + col;
                if (idx >= static_cast<int>(faces_.size())) return std::nullopt;
                const Tile &t = tiles_[idx];
                const PolyhedronFace &face = faces_[idx];
                const double half = 0.5 * tile_size_;
                const Vec2 uv((x - t.x0 - half) / t.scale, -(y - t.y0 - half) / t.scale);
                const Vec3 dir = tangent_inverse_dir(uv, face.center_lonlat);
                if (!face.contains(dir)) return std::nullopt;
                // Points on a shared edge belong to the lowest-index face.
                double margin = 1.0;
                for (const Vec3 &n : face.edge_normals) margin = std::min(margin, dir.dot(n));
                if (margin < 1e-12 && polyhedron_face_of(faces_, dir) != idx) return std::nullopt;
                return dir;
            },
        },
        format_);
}

std::optional<Vec2> PanoramaCanvas::dir_to_pixel(const Vec3 &dir) const {
    const double cx = 0.5 * width_;
    const double cy = 0.5 * height_;
    return std::visit(
        Overloaded{
            [&](const PlanarFormat &f) -> std::optional<Vec2> {
                if (dir.z() <= kProjectionEps) return std::nullopt;
                return Vec2(cx + f.focal * dir.x() / dir.z(), cy + f.focal * dir.y() / dir.z());
            },
            [&](const EquirectFormat &) -> std::optional<Vec2> { return erp_forward(dir, width_, height_); },
            [&](const CubemapFormat &f) -> std::optional<Vec2> {
                const CubeFaceCoord c = cubemap_forward(dir);
                const int fs = f.face_size;
                return Vec2((c.face % 3) * fs + (c.u + 1.0) * 0.5 * fs, (c.face / 3) * fs + (c.v + 1.0) * 0.5 * fs);
            },
            [&](const TangentFormat &f) -> std::optional<Vec2> {
                const auto uv = tangent_forward(dir, f.center);
                if (!uv) return std::nullopt;
                return Vec2(cx + f.focal * uv->x(), cy - f.focal * uv->y());
            },
            [&](const PaniniFormat &f) -> std::optional<Vec2> {
                const LonLat ll = dir_to_lonlat(dir);
                const auto hv = panini_forward(ll.lon, ll.lat, f.d);
                if (!hv) return std::nullopt;
                return Vec2(cx + f.focal * hv->x(), cy - f.focal * hv->y());
            },
            [&](const LittlePlanetFormat &f) -> std::optional<Vec2> {
                const auto xy = little_planet_forward(world_to_zenith_frame(dir));
                if (!xy) return std::nullopt;
                return Vec2(cx + f.scale * xy->x(), cy + f.scale * xy->y());
            },
            [&](const CylindricalFormat &f) -> std::optional<Vec2> {
                const auto uv = cylindrical_forward(dir, f.focal);
                if (!uv) return std::nullopt;
                return Vec2(cx + uv->x(), cy - uv->y());
            },
            [&](const FisheyeFormat &f) -> std::optional<Vec2> {
                const auto uv = fisheye_forward(dir, f.focal);
                if (!uv) return std::nullopt;
                return Vec2(cx + uv->x(), cy + uv->y());
            },
            [&](const PolyhedronFormat &) -> std::optional<Vec2> {
                const int idx = polyhedron_face_of(faces_, dir);
                const PolyhedronFace &face = faces_[idx];
                const auto uv = tangent_forward(dir, face.center_lonlat);
                if (!uv) return std::nullopt;
                const Tile &t = tiles_[idx];
                const double half = 0.5 * tile_size_;
                return Vec2(t.x0 + half + t.scale * uv->x(), t.y0 + half - t.scale * uv->y());
            },
        },
        format_);
}

}  // namespace pano

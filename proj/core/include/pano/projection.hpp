#pragma once

// Closed-form sphere <-> plane mappings used by the panoramic canvases.
//
// Two angle conventions appear here:
//  * spherical (theta, phi): polar angle from +Z and azimuth in the XY plane,
//    dir = (sin t cos p, sin t sin p, cos t).
//  * panoramic (lon, lat): longitude about the up axis measured from the
//    forward direction +Z toward +X, latitude positive toward up (-Y).
// Everything returning std::optional signals a point on the format's
// singular set (behind the plane, at the projection pole, ...).

#include "pano/geometry.hpp"

#include <array>
#include <optional>
#include <vector>

namespace pano {

inline constexpr double kProjectionEps = 1e-9;

struct Spherical {
    double theta = 0.0;  ///< polar angle in [0, pi]
    double phi = 0.0;    ///< azimuth in [-pi, pi)
};

struct LonLat {
    double lon = 0.0;  ///< [-pi, pi)
    double lat = 0.0;  ///< [-pi/2, pi/2]
};

Spherical dir_to_spherical(const Vec3 &dir);
Vec3 spherical_to_dir(const Spherical &s);

LonLat dir_to_lonlat(const Vec3 &dir);
Vec3 lonlat_to_dir(const LonLat &ll);

/// Equirectangular pixel position on a width x height canvas.
Vec2 erp_forward(const Vec3 &dir, int width, int height);
Vec3 erp_inverse(double u, double v, int width, int height);

/// Cube faces in index order: 0 front (+Z), 1 right (+X), 2 back (-Z),
/// 3 left (-X), 4 top (-Y), 5 bottom (+Y).
struct CubeFaceCoord {
    int face = 0;
    double u = 0.0;  ///< [-1, 1], rightward on the face
    double v = 0.0;  ///< [-1, 1], downward on the face
};

CubeFaceCoord cubemap_forward(const Vec3 &dir);
Vec3 cubemap_inverse(const CubeFaceCoord &c);
/// Rotation taking world directions into the frame of a cube face camera.
const Rotation &cube_face_rotation(int face);

/// Gnomonic projection onto the plane tangent at (center_lon, center_lat).
/// v_t grows toward increasing latitude. nullopt when cos(c) <= eps.
std::optional<Vec2> tangent_forward(const LonLat &point, const LonLat &center);
LonLat tangent_inverse(const Vec2 &uv, const LonLat &center);
/// Direction-based wrappers around the gnomonic formulas.
std::optional<Vec2> tangent_forward(const Vec3 &dir, const LonLat &center);
Vec3 tangent_inverse_dir(const Vec2 &uv, const LonLat &center);

/// Panini: S = (d + 1) / (d + cos lon), h = S sin lon, v = S tan lat.
/// nullopt when d + cos lon <= eps or |lat| >= pi/2.
std::optional<Vec2> panini_forward(double lon, double lat, double d);
std::optional<LonLat> panini_inverse(const Vec2 &hv, double d);

/// Stereographic projection from the +z pole of a z-up frame:
/// (X, Y) = (x, y) / (1 - z). nullopt at the pole (1 - z <= eps).
std::optional<Vec2> little_planet_forward(const Vec3 &dir_z_up);
Vec3 little_planet_inverse(const Vec2 &xy);
/// Maps a world direction into the z-up frame used by the little planet
/// (z' = up = -Y, keeping the frame right-handed) and back.
Vec3 world_to_zenith_frame(const Vec3 &dir);
Vec3 zenith_frame_to_world(const Vec3 &dir);

/// Cylindrical: u = f lon, v = f tan(lat). nullopt at |lat| >= pi/2.
std::optional<Vec2> cylindrical_forward(const Vec3 &dir, double focal);
Vec3 cylindrical_inverse(const Vec2 &uv, double focal);

/// Equidistant fisheye about +Z: r = f * angle, image axes as the camera.
/// nullopt for the exact backward direction.
std::optional<Vec2> fisheye_forward(const Vec3 &dir, double focal);
std::optional<Vec3> fisheye_inverse(const Vec2 &uv, double focal);

/// Spherical triangle on a subdivided icosahedron.
struct PolyhedronFace {
    std::array<Vec3, 3> vertices;  ///< unit vectors, counter-clockwise seen from outside
    Vec3 center;                   ///< normalized centroid; tangent point of the face
    LonLat center_lonlat;
    /// Inward edge normals: dir is inside iff dot(dir, edge_normals[k]) >= 0 for all k.
    std::array<Vec3, 3> edge_normals;

    bool contains(const Vec3 &dir, double tolerance = 0.0) const;
};

inline constexpr int kMaxPolyhedronLevel = 4;

/// Icosahedron recursively subdivided `level` times: 20 * 4^level faces.
/// Throws std::invalid_argument for level < 0 or level > kMaxPolyhedronLevel.
std::vector<PolyhedronFace> polyhedron_faces(int level);

/// Lowest-index face whose spherical triangle contains dir.
int polyhedron_face_of(const std::vector<PolyhedronFace> &faces, const Vec3 &dir);

}  // namespace pano

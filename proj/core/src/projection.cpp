#include "pano/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pano {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_longitude(double lon) {
    // [-pi, pi)
    if (lon >= kPi || lon < -kPi) {
        lon = std::remainder(lon, 2.0 * kPi);
        if (lon >= kPi) lon -= 2.0 * kPi;
    }
    return lon;
}

}  // namespace

Spherical dir_to_spherical(const Vec3 &dir) {
    const double rho_xy = std::hypot(dir.x(), dir.y());
    Spherical s;
    s.theta = std::atan2(rho_xy, dir.z());
    s.phi = rho_xy == 0.0 ? 0.0 : wrap_longitude(std::atan2(dir.y(), dir.x()));
    return s;
}

Vec3 spherical_to_dir(const Spherical &s) {
    const double st = std::sin(s.theta);
    return Vec3(st * std::cos(s.phi), st * std::sin(s.phi), std::cos(s.theta));
}

LonLat dir_to_lonlat(const Vec3 &dir) {
    const double horiz = std::hypot(dir.x(), dir.z());
    LonLat ll;
    ll.lat = std::atan2(-dir.y(), horiz);
    ll.lon = horiz == 0.0 ? 0.0 : wrap_longitude(std::atan2(dir.x(), dir.z()));
    return ll;
}

Vec3 lonlat_to_dir(const LonLat &ll) {
    const double cl = std::cos(ll.lat);
    return Vec3(cl * std::sin(ll.lon), -std::sin(ll.lat), cl * std::cos(ll.lon));
}

Vec2 erp_forward(const Vec3 &dir, int width, int height) {
    const LonLat ll = dir_to_lonlat(dir);
    return Vec2((ll.lon / kPi + 1.0) * 0.5 * width, (0.5 - ll.lat / kPi) * height);
}

Vec3 erp_inverse(double u, double v, int width, int height) {
    LonLat ll;
    ll.lon = (2.0 * u / width - 1.0) * kPi;
    ll.lat = (0.5 - v / height) * kPi;
    return lonlat_to_dir(ll);
}

// ---------------------------------------------------------------------------
// Cubemap

namespace {

struct CubeFaces {
    std::array<Rotation, 6> rotations;

    CubeFaces() {
        const std::array<std::pair<double, double>, 6> yaw_pitch = {{
            {0.0, 0.0},
            {kPi / 2, 0.0},
            {kPi, 0.0},
            {-kPi / 2, 0.0},
            {0.0, kPi / 2},
            {0.0, -kPi / 2},
        }};
        for (int f = 0; f < 6; ++f) {
            Mat3 m = rotation_from_yaw_pitch_roll(yaw_pitch[f].first, yaw_pitch[f].second).matrix();
            // Entries are exactly 0 or +-1; strip the trigonometric round-off.
            m = m.array().round().matrix();
            rotations[f] = Rotation(m);
        }
    }
};

const CubeFaces &cube_faces() {
    static const CubeFaces faces;
    return faces;
}

}  // namespace

const Rotation &cube_face_rotation(int face) {
    if (face < 0 || face > 5) throw std::out_of_range("cube face index out of range");
    return cube_faces().rotations[face];
}

CubeFaceCoord cubemap_forward(const Vec3 &dir) {
    // Outward axis component for each face, in face-index order.
    const std::array<double, 6> along = {dir.z(), dir.x(), -dir.z(), -dir.x(), -dir.y(), dir.y()};
    int best = 0;
    for (int f = 1; f < 6; ++f) {
        if (along[f] > along[best]) best = f;
    }
    const Vec3 p = cube_face_rotation(best) * dir;
    return CubeFaceCoord{best, p.x() / p.z(), p.y() / p.z()};
}

Vec3 cubemap_inverse(const CubeFaceCoord &c) {
    const Vec3 local = Vec3(c.u, c.v, 1.0).normalized();
    return cube_face_rotation(c.face).matrix().transpose() * local;
}

// ---------------------------------------------------------------------------
// Tangent (gnomonic)

std::optional<Vec2> tangent_forward(const LonLat &p, const LonLat &c) {
    const double dlon = p.lon - c.lon;
    const double cos_c = std::sin(c.lat) * std::sin(p.lat) + std::cos(c.lat) * std::cos(p.lat) * std::cos(dlon);
    if (cos_c <= kProjectionEps) return std::nullopt;
    const double u = std::cos(p.lat) * std::sin(dlon) / cos_c;
    const double v = (std::cos(c.lat) * std::sin(p.lat) - std::sin(c.lat) * std::cos(p.lat) * std::cos(dlon)) / cos_c;
    return Vec2(u, v);
}

LonLat tangent_inverse(const Vec2 &uv, const LonLat &c) {
    const double rho = uv.norm();
    if (rho == 0.0) return c;
    const double cc = std::atan(rho);
    const double sin_cc = std::sin(cc);
    const double cos_cc = std::cos(cc);
    LonLat ll;
    ll.lat = std::asin(std::clamp(cos_cc * std::sin(c.lat) + uv.y() * sin_cc * std::cos(c.lat) / rho, -1.0, 1.0));
    ll.lon = wrap_longitude(
        c.lon + std::atan2(uv.x() * sin_cc, rho * std::cos(c.lat) * cos_cc - uv.y() * std::sin(c.lat) * sin_cc));
    return ll;
}

namespace {

// Orthonormal frame of the tangent plane: east, north, center.
struct TangentFrame {
    Vec3 east;
    Vec3 north;
    Vec3 center;

    explicit TangentFrame(const LonLat &c) {
        const double sl = std::sin(c.lon);
        const double cl = std::cos(c.lon);
        const double sp = std::sin(c.lat);
        const double cp = std::cos(c.lat);
        center = Vec3(cp * sl, -sp, cp * cl);
        east = Vec3(cl, 0.0, -sl);
        north = Vec3(-sp * sl, -cp, -sp * cl);
    }
};

}  // namespace

std::optional<Vec2> tangent_forward(const Vec3 &dir, const LonLat &center) {
    const TangentFrame f(center);
    const double cos_c = dir.dot(f.center);
    if (cos_c <= kProjectionEps) return std::nullopt;
    return Vec2(dir.dot(f.east) / cos_c, dir.dot(f.north) / cos_c);
}

Vec3 tangent_inverse_dir(const Vec2 &uv, const LonLat &center) {
    const TangentFrame f(center);
    return (f.center + uv.x() * f.east + uv.y() * f.north).normalized();
}

// ---------------------------------------------------------------------------
// Panini

std::optional<Vec2> panini_forward(double lon, double lat, double d) {
    if (d < 0.0) return std::nullopt;
    const double denom = d + std::cos(lon);
    if (denom <= kProjectionEps || std::abs(lat) >= kPi / 2) return std::nullopt;
    const double s = (d + 1.0) / denom;
    return Vec2(s * std::sin(lon), s * std::tan(lat));
}

std::optional<LonLat> panini_inverse(const Vec2 &hv, double d) {
    if (d < 0.0) return std::nullopt;
    // sin(lon) - k cos(lon) = k d with k = h / (d + 1); the front branch is
    // lon = atan(k) + atan2(k d, sqrt(1 + k^2 (1 - d^2))).
    const double k = hv.x() / (d + 1.0);
    const double disc = 1.0 + k * k * (1.0 - d * d);
    if (disc < 0.0) return std::nullopt;
    const double lon = std::atan(k) + std::atan2(k * d, std::sqrt(disc));
    const double denom = d + std::cos(lon);
    if (denom <= kProjectionEps) return std::nullopt;
    const double s = (d + 1.0) / denom;
    LonLat ll;
    ll.lon = lon;
    ll.lat = std::atan(hv.y() / s);
    return ll;
}

// ---------------------------------------------------------------------------
// Little planet (stereographic from the zenith)

std::optional<Vec2> little_planet_forward(const Vec3 &dir) {
    const double denom = 1.0 - dir.z();
    if (denom <= kProjectionEps) return std::nullopt;
    return Vec2(dir.x() / denom, dir.y() / denom);
}

Vec3 little_planet_inverse(const Vec2 &xy) {
    const double r2 = xy.squaredNorm();
    return Vec3(2.0 * xy.x(), 2.0 * xy.y(), r2 - 1.0) / (r2 + 1.0);
}

Vec3 world_to_zenith_frame(const Vec3 &dir) { return Vec3(dir.x(), dir.z(), -dir.y()); }

Vec3 zenith_frame_to_world(const Vec3 &dir) { return Vec3(dir.x(), -dir.z(), dir.y()); }

// ---------------------------------------------------------------------------
// Cylindrical and fisheye

std::optional<Vec2> cylindrical_forward(const Vec3 &dir, double focal) {
    const LonLat ll = dir_to_lonlat(dir);
    if (std::abs(ll.lat) >= kPi / 2) return std::nullopt;
    const double horiz = std::hypot(dir.x(), dir.z());
    if (horiz <= kProjectionEps) return std::nullopt;
    // tan(lat) computed from components avoids the atan/tan round trip.
    return Vec2(focal * ll.lon, focal * (-dir.y() / horiz));
}

Vec3 cylindrical_inverse(const Vec2 &uv, double focal) {
    const double lon = uv.x() / focal;
    const double t = uv.y() / focal;  // tan(lat)
    return Vec3(std::sin(lon), -t, std::cos(lon)).normalized();
}

std::optional<Vec2> fisheye_forward(const Vec3 &dir, double focal) {
    const double rho = std::hypot(dir.x(), dir.y());
    if (rho == 0.0) {
        if (dir.z() > 0.0) return Vec2(0.0, 0.0);
        return std::nullopt;
    }
    const double angle = std::atan2(rho, dir.z());
    const double r = focal * angle;
    return Vec2(r * dir.x() / rho, r * dir.y() / rho);
}

std::optional<Vec3> fisheye_inverse(const Vec2 &uv, double focal) {
    const double r = uv.norm();
    const double angle = r / focal;
    if (angle >= kPi) return std::nullopt;
    if (r == 0.0) return Vec3(0.0, 0.0, 1.0);
    const double s = std::sin(angle) / r;
    return Vec3(s * uv.x(), s * uv.y(), std::cos(angle));
}

// ---------------------------------------------------------------------------
// Polyhedron

bool PolyhedronFace::contains(const Vec3 &dir, double tolerance) const {
    if (dir.dot(center) <= 0.0) return false;
    for (const Vec3 &n : edge_normals) {
        if (dir.dot(n) < -tolerance) return false;
    }
    return true;
}

namespace {

PolyhedronFace make_face(Vec3 a, Vec3 b, Vec3 c) {
    if (a.dot(b.cross(c)) < 0.0) std::swap(b, c);
    PolyhedronFace f;
    f.vertices = {a, b, c};
    f.center = (a + b + c).normalized();
    f.center_lonlat = dir_to_lonlat(f.center);
    f.edge_normals = {a.cross(b), b.cross(c), c.cross(a)};
    return f;
}

std::vector<PolyhedronFace> icosahedron() {
    const double g = std::numbers::phi;
    std::vector<Vec3> v = {
        {-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
        {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1},
    };
    for (auto &p : v) p.normalize();
    // Edge length of the normalized icosahedron.
    const double edge = (v[0] - v[1]).norm();
    auto adjacent = [&](int i, int j) { return std::abs((v[i] - v[j]).norm() - edge) < 1e-9; };
    std::vector<PolyhedronFace> faces;
    for (int i = 0; i < 12; ++i) {
        for (int j = i + 1; j < 12; ++j) {
            if (!adjacent(i, j)) continue;
            for (int k = j + 1; k < 12; ++k) {
                if (adjacent(i, k) && adjacent(j, k)) faces.push_back(make_face(v[i], v[j], v[k]));
            }
        }
    }
    return faces;
}

}  // namespace

std::vector<PolyhedronFace> polyhedron_faces(int level) {
    if (level < 0 || level > kMaxPolyhedronLevel) {
        throw std::invalid_argument("polyhedron level must be in [0, " + std::to_string(kMaxPolyhedronLevel) + "]");
    }
    std::vector<PolyhedronFace> faces = icosahedron();
    for (int l = 0; l < level; ++l) {
        std::vector<PolyhedronFace> next;
        next.reserve(faces.size() * 4);
        for (const auto &f : faces) {
            const Vec3 &a = f.vertices[0];
            const Vec3 &b = f.vertices[1];
            const Vec3 &c = f.vertices[2];
            const Vec3 ab = (a + b).normalized();
            const Vec3 bc = (b + c).normalized();
            const Vec3 ca = (c + a).normalized();
            next.push_back(make_face(a, ab, ca));
            next.push_back(make_face(ab, b, bc));
            next.push_back(make_face(ca, bc, c));
            next.push_back(make_face(ab, bc, ca));
        }
        faces = std::move(next);
    }
    return faces;
}

int polyhedron_face_of(const std::vector<PolyhedronFace> &faces, const Vec3 &dir) {
    for (std::size_t i = 0; i < faces.size(); ++i) {
        if (faces[i].contains(dir)) return static_cast<int>(i);
    }
    // Round-off can leave a direction a hair outside every face along an
    // edge; fall back to the closest face center.
    int best = 0;
    double best_dot = -2.0;
    for (std::size_t i = 0; i < faces.size(); ++i) {
        const double d = faces[i].center.dot(dir);
        if (d > best_dot) {
            best_dot = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace pano

#include "fixtures.hpp"

#include "pano/canvas.hpp"
#include "pano/projection.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace pano;

namespace {

constexpr double kPi = std::numbers::pi;

double angle(const Vec3 &a, const Vec3 &b) { return std::atan2(a.cross(b).norm(), a.dot(b)); }

}  // namespace

TEST(Spherical, Anchors) {
    const Spherical z = dir_to_spherical(Vec3(0, 0, 1));
    EXPECT_DOUBLE_EQ(z.theta, 0.0);
    EXPECT_DOUBLE_EQ(z.phi, 0.0);
    const Spherical x = dir_to_spherical(Vec3(1, 0, 0));
    EXPECT_NEAR(x.theta, kPi / 2, 1e-15);
    EXPECT_DOUBLE_EQ(x.phi, 0.0);
}

TEST(Spherical, RoundTrip) {
    std::mt19937_64 rng(20);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 d = fixtures::random_unit(rng);
        EXPECT_LT((spherical_to_dir(dir_to_spherical(d)) - d).norm(), 1e-9);
    }
}

TEST(Equirect, ForwardHitsCenter) {
    const Vec2 p = erp_forward(Vec3(0, 0, 1), 2048, 1024);
    EXPECT_DOUBLE_EQ(p.x(), 1024);
    EXPECT_DOUBLE_EQ(p.y(), 512);
}

TEST(Equirect, ZenithIsTopRow) { EXPECT_NEAR(erp_forward(Vec3(0, -1, 0), 2048, 1024).y(), 0.0, 1e-12); }

TEST(Equirect, RoundTripAwayFromPoles) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 d = fixtures::random_unit(rng);
        if (std::abs(d.y()) > std::cos(1e-4)) continue;
        const Vec2 p = erp_forward(d, 2048, 1024);
        EXPECT_LT(angle(erp_inverse(p.x(), p.y(), 2048, 1024), d), 1e-6);
    }
}

TEST(Cubemap, FrontFaceCoordinates) {
    const CubeFaceCoord c = cubemap_forward(Vec3(0.4, -0.2, 1.0).normalized());
    EXPECT_EQ(c.face, 0);
    EXPECT_NEAR(c.u, 0.4, 1e-12);
    EXPECT_NEAR(c.v, -0.2, 1e-12);
}

TEST(Cubemap, AxesLandOnDistinctFaceCenters) {
    const std::vector<Vec3> axes = {{0, 0, 1}, {1, 0, 0}, {0, 0, -1}, {-1, 0, 0}, {0, -1, 0}, {0, 1, 0}};
    std::set<int> faces;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const CubeFaceCoord c = cubemap_forward(axes[i]);
        EXPECT_EQ(c.face, static_cast<int>(i));
        EXPECT_NEAR(c.u, 0.0, 1e-15);
        EXPECT_NEAR(c.v, 0.0, 1e-15);
        faces.insert(c.face);
    }
    EXPECT_EQ(faces.size(), 6u);
}

TEST(Cubemap, RoundTrip) {
    std::mt19937_64 rng(22);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 d = fixtures::random_unit(rng);
        EXPECT_LT(angle(cubemap_inverse(cubemap_forward(d)), d), 1e-9);
    }
}

TEST(Tangent, CenterMapsToOrigin) {
    const LonLat c{0.4, -0.3};
    const auto uv = tangent_forward(c, c);
    ASSERT_TRUE(uv);
    EXPECT_NEAR(uv->norm(), 0.0, 1e-15);
}

TEST(Tangent, AntipodeIsRejected) {
    const LonLat c{0.4, -0.3};
    EXPECT_FALSE(tangent_forward(LonLat{0.4 - kPi, 0.3}, c));
}

TEST(Tangent, SmallOffsetsFollowFirstOrderExpansion) {
    for (double lat0 : {-1.0, -0.3, 0.0, 0.5, 1.2}) {
        const LonLat c{0.2, lat0};
        for (auto [dl, dp] : {std::pair{0.01, 0.0}, {0.0, 0.01}, {-0.01, 0.01}, {0.01, -0.01}}) {
            const auto uv = tangent_forward(LonLat{c.lon + dl, c.lat + dp}, c);
            ASSERT_TRUE(uv);
            EXPECT_NEAR(uv->x(), dl * std::cos(lat0), 1e-4);
            EXPECT_NEAR(uv->y(), dp, 1e-4);
        }
    }
}

TEST(Tangent, RoundTrip) {
    std::mt19937_64 rng(23);
    const LonLat c{-0.7, 0.4};
    const Vec3 center = lonlat_to_dir(c);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 d = fixtures::random_unit(rng);
        if (angle(d, center) > kPi / 2 - 1e-4) continue;
        const auto uv = tangent_forward(d, c);
        ASSERT_TRUE(uv);
        EXPECT_LT(angle(tangent_inverse_dir(*uv, c), d), 1e-6);
    }
}

TEST(Panini, CenterIsOrigin) {
    for (double d : {0.0, 0.5, 1.0, 2.0}) {
        const auto hv = panini_forward(0, 0, d);
        ASSERT_TRUE(hv);
        EXPECT_EQ(hv->norm(), 0.0);
    }
}

TEST(Panini, ZeroDistanceIsRectilinear) {
    for (double lon : {-1.2, -0.5, 0.3, 1.0}) {
        const auto hv = panini_forward(lon, 0.2, 0.0);
        ASSERT_TRUE(hv);
        EXPECT_NEAR(hv->x(), std::tan(lon), 1e-12);
    }
}

TEST(Panini, UnitDistanceAtRightAngle) {
    const auto hv = panini_forward(kPi / 2, 0.0, 1.0);
    ASSERT_TRUE(hv);
    EXPECT_NEAR(hv->x(), 2.0, 1e-12);
    EXPECT_NEAR(hv->y(), 0.0, 1e-12);
}

TEST(Panini, RoundTrip) {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> lat(-1.5, 1.5);
    for (double d : {0.0, 0.5, 1.0}) {
        const double lon_max = d == 0.0 ? 1.5 : (d < 1.0 ? 1.5 : kPi - 1e-3);
        std::uniform_real_distribution<double> lon(-lon_max, lon_max);
        for (int i = 0; i < 2000; ++i) {
            const LonLat ll{lon(rng), lat(rng)};
            const auto hv = panini_forward(ll.lon, ll.lat, d);
            ASSERT_TRUE(hv);
            const auto back = panini_inverse(*hv, d);
            ASSERT_TRUE(back);
            EXPECT_LT(angle(lonlat_to_dir(*back), lonlat_to_dir(ll)), 1e-9) << "d=" << d;
        }
    }
}

TEST(LittlePlanet, Anchors) {
    const auto nadir = little_planet_forward(Vec3(0, 0, -1));
    ASSERT_TRUE(nadir);
    EXPECT_NEAR(nadir->norm(), 0.0, 1e-15);
    const auto side = little_planet_forward(Vec3(1, 0, 0));
    ASSERT_TRUE(side);
    EXPECT_NEAR(side->x(), 1.0, 1e-15);
    EXPECT_NEAR(side->y(), 0.0, 1e-15);
    EXPECT_FALSE(little_planet_forward(Vec3(0, 0, 1)));
}

TEST(LittlePlanet, ZenithFrameRoundTrip) {
    EXPECT_LT((world_to_zenith_frame(Vec3(0, -1, 0)) - Vec3(0, 0, 1)).norm(), 1e-15);
    std::mt19937_64 rng(25);
    for (int i = 0; i < 100; ++i) {
        const Vec3 d = fixtures::random_unit(rng);
        EXPECT_LT((zenith_frame_to_world(world_to_zenith_frame(d)) - d).norm(), 1e-15);
    }
}

TEST(Cylindrical, Anchors) {
    const auto f = cylindrical_forward(Vec3(0, 0, 1), 100);
    ASSERT_TRUE(f);
    EXPECT_NEAR(f->norm(), 0.0, 1e-15);
    const auto q = cylindrical_forward(lonlat_to_dir({kPi / 4, 0.0}), 100);
    ASSERT_TRUE(q);
    EXPECT_NEAR(q->x(), 25 * kPi, 1e-12);
    EXPECT_NEAR(q->y(), 0.0, 1e-12);
}

TEST(Cylindrical, RoundTrip) {
    std::mt19937_64 rng(26);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 d = fixtures::random_unit(rng);
        if (std::abs(d.y()) > std::cos(1e-4)) continue;
        const auto uv = cylindrical_forward(d, 300);
        ASSERT_TRUE(uv);
        EXPECT_LT(angle(cylindrical_inverse(*uv, 300), d), 1e-9);
    }
}

TEST(Fisheye, EquidistantRadius) {
    const Vec3 d = lonlat_to_dir({0.5, 0.0});
    const auto uv = fisheye_forward(d, 200);
    ASSERT_TRUE(uv);
    EXPECT_NEAR(uv->norm(), 200 * 0.5, 1e-12);
    EXPECT_FALSE(fisheye_forward(Vec3(0, 0, -1), 200));
}

TEST(Polyhedron, FaceCounts) {
    EXPECT_EQ(polyhedron_faces(0).size(), 20u);
    EXPECT_EQ(polyhedron_faces(2).size(), 320u);
    EXPECT_THROW(polyhedron_faces(-1), std::invalid_argument);
    EXPECT_THROW(polyhedron_faces(kMaxPolyhedronLevel + 1), std::invalid_argument);
}

TEST(Polyhedron, FacesPartitionTheSphere) {
    const auto faces = polyhedron_faces(1);
    std::mt19937_64 rng(27);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 d = fixtures::random_unit(rng);
        int containing = 0;
        int first = -1;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (faces[f].contains(d)) {
                if (first < 0) first = static_cast<int>(f);
                ++containing;
            }
        }
        // Off-edge directions lie in exactly one face; ties go to the lowest index.
        ASSERT_GE(containing, 1);
        EXPECT_EQ(polyhedron_face_of(faces, d), first);
    }
}

TEST(Formats, NamesRoundTrip) {
    for (const std::string &name : format_names()) EXPECT_EQ(format_name(format_from_name(name)), name);
    EXPECT_THROW(format_from_name("mercator"), std::invalid_argument);
}

TEST(Canvas, RejectsBadShapes) {
    EXPECT_THROW(PanoramaCanvas(EquirectFormat{}, 1000, 400), std::invalid_argument);
    EXPECT_THROW(PanoramaCanvas(PlanarFormat{}, 0, 100), std::invalid_argument);
    EXPECT_THROW(PanoramaCanvas(CubemapFormat{}, 1000, 1000), std::invalid_argument);
}

TEST(Canvas, CenterLooksForward) {
    for (const std::string &name : format_names()) {
        if (name == "littleplanet" || name == "cubemap" || name == "polyhedron") continue;
        const PanoramaCanvas canvas(format_from_name(name), 1024, 512);
        const auto d = canvas.pixel_to_dir(512, 256);
        ASSERT_TRUE(d) << name;
        EXPECT_LT(angle(*d, Vec3(0, 0, 1)), 1e-12) << name;
    }
    const PanoramaCanvas planet(LittlePlanetFormat{}, 512, 512);
    EXPECT_LT(angle(*planet.pixel_to_dir(256, 256), Vec3(0, 1, 0)), 1e-12);
}

TEST(Canvas, RoundTripEveryFormat) {
    std::mt19937_64 rng(28);
    for (const std::string &name : format_names()) {
        const ProjectionFormat f = format_from_name(name);
        const int w = name == "cubemap" ? 1536 : 2048;
        const PanoramaCanvas canvas(f, w, 1024);
        int tested = 0;
        while (tested < 2000) {
            const Vec3 d = fixtures::random_unit(rng);
            const auto p = canvas.dir_to_pixel(d);
            if (!p) continue;
            const auto back = canvas.pixel_to_dir(p->x(), p->y());
            // Formats with a bounded domain report the far side as unmapped.
            if (!back) continue;
            ++tested;
            EXPECT_LT(angle(*back, d), 1e-6) << name;
        }
    }
}

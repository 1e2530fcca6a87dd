#include "fixtures.hpp"

#include "pano/pipeline.hpp"
#include "pano/synthetic.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace pano;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Camera centered_camera(int w, int h, double focal, const Rotation &r = {}) {
    Camera c;
    c.intrinsics = {focal, w / 2.0, h / 2.0, w, h};
    c.rotation = r;
    return c;
}

struct RingScene {
    std::vector<ColorImage> images;
    std::vector<Camera> cameras;
};

RingScene ring_scene(int count, double spacing, int size = 128) {
    RingScene s;
    s.cameras = ring_cameras(count, spacing, intrinsics_from_fov(size, size, 60 * kDeg));
    s.images = render_synthetic_scene(procedural_erp(512, 256), s.cameras);
    return s;
}

}  // namespace

TEST(SuggestProjection, ByAngularSpan) {
    const Intrinsics k = intrinsics_from_fov(200, 200, 60 * kDeg);
    EXPECT_EQ(format_name(suggest_projection(ring_cameras(1, 0.0, k))), "planar");
    EXPECT_EQ(format_name(suggest_projection(ring_cameras(2, 90 * kDeg, k))), "cylindrical");
    EXPECT_EQ(format_name(suggest_projection(ring_cameras(24, 15 * kDeg, k))), "erp");
    EXPECT_NEAR(angular_span(ring_cameras(2, 90 * kDeg, k)), 150 * kDeg, 1e-9);
    EXPECT_THROW(angular_span({}), std::invalid_argument);
}

TEST(Stitch, SingleImageOnItsOwnPlane) {
    const ColorImage img = fixtures::textured_image(160, 120, 130);
    StitchConfig cfg;
    cfg.format = PlanarFormat{80};
    cfg.width = 160;
    cfg.height = 120;
    const StitchResult r = stitch({img}, {centered_camera(160, 120, 80)}, cfg);
    for (int y = 0; y + 1 < 120; ++y) {
        for (int x = 0; x + 1 < 160; ++x) {
            ASSERT_TRUE(r.coverage(x, y));
            EXPECT_LE((r.panorama(x, y) - img(x, y)).abs().maxCoeff(), 1.0f / 255);
        }
    }
    EXPECT_EQ(r.report.images, 1);
    EXPECT_EQ(r.report.projection, "planar");
}

TEST(Stitch, CoverageIsTheUnionOfLayers) {
    const RingScene s = ring_scene(3, 45 * kDeg);
    StitchConfig cfg;
    cfg.width = 512;
    cfg.height = 256;
    for (BlendMode mode : {BlendMode::None, BlendMode::Feather, BlendMode::Multiband}) {
        cfg.blend.mode = mode;
        const StitchResult r = stitch(s.images, s.cameras, cfg);
        Mask expected(512, 256, 0);
        for (const WarpedLayer &l : r.layers) expected = mask_or(expected, l.valid);
        EXPECT_EQ(r.coverage, expected);
        for (std::size_t i = 0; i < r.labels.size(); ++i) {
            if (r.coverage[i]) {
                ASSERT_GE(r.labels[i], 0);
                EXPECT_TRUE(r.layers[r.labels[i]].valid[i]);
            } else {
                EXPECT_EQ(r.labels[i], kNoLabel);
                EXPECT_TRUE((r.panorama[i] == cfg.blend.background).all());
            }
        }
    }
}

TEST(Stitch, SeamToggleNeverRaisesEnergy) {
    const RingScene s = ring_scene(3, 40 * kDeg);
    StitchConfig cfg;
    cfg.width = 512;
    cfg.height = 256;
    cfg.seam = false;
    const StitchResult plain = stitch(s.images, s.cameras, cfg);
    cfg.seam = true;
    const StitchResult cut = stitch(s.images, s.cameras, cfg);
    ASSERT_TRUE(plain.report.seam_energy && cut.report.seam_energy);
    EXPECT_LE(*cut.report.seam_energy, *plain.report.seam_energy);
}

TEST(Stitch, ReconstructsTheSyntheticSphere) {
    const ColorImage erp = procedural_erp(512, 256);
    const auto cams = ring_cameras(8, 45 * kDeg, intrinsics_from_fov(128, 128, 60 * kDeg));
    const auto views = render_synthetic_scene(erp, cams);
    StitchConfig cfg;
    cfg.width = 512;
    cfg.height = 256;
    StitchResult r = stitch(views, cams, cfg);
    evaluate_against_reference(r, erp);
    ASSERT_TRUE(r.report.reference_psnr);
    EXPECT_GT(*r.report.reference_psnr, 35.0);
    EXPECT_THROW(evaluate_against_reference(r, ColorImage(10, 10)), std::invalid_argument);
}

TEST(Stitch, DisjointViewsWarn) {
    const RingScene s = ring_scene(2, 150 * kDeg);
    StitchConfig cfg;
    cfg.width = 512;
    cfg.height = 256;
    const StitchResult r = stitch(s.images, s.cameras, cfg);
    ASSERT_FALSE(r.report.warnings.empty());
    EXPECT_NE(r.report.warnings[0].find("no overlapping"), std::string::npos);
}

TEST(Stitch, BundleAdjustmentWithoutMatchesWarns) {
    const RingScene s = ring_scene(2, 45 * kDeg);
    StitchConfig cfg;
    cfg.width = 256;
    cfg.height = 128;
    cfg.bundle_adjust = true;
    const StitchResult r = stitch(s.images, s.cameras, cfg);
    EXPECT_FALSE(r.report.bundle);
    EXPECT_FALSE(r.report.warnings.empty());
}

TEST(Stitch, BundleAdjustmentRepairsJitter) {
    std::mt19937_64 rng(131);
    const RingScene s = ring_scene(3, 45 * kDeg);
    const MatchSet m = fixtures::synthesize_matches(s.cameras, {{0, 1}, {1, 2}}, 30, rng);
    auto start = s.cameras;
    start[2].rotation = fixtures::random_jitter(rng, 0.02) * start[2].rotation;
    StitchConfig cfg;
    cfg.width = 256;
    cfg.height = 128;
    cfg.bundle_adjust = true;
    const StitchResult r = stitch(s.images, start, cfg, m);
    ASSERT_TRUE(r.report.bundle);
    EXPECT_LT(rotation_angle_between(r.cameras[2].rotation, s.cameras[2].rotation), 1e-6);
}

TEST(Stitch, RejectsBadInput) {
    StitchConfig cfg;
    EXPECT_THROW(stitch(std::vector<ColorImage>{}, std::vector<Camera>{}, cfg), std::invalid_argument);
    EXPECT_THROW(stitch({ColorImage(4, 4)}, std::vector<Camera>{}, cfg), std::invalid_argument);
}

TEST(Report, JsonHasTheStages) {
    const RingScene s = ring_scene(2, 45 * kDeg);
    StitchConfig cfg;
    cfg.width = 256;
    cfg.height = 128;
    const StitchResult r = stitch(s.images, s.cameras, cfg);
    const auto j = nlohmann::json::parse(report_to_json(r.report));
    EXPECT_EQ(j["projection"], "erp");
    EXPECT_EQ(j["images"], 2);
    EXPECT_TRUE(j.contains("timings_s"));
    EXPECT_TRUE(j.contains("warnings"));
    EXPECT_GT(j["covered_pixels"].get<long>(), 0);
}

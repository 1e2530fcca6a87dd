#include "fixtures.hpp"

#include "pano/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pano;

namespace {

constexpr double kPi = std::numbers::pi;

Camera make_camera(double f, double cx, double cy, int w, int h, const Rotation &r = {}) {
    Camera c;
    c.intrinsics = {f, cx, cy, w, h};
    c.rotation = r;
    return c;
}

}  // namespace

TEST(Rotation, ZeroAngleAxisIsIdentity) {
    EXPECT_TRUE(rotation_from_angle_axis(Vec3::Zero()).matrix().isApprox(Mat3::Identity(), 0.0));
}

TEST(Rotation, QuarterTurnAboutZ) {
    Mat3 expected;
    expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    const Mat3 m = rotation_from_angle_axis(Vec3(0, 0, kPi / 2)).matrix();
    EXPECT_LT((m - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Rotation, AngleAxisRoundTrip) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> angle(0.0, kPi - 1e-6);
    for (int i = 0; i < 1000; ++i) {
        const Vec3 v = fixtures::random_unit(rng) * angle(rng);
        EXPECT_LT((rotation_to_angle_axis(rotation_from_angle_axis(v)) - v).norm(), 1e-9);
    }
}

TEST(Rotation, HalfTurnAxisSignIsCanonical) {
    const Vec3 v = rotation_to_angle_axis(rotation_from_angle_axis(Vec3(-kPi, 0, 0)));
    EXPECT_NEAR(v.x(), kPi, 1e-12);
    EXPECT_NEAR(v.y(), 0.0, 1e-12);
    const Vec3 w = rotation_to_angle_axis(rotation_from_angle_axis(Vec3(0, -1, 1).normalized() * kPi));
    EXPECT_NEAR(w.norm(), kPi, 1e-9);
    EXPECT_GT(w.y(), 0.0);
}

TEST(Rotation, ValidationRejectsNonRotations) {
    EXPECT_THROW(Rotation(Mat3::Identity() * 2.0), std::invalid_argument);
    Mat3 reflection = Mat3::Identity();
    reflection(0, 0) = -1;
    EXPECT_THROW(Rotation{reflection}, std::invalid_argument);
}

TEST(Rotation, LongChainsStayOrthonormal) {
    std::mt19937_64 rng(11);
    Rotation r;
    for (int i = 0; i < 10000; ++i) r = fixtures::random_rotation(rng) * r;
    const Mat3 &m = r.matrix();
    EXPECT_LT((m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-9);
}

TEST(Rotation, QuaternionMatchesAngleAxis) {
    const double a = 0.7;
    const Vec3 axis = Vec3(1, 2, 3).normalized();
    const Rotation q = rotation_from_quaternion(std::cos(a / 2), std::sin(a / 2) * axis.x(), std::sin(a / 2) * axis.y(),
                                                std::sin(a / 2) * axis.z());
    EXPECT_LT((q.matrix() - rotation_from_angle_axis(axis * a).matrix()).cwiseAbs().maxCoeff(), 1e-12);
    // Normalized before use.
    const Rotation scaled = rotation_from_quaternion(2 * std::cos(a / 2), 2 * std::sin(a / 2) * axis.x(),
                                                     2 * std::sin(a / 2) * axis.y(), 2 * std::sin(a / 2) * axis.z());
    EXPECT_LT((scaled.matrix() - q.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rotation, AngleBetween) {
    const Rotation a = rotation_from_angle_axis(Vec3(0, 0.3, 0));
    const Rotation b = rotation_from_angle_axis(Vec3(0, 0.5, 0));
    EXPECT_NEAR(rotation_angle_between(a, b), 0.2, 1e-12);
}

TEST(Camera, PrincipalPointLooksAlongZ) {
    const Camera c = make_camera(500, 320, 240, 640, 480);
    EXPECT_LT((pixel_to_ray(c, Vec2(320, 240)) - Vec3(0, 0, 1)).norm(), 1e-15);
}

TEST(Camera, YawTurnsForwardTowardPositiveX) {
    const Camera c = make_camera(500, 320, 240, 640, 480, rotation_from_yaw_pitch_roll(kPi / 2, 0));
    EXPECT_LT((pixel_to_ray(c, Vec2(320, 240)) - Vec3(1, 0, 0)).norm(), 1e-12);
    EXPECT_LT((c.optical_axis() - Vec3(1, 0, 0)).norm(), 1e-12);
}

TEST(Camera, PitchTurnsForwardTowardNegativeY) {
    const Camera c = make_camera(500, 320, 240, 640, 480, rotation_from_yaw_pitch_roll(0, kPi / 2));
    EXPECT_LT((c.optical_axis() - Vec3(0, -1, 0)).norm(), 1e-12);
}

TEST(Camera, RayToPixelAnchors) {
    const Camera c = make_camera(500, 320, 240, 640, 480);
    const auto p = ray_to_pixel(c, Vec3(0, 0, 1));
    ASSERT_TRUE(p);
    EXPECT_LT((*p - Vec2(320, 240)).norm(), 1e-12);
    EXPECT_FALSE(ray_to_pixel(c, Vec3(0, 0, -1)));
}

TEST(Camera, PixelRayRoundTrip) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ux(-100, 740);
    std::uniform_real_distribution<double> uy(-100, 580);
    for (int i = 0; i < 1000; ++i) {
        const Camera c = fixtures::random_camera(rng, 640, 480, 200, 900);
        const Vec2 px(ux(rng), uy(rng));
        const auto back = ray_to_pixel(c, pixel_to_ray(c, px));
        ASSERT_TRUE(back);
        EXPECT_LT((*back - px).norm(), 1e-6);
    }
}

TEST(Homography, SameCameraIsIdentity) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 100; ++i) {
        const Camera c = fixtures::random_camera(rng, 640, 480, 200, 900);
        EXPECT_LT((homography_between(c, c) - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Homography, ForwardTimesBackwardIsIdentity) {
    std::mt19937_64 rng(14);
    for (int i = 0; i < 100; ++i) {
        const Camera a = fixtures::random_camera(rng, 640, 480, 200, 900);
        const Camera b = fixtures::random_camera(rng, 800, 600, 200, 900);
        const Mat3 p = normalize_homography(homography_between(a, b) * homography_between(b, a));
        EXPECT_LT((p - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Homography, TenDegreeYawShiftsCenter) {
    const Camera i = make_camera(500, 250, 250, 500, 500);
    const Camera j = make_camera(500, 250, 250, 500, 500, rotation_from_yaw_pitch_roll(10 * kPi / 180, 0));
    const Vec3 h = homography_between(i, j) * Vec3(250, 250, 1);
    // The world forward axis sits 10 degrees left of the yawed camera's axis.
    EXPECT_NEAR(h.x() / h.z(), 250 - 500 * std::tan(10 * kPi / 180), 1e-9);
    EXPECT_NEAR(h.y() / h.z(), 250, 1e-9);
}

TEST(Homography, AgreesWithRayTransfer) {
    std::mt19937_64 rng(15);
    for (int n = 0; n < 100; ++n) {
        const Camera a = fixtures::random_camera(rng, 640, 480, 300, 900);
        Camera b = fixtures::random_camera(rng, 640, 480, 300, 900);
        b.rotation = fixtures::random_jitter(rng, 0.3) * a.rotation;
        const Vec2 p(300, 200);
        const auto q = ray_to_pixel(b, pixel_to_ray(a, p));
        ASSERT_TRUE(q);
        const Vec3 h = homography_between(a, b) * Vec3(p.x(), p.y(), 1.0);
        EXPECT_LT((Vec2(h.x() / h.z(), h.y() / h.z()) - *q).norm(), 1e-8);
    }
}

TEST(Homography, NormalizationFallsBackToLargestEntry) {
    Mat3 h;
    h << 2, -8, 1, 0, 4, 0, 1, 0, 0;
    const Mat3 n = normalize_homography(h);
    EXPECT_DOUBLE_EQ(n(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(n(0, 0), -0.25);
}

TEST(Intrinsics, RescaleHalvesFocalAndCenter) {
    const Intrinsics k{500, 500, 500, 1000, 1000};
    const Intrinsics r = rescale_intrinsics(k, 500, 500);
    EXPECT_DOUBLE_EQ(r.focal, 250);
    EXPECT_DOUBLE_EQ(r.principal_x, 250);
    EXPECT_DOUBLE_EQ(r.principal_y, 250);
    EXPECT_EQ(r.width, 500);
}

TEST(Intrinsics, RescaleToSameSizeIsIdentity) {
    const Intrinsics k{512, 300, 200, 640, 480};
    const Intrinsics r = rescale_intrinsics(k, 640, 480);
    EXPECT_EQ(r.focal, k.focal);
    EXPECT_EQ(r.principal_x, k.principal_x);
    EXPECT_EQ(r.principal_y, k.principal_y);
}

TEST(Intrinsics, RescaleRejectsAspectChange) {
    EXPECT_THROW(rescale_intrinsics({500, 500, 500, 1000, 1000}, 1000, 500), AnisotropicScaleError);
}

TEST(Intrinsics, ValidateRejectsBadValues) {
    EXPECT_THROW((Intrinsics{0, 1, 1, 10, 10}.validate()), std::invalid_argument);
    EXPECT_THROW((Intrinsics{1, 1, 1, 0, 10}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((Intrinsics{1, 1, 1, 10, 10}.validate()));
}

TEST(So3, RightJacobianMatchesFiniteDifferences) {
    // R(w + dw) ~= R(w) exp(J_r(w) dw)
    std::mt19937_64 rng(16);
    for (int n = 0; n < 50; ++n) {
        const Vec3 w = fixtures::random_unit(rng) * 2.5 * (n + 1) / 50.0;
        const Mat3 jr = so3_right_jacobian(w);
        const Mat3 r = rotation_from_angle_axis(w).matrix();
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-6;
            Vec3 dw = Vec3::Zero();
            dw[k] = h;
            const Mat3 plus = rotation_from_angle_axis(w + dw).matrix();
            const Mat3 minus = rotation_from_angle_axis(w - dw).matrix();
            const Mat3 dr = r.transpose() * (plus - minus) / (2 * h);  // skew(J_r e_k)
            const Vec3 numeric(dr(2, 1), dr(0, 2), dr(1, 0));
            EXPECT_LT((numeric - jr.col(k)).norm(), 1e-7);
        }
    }
}

#include "fixtures.hpp"

#include "pano/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pano;

TEST(Psnr, IdenticalIsInfinite) {
    const ColorImage a = fixtures::textured_image(20, 20, 110);
    EXPECT_TRUE(std::isinf(psnr(a, a, Mask(20, 20, 1))));
    EXPECT_EQ(displayable_psnr(psnr(a, a, Mask(20, 20, 1))), kPsnrDisplayCap);
}

TEST(Psnr, ZerosAgainstOnesIsZero) {
    const ColorImage a(8, 8, Rgb::Zero()), b(8, 8, Rgb::Ones());
    EXPECT_NEAR(psnr(a, b, Mask(8, 8, 1)), 0.0, 1e-12);
}

TEST(Psnr, KnownMse) {
    const ColorImage a(10, 10, Rgb::Constant(0.5f)), b(10, 10, Rgb::Constant(0.6f));
    const double mse = std::pow(double(0.6f) - double(0.5f), 2);
    EXPECT_NEAR(psnr(a, b, Mask(10, 10, 1)), -10 * std::log10(mse), 1e-4);
}

TEST(Psnr, OnlyMaskedPixelsCount) {
    ColorImage a(10, 10, Rgb::Zero()), b(10, 10, Rgb::Zero());
    b(3, 3) = Rgb::Ones();
    Mask m(10, 10, 1);
    m(3, 3) = 0;
    EXPECT_TRUE(std::isinf(psnr(a, b, m)));
}

TEST(Psnr, SymmetricAndValidated) {
    const ColorImage a = fixtures::textured_image(16, 12, 111);
    const ColorImage b = fixtures::textured_image(16, 12, 112);
    const Mask m(16, 12, 1);
    EXPECT_DOUBLE_EQ(psnr(a, b, m), psnr(b, a, m));
    EXPECT_THROW(psnr(a, b, Mask(16, 12, 0)), std::invalid_argument);
    EXPECT_THROW(psnr(a, ColorImage(16, 11), m), std::invalid_argument);
}

TEST(Ssim, IdenticalIsOne) {
    const ColorImage a = fixtures::textured_image(40, 30, 113);
    EXPECT_NEAR(ssim(a, a, Mask(40, 30, 1)), 1.0, 1e-9);
}

TEST(Ssim, SymmetricAndBounded) {
    const ColorImage a = fixtures::textured_image(40, 30, 114);
    const ColorImage b = fixtures::textured_image(40, 30, 115);
    const Mask m(40, 30, 1);
    const double s = ssim(a, b, m);
    EXPECT_NEAR(s, ssim(b, a, m), 1e-12);
    EXPECT_LT(s, 0.9);
    EXPECT_GE(s, -1.0);
    EXPECT_THROW(ssim(a, b, Mask(40, 30, 0)), std::invalid_argument);
}

TEST(Ssim, DegradesWithNoise) {
    const ColorImage a = fixtures::textured_image(48, 48, 116);
    ColorImage small = a, large = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const float n = (i * 2654435761u % 1000) / 1000.0f - 0.5f;
        small[i] += 0.02f * n;
        large[i] += 0.2f * n;
    }
    const Mask m(48, 48, 1);
    EXPECT_GT(ssim(a, small, m), ssim(a, large, m));
}

#include "pano/synthetic.hpp"

#include "pano/parallel.hpp"
#include "pano/projection.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace pano {

namespace {

struct Wave {
    Vec3 k;
    double phase;
    Eigen::Array3d amplitude;
};

std::vector<Wave> make_waves(std::uint32_t seed, double max_frequency) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    constexpr int kWaves = 32;
    std::vector<Wave> waves;
    for (int i = 0; i < kWaves; ++i) {
        Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
        dir.normalize();
        // Mix of broad and fine structure.
        const double freq = 1.0 + (max_frequency - 1.0) * uni(rng);
        Wave w;
        w.k = dir * (2.0 * std::numbers::pi * freq);
        w.phase = 2.0 * std::numbers::pi * uni(rng);
        w.amplitude = Eigen::Array3d(uni(rng), uni(rng), uni(rng)) * (0.9 / kWaves);
        waves.push_back(w);
    }
    return waves;
}

}  // namespace

ColorImage procedural_erp(int width, int height, std::uint32_t seed, double max_frequency) {
    if (width != 2 * height || height <= 0) throw std::invalid_argument("ERP texture needs width = 2 * height");
    const std::vector<Wave> waves = make_waves(seed, max_frequency);
    ColorImage out(width, height);
    parallel_for(0, height, [&](int y) {
        for (int x = 0; x < width; ++x) {
            const Vec3 d = erp_inverse(x, y, width, height);
            Eigen::Array3d c = Eigen::Array3d::Constant(0.5);
            for (const Wave &w : waves) c += w.amplitude * std::sin(w.k.dot(d) + w.phase);
            out(x, y) = c.max(0.0).min(1.0).cast<float>();
        }
    });
    return out;
}

Rgb sample_erp(const ColorImage &erp, double u, double v) {
    const int w = erp.width();
    const int h = erp.height();
    v = std::clamp(v, 0.0, static_cast<double>(h - 1));
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    const double ax = u - fu;
    const double ay = v - fv;
    const int x0 = ((static_cast<int>(fu) % w) + w) % w;
    const int x1 = (x0 + 1) % w;
    const int y0 = static_cast<int>(fv);
    const int y1 = std::min(y0 + 1, h - 1);
    const Eigen::Array3d top =
        (1 - ax) * erp(x0, y0).cast<double>() + ax * erp(x1, y0).cast<double>();
    const Eigen::Array3d bot =
        (1 - ax) * erp(x0, y1).cast<double>() + ax * erp(x1, y1).cast<double>();
    return ((1 - ay) * top + ay * bot).cast<float>();
}

Intrinsics intrinsics_from_fov(int width, int height, double horizontal_fov) {
    if (!(horizontal_fov > 0.0 && horizontal_fov < std::numbers::pi)) {
        throw std::invalid_argument("field of view must lie in (0, 180) degrees");
    }
    Intrinsics k;
    k.width = width;
    k.height = height;
    k.focal = 0.5 * width / std::tan(0.5 * horizontal_fov);
    k.principal_x = 0.5 * width;
    k.principal_y = 0.5 * height;
    k.validate();
    return k;
}

std::vector<ColorImage> render_synthetic_scene(const ColorImage &erp, const std::vector<Camera> &cameras) {
    if (erp.width() != 2 * erp.height() || erp.empty()) throw std::invalid_argument("ground truth must be an ERP image");
    std::vector<ColorImage> out;
    for (const Camera &cam : cameras) {
        cam.intrinsics.validate();
        ColorImage img(cam.intrinsics.width, cam.intrinsics.height);
        parallel_for(0, img.height(), [&](int y) {
            for (int x = 0; x < img.width(); ++x) {
                const Vec2 uv = erp_forward(pixel_to_ray(cam, Vec2(x, y)), erp.width(), erp.height());
                img(x, y) = sample_erp(erp, uv.x(), uv.y());
            }
        });
        out.push_back(std::move(img));
    }
    return out;
}

std::vector<Camera> ring_cameras(int count, double spacing, const Intrinsics &intrinsics) {
    std::vector<Camera> cams;
    for (int i = 0; i < count; ++i) {
        Camera c;
        c.intrinsics = intrinsics;
        c.rotation = rotation_from_yaw_pitch_roll(i * spacing, 0.0, 0.0);
        cams.push_back(c);
    }
    return cams;
}

}  // namespace pano

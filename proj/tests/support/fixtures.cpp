#include "fixtures.hpp"

#include "pano/synthetic.hpp"

#include <cmath>
#include <numbers>

namespace pano::fixtures {

Vec3 random_unit(std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
        const Vec3 v(g(rng), g(rng), g(rng));
        const double n = v.norm();
        if (n > 1e-6) return v / n;
    }
}

Rotation random_rotation(std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    return rotation_from_quaternion(g(rng), g(rng), g(rng), g(rng));
}

Rotation random_jitter(std::mt19937_64 &rng, double max_angle) {
    std::uniform_real_distribution<double> u(0.0, max_angle);
    return rotation_from_angle_axis(random_unit(rng) * u(rng));
}

Camera random_camera(std::mt19937_64 &rng, int width, int height, double focal_lo, double focal_hi) {
    std::uniform_real_distribution<double> f(focal_lo, focal_hi);
    std::uniform_real_distribution<double> off(-0.1, 0.1);
    Camera c;
    c.intrinsics.width = width;
    c.intrinsics.height = height;
    c.intrinsics.focal = f(rng);
    c.intrinsics.principal_x = width * (0.5 + off(rng));
    c.intrinsics.principal_y = height * (0.5 + off(rng));
    c.rotation = random_rotation(rng);
    return c;
}

MatchSet synthesize_matches(const std::vector<Camera> &cameras, const std::vector<std::pair<int, int>> &pairs,
                            int per_pair, std::mt19937_64 &rng) {
    MatchSet set;
    for (const auto &[i, j] : pairs) {
        const Camera &ci = cameras[i];
        const Camera &cj = cameras[j];
        std::uniform_real_distribution<double> ux(0.0, ci.intrinsics.width - 1.0);
        std::uniform_real_distribution<double> uy(0.0, ci.intrinsics.height - 1.0);
        int found = 0;
        for (int attempt = 0; found < per_pair && attempt < 1000000; ++attempt) {
            const Vec2 p(ux(rng), uy(rng));
            const auto q = ray_to_pixel(cj, pixel_to_ray(ci, p));
            if (!q || q->x() < 0 || q->y() < 0 || q->x() > cj.intrinsics.width - 1 ||
                q->y() > cj.intrinsics.height - 1) {
                continue;
            }
            set.add(i, j, p, *q);
            ++found;
        }
    }
    return set;
}

ColorImage textured_image(int width, int height, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    struct Wave {
        double kx, ky, phase, amp;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < 40; ++i) {
        const double freq = 0.02 + 0.2 * u(rng);  // cycles per pixel
        const double ang = 2.0 * std::numbers::pi * u(rng);
        waves.push_back({2.0 * std::numbers::pi * freq * std::cos(ang), 2.0 * std::numbers::pi * freq * std::sin(ang),
                         2.0 * std::numbers::pi * u(rng), 0.4 / 40.0 * (0.5 + u(rng))});
    }
    ColorImage img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v = 0.5;
            for (const Wave &w : waves) v += 2.0 * w.amp * std::sin(w.kx * x + w.ky * y + w.phase);
            img(x, y) = Rgb::Constant(static_cast<float>(std::clamp(v, 0.0, 1.0)));
        }
    }
    return img;
}

ParallaxPair two_plane_pair(int width, int height, int ref_end, int target_begin, int top_shift, int bottom_shift,
                            unsigned seed) {
    const int margin = std::max(std::abs(top_shift), std::abs(bottom_shift)) + 1;
    const ColorImage tex = textured_image(width + 2 * margin, height, seed);
    ParallaxPair out;
    out.reference.color = ColorImage(width, height, Rgb::Zero());
    out.reference.valid = Mask(width, height, 0);
    out.reference.source_index = 0;
    out.target.color = ColorImage(width, height, Rgb::Zero());
    out.target.valid = Mask(width, height, 0);
    out.target.source_index = 1;
    for (int y = 0; y < height; ++y) {
        const int shift = y < height / 2 ? top_shift : bottom_shift;
        for (int x = 0; x < width; ++x) {
            if (x < ref_end) {
                out.reference.color(x, y) = tex(x + margin, y);
                out.reference.valid(x, y) = 1;
            }
            if (x >= target_begin) {
                out.target.color(x, y) = tex(x - shift + margin, y);
                out.target.valid(x, y) = 1;
            }
        }
    }
    return out;
}

WarpedLayer constant_layer(int width, int height, const Rgb &color, const Mask &valid, int index) {
    WarpedLayer l;
    l.color = ColorImage(width, height, color);
    l.valid = valid;
    l.source_index = index;
    return l;
}

}  // namespace pano::fixtures

#include "pano/metrics.hpp"

#include "pano/parallel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace pano {

namespace {

void check(const ColorImage &a, const ColorImage &b, const Mask &mask) {
    if (a.width() != b.width() || a.height() != b.height() || mask.width() != a.width() ||
        mask.height() != a.height()) {
        throw std::invalid_argument("metric inputs differ in size");
    }
    if (count_set(mask) == 0) throw std::invalid_argument("metric mask is empty");
}

std::array<double, 11> gaussian_window() {
    std::array<double, 11> w{};
    double sum = 0.0;
    for (int k = 0; k < 11; ++k) {
        const double d = k - 5;
        w[k] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += w[k];
    }
    for (double &v : w) v /= sum;
    return w;
}

// Separable Gaussian with zero padding.
ScalarMap filter(const ScalarMap &in, const std::array<double, 11> &w) {
    const int width = in.width();
    const int height = in.height();
    ScalarMap tmp(width, height, 0.0);
    ScalarMap out(width, height, 0.0);
    parallel_for(0, height, [&](int y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 11; ++k) {
                const int xx = x + k - 5;
                if (xx >= 0 && xx < width) acc += w[k] * in(xx, y);
            }
            tmp(x, y) = acc;
        }
    });
    parallel_for(0, height, [&](int y) {
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 11; ++k) {
                const int yy = y + k - 5;
                if (yy >= 0 && yy < height) acc += w[k] * tmp(x, yy);
            }
            out(x, y) = acc;
        }
    });
    return out;
}

}  // namespace

double psnr(const ColorImage &a, const ColorImage &b, const Mask &mask) {
    check(a, b, mask);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        const Eigen::Array3d d = (a[k] - b[k]).cast<double>();
        sum += (d * d).sum();
        n += 3;
    }
    const double mse = sum / static_cast<double>(n);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ColorImage &a, const ColorImage &b, const Mask &mask) {
    check(a, b, mask);
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    const auto w = gaussian_window();
    const int width = a.width();
    const int height = a.height();

    ScalarMap m(width, height, 0.0);
    for (std::size_t k = 0; k < mask.size(); ++k) m[k] = mask[k] ? 1.0 : 0.0;
    const ScalarMap norm = filter(m, w);

    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        ScalarMap xa(width, height), xb(width, height), xaa(width, height), xbb(width, height), xab(width, height);
        for (std::size_t k = 0; k < m.size(); ++k) {
            const double va = m[k] * a[k][c];
            const double vb = m[k] * b[k][c];
            xa[k] = va;
            xb[k] = vb;
            xaa[k] = va * a[k][c];
            xbb[k] = vb * b[k][c];
            xab[k] = va * b[k][c];
        }
        const ScalarMap fa = filter(xa, w), fb = filter(xb, w), faa = filter(xaa, w), fbb = filter(xbb, w),
                        fab = filter(xab, w);
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t k = 0; k < m.size(); ++k) {
            if (!mask[k]) continue;
            const double wn = norm[k];
            const double mu_a = fa[k] / wn;
            const double mu_b = fb[k] / wn;
            const double var_a = faa[k] / wn - mu_a * mu_a;
            const double var_b = fbb[k] / wn - mu_b * mu_b;
            const double cov = fab[k] / wn - mu_a * mu_b;
            sum += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            ++n;
        }
        total += sum / static_cast<double>(n);
    }
    return total / 3.0;
}

double displayable_psnr(double value) { return std::isfinite(value) ? std::min(value, kPsnrDisplayCap) : kPsnrDisplayCap; }

}  // namespace pano

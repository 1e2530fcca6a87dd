#include "pano/blend.hpp"

#include "pano/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pano {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr float kBinomial[5] = {1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16};

void check_inputs(std::span<const WarpedLayer> layers, std::span<const Mask> masks) {
    if (layers.empty()) throw std::invalid_argument("blend needs at least one layer");
    if (layers.size() != masks.size()) throw std::invalid_argument("one seam mask per layer is required");
    const int w = layers[0].width();
    const int h = layers[0].height();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (layers[i].width() != w || layers[i].height() != h || masks[i].width() != w || masks[i].height() != h) {
            throw std::invalid_argument("blend inputs must share one canvas");
        }
    }
}

Mask union_coverage(std::span<const WarpedLayer> layers) {
    Mask cov(layers[0].width(), layers[0].height(), 0);
    for (const auto &l : layers) {
        for (std::size_t k = 0; k < cov.size(); ++k) cov[k] |= l.valid[k] ? 1 : 0;
    }
    return cov;
}

// Squared 1D distance transform of a sampled function (lower envelope of parabolas).
void distance_1d(const double *f, double *d, int n, std::vector<int> &v, std::vector<double> &z) {
    v.resize(static_cast<std::size_t>(n));
    z.resize(static_cast<std::size_t>(n) + 1);
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double s = 0.0;
        for (;;) {
            const int p = v[k];
            s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
            if (s > z[k]) break;
            --k;  // z[0] is -inf, so this stops at k = 0
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    if (k < 0) {
        std::fill(d, d + n, kInf);
        return;
    }
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[j + 1] < q) ++j;
        const double dq = q - v[j];
        d[q] = dq * dq + f[v[j]];
    }
}

Mask invert(const Mask &m) {
    Mask out(m.width(), m.height(), 0);
    for (std::size_t k = 0; k < m.size(); ++k) out[k] = m[k] ? 0 : 1;
    return out;
}

int reflect(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

template <typename T>
Grid<T> blur_binomial(const Grid<T> &in, float gain) {
    const int w = in.width();
    const int h = in.height();
    Grid<T> tmp(w, h);
    Grid<T> out(w, h);
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            T acc = in(reflect(x - 2, w), y) * kBinomial[0];
            for (int k = 1; k < 5; ++k) acc += in(reflect(x - 2 + k, w), y) * kBinomial[k];
            tmp(x, y) = acc * gain;
        }
    });
    parallel_for(0, h, [&](int y) {
        for (int x = 0; x < w; ++x) {
            T acc = tmp(x, reflect(y - 2, h)) * kBinomial[0];
            for (int k = 1; k < 5; ++k) acc += tmp(x, reflect(y - 2 + k, h)) * kBinomial[k];
            out(x, y) = acc * gain;
        }
    });
    return out;
}

template <typename T>
Grid<T> reduce_impl(const Grid<T> &in) {
    const Grid<T> blurred = blur_binomial(in, 1.0f);
    const int w = (in.width() + 1) / 2;
    const int h = (in.height() + 1) / 2;
    Grid<T> out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) out(x, y) = blurred(2 * x, 2 * y);
    }
    return out;
}

ColorImage extend_nearest(const WarpedLayer &layer) {
    const int w = layer.width();
    const int h = layer.height();
    ColorImage out(w, h, Rgb::Zero());
    Grid<std::uint8_t> done(w, h, 0);
    std::vector<int> frontier;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (layer.valid(x, y)) {
                out(x, y) = layer.color(x, y);
                done(x, y) = 1;
                frontier.push_back(y * w + x);
            }
        }
    }
    std::vector<int> next;
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    while (!frontier.empty()) {
        next.clear();
        for (int idx : frontier) {
            const int x = idx % w;
            const int y = idx / w;
            for (int k = 0; k < 4; ++k) {
                const int qx = x + dx[k];
                const int qy = y + dy[k];
                if (!done.contains(qx, qy) || done(qx, qy)) continue;
                done(qx, qy) = 1;
                out(qx, qy) = out(x, y);
                next.push_back(qy * w + qx);
            }
        }
        frontier.swap(next);
    }
    return out;
}

// Order in which layers are accumulated. Keyed on content so that reordering
// the inputs does not change floating-point summation order.
std::vector<std::size_t> canonical_order(std::span<const WarpedLayer> layers) {
    struct Key {
        std::size_t count = 0;
        double r = 0, g = 0, b = 0;
        std::size_t first = 0;
    };
    std::vector<Key> keys(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto &l = layers[i];
        Key &k = keys[i];
        k.first = l.valid.size();
        for (std::size_t p = 0; p < l.valid.size(); ++p) {
            if (!l.valid[p]) continue;
            if (k.count == 0) k.first = p;
            ++k.count;
            k.r += l.color[p][0];
            k.g += l.color[p][1];
            k.b += l.color[p][2];
        }
    }
    std::vector<std::size_t> order(layers.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Key &ka = keys[a];
        const Key &kb = keys[b];
        if (ka.first != kb.first) return ka.first < kb.first;
        if (ka.count != kb.count) return ka.count < kb.count;
        if (ka.r != kb.r) return ka.r < kb.r;
        if (ka.g != kb.g) return ka.g < kb.g;
        return ka.b < kb.b;
    });
    return order;
}

}  // namespace

std::string blend_mode_name(BlendMode mode) {
    switch (mode) {
        case BlendMode::None: return "none";
        case BlendMode::Feather: return "feather";
        case BlendMode::Multiband: return "multiband";
    }
    return "unknown";
}

BlendMode blend_mode_from_name(std::string_view name) {
    if (name == "none") return BlendMode::None;
    if (name == "feather") return BlendMode::Feather;
    if (name == "multiband") return BlendMode::Multiband;
    throw std::invalid_argument("unknown blend mode '" + std::string(name) + "'");
}

ScalarMap distance_transform(const Mask &features) {
    const int w = features.width();
    const int h = features.height();
    ScalarMap sq(w, h, kInf);
    for (std::size_t k = 0; k < features.size(); ++k) {
        if (features[k]) sq[k] = 0.0;
    }
    // Columns, then rows.
    parallel_for(0, w, [&](int x) {
        std::vector<double> f(static_cast<std::size_t>(h));
        std::vector<double> d(static_cast<std::size_t>(h));
        std::vector<int> v;
        std::vector<double> z;
        for (int y = 0; y < h; ++y) f[y] = sq(x, y);
        distance_1d(f.data(), d.data(), h, v, z);
        for (int y = 0; y < h; ++y) sq(x, y) = d[y];
    });
    parallel_for(0, h, [&](int y) {
        std::vector<double> f(static_cast<std::size_t>(w));
        std::vector<double> d(static_cast<std::size_t>(w));
        std::vector<int> v;
        std::vector<double> z;
        for (int x = 0; x < w; ++x) f[x] = sq(x, y);
        distance_1d(f.data(), d.data(), w, v, z);
        for (int x = 0; x < w; ++x) sq(x, y) = std::sqrt(d[x]);
    });
    return sq;
}

int max_bands(int width, int height) {
    const int m = std::min(width, height);
    if (m < 1) return 0;
    int b = 0;
    while ((2 << b) <= m) ++b;
    return b;  // floor(log2(m))
}

int default_bands(std::span<const WarpedLayer> layers) {
    if (layers.empty()) return 1;
    const int cap = std::min(5, max_bands(layers[0].width(), layers[0].height()));
    int extent = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        for (std::size_t j = i + 1; j < layers.size(); ++j) {
            const Box b = bounding_box(mask_and(layers[i].valid, layers[j].valid));
            if (b.empty()) continue;
            extent = std::min(extent, std::min(b.width(), b.height()));
        }
    }
    if (extent == std::numeric_limits<int>::max()) return std::max(1, cap);
    return std::clamp(max_bands(extent, extent), 1, std::max(1, cap));
}

std::vector<ScalarMap> feather_weights(std::span<const Mask> masks, std::span<const WarpedLayer> layers,
                                       double sharpness, double radius) {
    check_inputs(layers, masks);
    if (!(sharpness > 0.0)) throw std::invalid_argument("feather sharpness must be > 0");
    if (radius < 0.0) throw std::invalid_argument("feather radius must be >= 0");
    const int w = layers[0].width();
    const int h = layers[0].height();
    const std::size_t n = layers.size();
    // Stands in for the infinite distance of a mask with no boundary.
    const double far = std::hypot(w, h) + radius + 1.0;

    std::vector<ScalarMap> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        Mask own(w, h, 0);
        for (std::size_t k = 0; k < own.size(); ++k) own[k] = (masks[i][k] && layers[i].valid[k]) ? 1 : 0;
        const ScalarMap to_outside = distance_transform(invert(own));
        const ScalarMap to_inside = distance_transform(own);
        const ScalarMap to_invalid = distance_transform(invert(layers[i].valid));
        ScalarMap d(w, h, 0.0);
        for (std::size_t k = 0; k < d.size(); ++k) {
            if (!layers[i].valid[k]) continue;
            const double signed_dist = own[k] ? std::min(to_outside[k], far) - 0.5 : 0.5 - std::min(to_inside[k], far);
            d[k] = std::min({std::max(0.0, signed_dist + radius), to_invalid[k] - 0.5, far});
            d[k] = std::pow(d[k], sharpness);
        }
        dist[i] = std::move(d);
    }

    std::vector<ScalarMap> weights(n, ScalarMap(w, h, 0.0));
    parallel_for(0, h, [&](int y) {
        std::vector<double> vals;
        for (int x = 0; x < w; ++x) {
            const std::size_t k = static_cast<std::size_t>(y) * w + x;
            vals.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if (dist[i][k] > 0.0) vals.push_back(dist[i][k]);
            }
            std::sort(vals.begin(), vals.end());
            double total = 0.0;
            for (double v : vals) total += v;
            if (total <= 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) weights[i][k] = dist[i][k] / total;
        }
    });
    return weights;
}

BlendResult feather_blend(std::span<const WarpedLayer> layers, std::span<const Mask> masks,
                          const BlendConfig &config) {
    const auto weights = feather_weights(masks, layers, config.feather_sharpness, config.feather_radius);
    const int w = layers[0].width();
    const int h = layers[0].height();
    BlendResult out{ColorImage(w, h, config.background), union_coverage(layers)};

    struct Term {
        double weight;
        float r, g, b;
        bool operator<(const Term &o) const {
            if (weight != o.weight) return weight < o.weight;
            if (r != o.r) return r < o.r;
            if (g != o.g) return g < o.g;
            return b < o.b;
        }
    };
    parallel_for(0, h, [&](int y) {
        std::vector<Term> terms;
        for (int x = 0; x < w; ++x) {
            const std::size_t k = static_cast<std::size_t>(y) * w + x;
            if (!out.coverage[k]) continue;
            terms.clear();
            for (std::size_t i = 0; i < layers.size(); ++i) {
                if (weights[i][k] > 0.0) {
                    const Rgb &c = layers[i].color[k];
                    terms.push_back({weights[i][k], c[0], c[1], c[2]});
                }
            }
            std::sort(terms.begin(), terms.end());
            double r = 0, g = 0, b = 0;
            for (const Term &t : terms) {
                r += t.weight * t.r;
                g += t.weight * t.g;
                b += t.weight * t.b;
            }
            out.image[k] = Rgb(static_cast<float>(r), static_cast<float>(g), static_cast<float>(b));
        }
    });
    return out;
}

BlendResult hard_blend(std::span<const WarpedLayer> layers, std::span<const Mask> masks, const BlendConfig &config) {
    check_inputs(layers, masks);
    const int w = layers[0].width();
    const int h = layers[0].height();
    BlendResult out{ColorImage(w, h, config.background), union_coverage(layers)};
    for (std::size_t k = 0; k < out.image.size(); ++k) {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (masks[i][k] && layers[i].valid[k]) {
                out.image[k] = layers[i].color[k];
                break;
            }
        }
    }
    return out;
}

ColorImage pyramid_reduce(const ColorImage &image) { return reduce_impl(image); }
ScalarMap pyramid_reduce(const ScalarMap &map) {
    // Blur in float precision is enough for images; masks keep doubles.
    const int w = map.width();
    const int h = map.height();
    ScalarMap tmp(w, h);
    ScalarMap blurred(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 5; ++k) acc += map(reflect(x - 2 + k, w), y) * kBinomial[k];
            tmp(x, y) = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 5; ++k) acc += tmp(x, reflect(y - 2 + k, h)) * kBinomial[k];
            blurred(x, y) = acc;
        }
    }
    ScalarMap out((w + 1) / 2, (h + 1) / 2);
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) out(x, y) = blurred(2 * x, 2 * y);
    }
    return out;
}

ColorImage pyramid_expand(const ColorImage &image, int width, int height) {
    ColorImage up(width, height, Rgb::Zero());
    for (int y = 0; y < height; y += 2) {
        for (int x = 0; x < width; x += 2) up(x, y) = image(x / 2, y / 2);
    }
    return blur_binomial(up, 2.0f);
}

LaplacianPyramid build_laplacian_pyramid(const ColorImage &image, int bands) {
    if (bands < 1) throw std::invalid_argument("band count must be >= 1");
    if (bands > max_bands(image.width(), image.height())) {
        throw std::invalid_argument("image too small for " + std::to_string(bands) + " bands");
    }
    LaplacianPyramid pyr;
    ColorImage current = image;
    for (int b = 0; b + 1 < bands; ++b) {
        ColorImage next = pyramid_reduce(current);
        ColorImage up = pyramid_expand(next, current.width(), current.height());
        for (std::size_t k = 0; k < current.size(); ++k) current[k] -= up[k];
        pyr.levels.push_back(std::move(current));
        current = std::move(next);
    }
    pyr.levels.push_back(std::move(current));
    return pyr;
}

ColorImage collapse_pyramid(const LaplacianPyramid &pyramid) {
    if (pyramid.levels.empty()) throw std::invalid_argument("empty pyramid");
    ColorImage current = pyramid.levels.back();
    for (int b = static_cast<int>(pyramid.levels.size()) - 2; b >= 0; --b) {
        const ColorImage &lap = pyramid.levels[static_cast<std::size_t>(b)];
        ColorImage up = pyramid_expand(current, lap.width(), lap.height());
        for (std::size_t k = 0; k < up.size(); ++k) up[k] += lap[k];
        current = std::move(up);
    }
    return current;
}

BlendResult multiband_blend(std::span<const WarpedLayer> layers, std::span<const Mask> masks,
                            const BlendConfig &config) {
    check_inputs(layers, masks);
    const int w = layers[0].width();
    const int h = layers[0].height();
    const int bands = config.bands > 0 ? config.bands : default_bands(layers);
    if (bands > max_bands(w, h)) {
        throw std::invalid_argument("canvas too small for " + std::to_string(bands) + " bands");
    }

    // Accumulators per band: weighted color sum, weight sum, and an unweighted
    // fallback for pixels no mask reaches.
    std::vector<ColorImage> num;
    std::vector<ScalarMap> den;
    std::vector<ColorImage> plain;
    int used = 0;
    for (std::size_t i : canonical_order(layers)) {
        if (count_set(layers[i].valid) == 0) continue;
        const LaplacianPyramid pyr = build_laplacian_pyramid(extend_nearest(layers[i]), bands);
        ScalarMap weight(w, h, 0.0);
        for (std::size_t k = 0; k < weight.size(); ++k) weight[k] = (masks[i][k] && layers[i].valid[k]) ? 1.0 : 0.0;
        if (num.empty()) {
            for (const ColorImage &lvl : pyr.levels) {
                num.emplace_back(lvl.width(), lvl.height(), Rgb::Zero());
                den.emplace_back(lvl.width(), lvl.height(), 0.0);
                plain.emplace_back(lvl.width(), lvl.height(), Rgb::Zero());
            }
        }
        for (int b = 0; b < bands; ++b) {
            if (b > 0) weight = pyramid_reduce(weight);
            const ColorImage &lvl = pyr.levels[static_cast<std::size_t>(b)];
            for (std::size_t k = 0; k < lvl.size(); ++k) {
                num[b][k] += lvl[k] * static_cast<float>(weight[k]);
                den[b][k] += weight[k];
                plain[b][k] += lvl[k];
            }
        }
        ++used;
    }

    BlendResult out{ColorImage(w, h, config.background), union_coverage(layers)};
    if (used == 0) return out;

    LaplacianPyramid blended;
    for (int b = 0; b < bands; ++b) {
        ColorImage lvl(num[b].width(), num[b].height(), Rgb::Zero());
        for (std::size_t k = 0; k < lvl.size(); ++k) {
            lvl[k] = den[b][k] > 0.0 ? Rgb(num[b][k] / static_cast<float>(den[b][k]))
                                     : Rgb(plain[b][k] / static_cast<float>(used));
        }
        blended.levels.push_back(std::move(lvl));
    }
    const ColorImage collapsed = collapse_pyramid(blended);
    for (std::size_t k = 0; k < collapsed.size(); ++k) {
        if (out.coverage[k]) out.image[k] = collapsed[k].min(1.0f).max(0.0f);
    }
    return out;
}

BlendResult blend_layers(std::span<const WarpedLayer> layers, std::span<const Mask> masks,
                         const BlendConfig &config) {
    switch (config.mode) {
        case BlendMode::None: return hard_blend(layers, masks, config);
        case BlendMode::Feather: return feather_blend(layers, masks, config);
        case BlendMode::Multiband: return multiband_blend(layers, masks, config);
    }
    throw std::invalid_argument("unknown blend mode");
}

}  // namespace pano

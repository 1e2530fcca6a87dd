#include "pano/seam.hpp"

#include "pano/maxflow.hpp"
#include "pano/parallel.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pano {

namespace {

void check_same_canvas(const WarpedLayer &a, const WarpedLayer &b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw std::invalid_argument("layers are not on the same canvas");
    }
}

// Sobel magnitude of one layer's luminance, 1/8 normalization. Invalid or
// off-canvas taps replicate the center.
double sobel_magnitude(const WarpedLayer &layer, int x, int y) {
    const float center = luminance(layer.color(x, y));
    auto tap = [&](int dx, int dy) -> double {
        const int xx = x + dx;
        const int yy = y + dy;
        if (!layer.valid.contains(xx, yy) || !layer.valid(xx, yy)) return center;
        return luminance(layer.color(xx, yy));
    };
    const double gx = (tap(1, -1) + 2.0 * tap(1, 0) + tap(1, 1) - tap(-1, -1) - 2.0 * tap(-1, 0) - tap(-1, 1)) / 8.0;
    const double gy = (tap(-1, 1) + 2.0 * tap(0, 1) + tap(1, 1) - tap(-1, -1) - 2.0 * tap(0, -1) - tap(1, -1)) / 8.0;
    return std::sqrt(gx * gx + gy * gy);
}

Box whole(const WarpedLayer &layer) { return Box{0, 0, layer.width(), layer.height()}; }

// Pixel-cost lookup table for all layer pairs; nullptr where a pair never overlaps.
class PairTable {
public:
    PairTable(const SeamProblem &problem) : n_(problem.layer_count()), maps_(static_cast<std::size_t>(n_ * n_)) {
        for (const auto &[a, b] : problem.overlapping_pairs()) {
            const CostMaps *m = &problem.pair_maps(a, b);
            maps_[a * n_ + b] = m;
            maps_[b * n_ + a] = m;
        }
    }

    double cost(int a, int b, int x, int y) const {
        const CostMaps *m = maps_[a * n_ + b];
        if (!m || !m->box.contains(x, y)) return 0.0;
        return m->cost(x - m->box.x0, y - m->box.y0);
    }

    double smoothness(int px, int py, int qx, int qy, int lp, int lq) const {
        if (lp == lq || lp == kNoLabel || lq == kNoLabel) return 0.0;
        return cost(lp, lq, px, py) + cost(lp, lq, qx, qy);
    }

private:
    int n_;
    std::vector<const CostMaps *> maps_;
};

constexpr int kDx[4] = {1, -1, 0, 0};
constexpr int kDy[4] = {0, 0, 1, -1};

}  // namespace

// ---------------------------------------------------------------------------
// Cost maps

ScalarMap texture_ratio_map(const ScalarMap &diff, const Mask &overlap, const CostParams &params) {
    if (diff.width() != overlap.width() || diff.height() != overlap.height()) {
        throw std::invalid_argument("texture_ratio_map: shape mismatch");
    }
    const int w = diff.width();
    const int h = diff.height();
    const int half = params.ratio_window / 2;

    ScalarMap sigma(w, h, 0.0);
    double sigma_sum = 0.0;
    std::size_t count = 0;
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(params.ratio_window * params.ratio_window));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!overlap(x, y)) continue;
            window.clear();
            for (int yy = std::max(0, y - half); yy <= std::min(h - 1, y + half); ++yy) {
                for (int xx = std::max(0, x - half); xx <= std::min(w - 1, x + half); ++xx) {
                    if (overlap(xx, yy)) window.push_back(diff(xx, yy));
                }
            }
            double mean = 0.0;
            for (double v : window) mean += v;
            mean /= static_cast<double>(window.size());
            double var = 0.0;
            for (double v : window) var += (v - mean) * (v - mean);
            var /= static_cast<double>(window.size());
            sigma(x, y) = std::sqrt(var);
            sigma_sum += sigma(x, y);
            ++count;
        }
    }

    ScalarMap ratio(w, h, 1.0);
    if (count == 0) return ratio;
    const double sigma_mean = sigma_sum / static_cast<double>(count);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (overlap(x, y)) ratio(x, y) = 1.0 + params.ratio_alpha * sigma(x, y) / (sigma_mean + params.ratio_eps);
        }
    }
    return ratio;
}

CostMaps compute_cost_maps(const WarpedLayer &a, const WarpedLayer &b, const CostParams &params, Box box) {
    check_same_canvas(a, b);
    if (box.empty()) box = whole(a);
    const int w = box.width();
    const int h = box.height();

    CostMaps maps;
    maps.box = box;
    maps.overlap = Mask(w, h, 0);
    maps.color = ScalarMap(w, h, 0.0);
    maps.gradient = ScalarMap(w, h, 0.0);
    maps.cost = ScalarMap(w, h, 0.0);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int cx = x + box.x0;
            const int cy = y + box.y0;
            if (!a.valid(cx, cy) || !b.valid(cx, cy)) continue;
            maps.overlap(x, y) = 1;
            const Eigen::Array3d d = (a.color(cx, cy) - b.color(cx, cy)).cast<double>();
            maps.color(x, y) = std::sqrt((d * d).sum());
            maps.gradient(x, y) = sobel_magnitude(a, cx, cy) + sobel_magnitude(b, cx, cy);
        }
    }
    maps.ratio = texture_ratio_map(maps.color, maps.overlap, params);
    for (std::size_t i = 0; i < maps.cost.size(); ++i) {
        if (maps.overlap[i]) maps.cost[i] = pixel_cost(maps.color[i], maps.gradient[i], maps.ratio[i]);
    }
    return maps;
}

ScalarMap color_diff_map(const WarpedLayer &a, const WarpedLayer &b) {
    check_same_canvas(a, b);
    ScalarMap out(a.width(), a.height(), 0.0);
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            if (!a.valid(x, y) || !b.valid(x, y)) continue;
            const Eigen::Array3d d = (a.color(x, y) - b.color(x, y)).cast<double>();
            out(x, y) = std::sqrt((d * d).sum());
        }
    }
    return out;
}

ScalarMap gradient_map(const WarpedLayer &a, const WarpedLayer &b) {
    check_same_canvas(a, b);
    ScalarMap out(a.width(), a.height(), 0.0);
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            if (!a.valid(x, y) || !b.valid(x, y)) continue;
            out(x, y) = sobel_magnitude(a, x, y) + sobel_magnitude(b, x, y);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// SeamProblem

SeamProblem::SeamProblem(std::span<const WarpedLayer> layers, CostParams params)
    : layers_(layers), params_(params) {
    if (layers.size() > static_cast<std::size_t>(kMaxLayers)) {
        throw std::invalid_argument("seam solver supports at most 64 layers");
    }
    if (layers.empty()) return;
    width_ = layers[0].width();
    height_ = layers[0].height();
    for (const auto &l : layers) {
        if (l.width() != width_ || l.height() != height_ || l.valid.width() != width_ ||
            l.valid.height() != height_) {
            throw std::invalid_argument("all layers must share one canvas");
        }
    }

    const int n = layer_count();
    coverage_bits_ = Grid<std::uint64_t>(width_, height_, 0);
    for (int i = 0; i < n; ++i) {
        const Mask &v = layers[i].valid;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (v[k]) coverage_bits_[k] |= (std::uint64_t{1} << i);
        }
    }

    std::vector<Box> boxes(static_cast<std::size_t>(n * n), Box{width_, height_, 0, 0});
    std::vector<char> seen(static_cast<std::size_t>(n * n), 0);
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const std::uint64_t bits = coverage_bits_(x, y);
            if (std::popcount(bits) < 2) continue;
            for (int a = 0; a < n; ++a) {
                if (!((bits >> a) & 1u)) continue;
                for (int b = a + 1; b < n; ++b) {
                    if (!((bits >> b) & 1u)) continue;
                    Box &bx = boxes[a * n + b];
                    bx.x0 = std::min(bx.x0, x);
                    bx.y0 = std::min(bx.y0, y);
                    bx.x1 = std::max(bx.x1, x + 1);
                    bx.y1 = std::max(bx.y1, y + 1);
                    seen[a * n + b] = 1;
                }
            }
        }
    }
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (!seen[a * n + b]) continue;
            pairs_.emplace_back(a, b);
            // Grow by one pixel so Sobel taps see the neighborhood; costs stay
            // zero outside the overlap anyway.
            Box bx = boxes[a * n + b];
            bx.x0 = std::max(0, bx.x0 - 1);
            bx.y0 = std::max(0, bx.y0 - 1);
            bx.x1 = std::min(width_, bx.x1 + 1);
            bx.y1 = std::min(height_, bx.y1 + 1);
            pair_boxes_.push_back(bx);
        }
    }
}

int SeamProblem::coverage_count(int x, int y) const { return std::popcount(coverage_bits_(x, y)); }

double SeamProblem::data(int x, int y, int label) const {
    if (label == kNoLabel) return coverage_bits_(x, y) ? kInfiniteCost : 0.0;
    if (label < 0 || label >= layer_count()) return kInfiniteCost;
    return valid(label, x, y) ? 0.0 : kInfiniteCost;
}

const CostMaps &SeamProblem::pair_maps(int a, int b) const {
    if (a > b) std::swap(a, b);
    const auto key = std::make_pair(a, b);
    {
        std::lock_guard lock(cache_mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
    }
    Box box{};
    const auto pit = std::find(pairs_.begin(), pairs_.end(), key);
    if (pit != pairs_.end()) {
        box = pair_boxes_[static_cast<std::size_t>(pit - pairs_.begin())];
    } else {
        // Disjoint pair: an all-zero 1x1 map keeps lookups uniform.
        box = Box{0, 0, 1, 1};
    }
    auto maps = std::make_unique<CostMaps>(compute_cost_maps(layers_[a], layers_[b], params_, box));
    std::lock_guard lock(cache_mutex_);
    auto [it, inserted] = cache_.emplace(key, std::move(maps));
    return *it->second;
}

void SeamProblem::precompute_pairs() const {
    parallel_for(0, static_cast<int>(pairs_.size()), [&](int k) { pair_maps(pairs_[k].first, pairs_[k].second); });
}

double SeamProblem::cost(int a, int b, int x, int y) const {
    if (a == b) return 0.0;
    const CostMaps &m = pair_maps(a, b);
    if (!m.box.contains(x, y)) return 0.0;
    return m.cost(x - m.box.x0, y - m.box.y0);
}

double SeamProblem::smoothness(int px, int py, int qx, int qy, int lp, int lq) const {
    if (lp == lq || lp == kNoLabel || lq == kNoLabel) return 0.0;
    return cost(lp, lq, px, py) + cost(lp, lq, qx, qy);
}

double SeamProblem::total_energy(const LabelMap &labels) const {
    if (labels.width() != width_ || labels.height() != height_) {
        throw std::invalid_argument("total_energy: label map does not match the canvas");
    }
    precompute_pairs();
    const PairTable table(*this);
    double e = 0.0;
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const int l = labels(x, y);
            e += data(x, y, l);
            if (x + 1 < width_) e += table.smoothness(x, y, x + 1, y, l, labels(x + 1, y));
            if (y + 1 < height_) e += table.smoothness(x, y, x, y + 1, l, labels(x, y + 1));
        }
    }
    return e;
}

Mask SeamProblem::coverage() const {
    Mask m(width_, height_, 0);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = coverage_bits_[k] ? 1 : 0;
    return m;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

struct Component {
    std::vector<int> pixels;  // canvas indices, row-major order
    Box box;
    std::vector<int> labels;  // candidate labels, ascending
};

struct ComponentResult {
    std::vector<int> labels;
    std::vector<double> deltas;
    int sweeps = 0;
};

std::vector<Component> free_components(const SeamProblem &problem) {
    const int w = problem.width();
    const int h = problem.height();
    Grid<int> visited(w, h, 0);
    std::vector<Component> out;
    std::vector<int> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (visited(x, y) || problem.coverage_count(x, y) < 2) continue;
            Component comp;
            comp.box = Box{x, y, x + 1, y + 1};
            std::uint64_t label_bits = 0;
            stack.assign(1, y * w + x);
            visited(x, y) = 1;
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                const int px = idx % w;
                const int py = idx / w;
                comp.pixels.push_back(idx);
                label_bits |= problem.coverage_bits(px, py);
                comp.box.x0 = std::min(comp.box.x0, px);
                comp.box.y0 = std::min(comp.box.y0, py);
                comp.box.x1 = std::max(comp.box.x1, px + 1);
                comp.box.y1 = std::max(comp.box.y1, py + 1);
                for (int k = 0; k < 4; ++k) {
                    const int qx = px + kDx[k];
                    const int qy = py + kDy[k];
                    if (!visited.contains(qx, qy) || visited(qx, qy) || problem.coverage_count(qx, qy) < 2) continue;
                    visited(qx, qy) = 1;
                    stack.push_back(qy * w + qx);
                }
            }
            std::sort(comp.pixels.begin(), comp.pixels.end());
            for (int l = 0; l < problem.layer_count(); ++l) {
                if ((label_bits >> l) & 1u) comp.labels.push_back(l);
            }
            out.push_back(std::move(comp));
        }
    }
    return out;
}

class ComponentSolver {
public:
    ComponentSolver(const SeamProblem &problem, const PairTable &table, const LabelMap &fixed, const Component &comp)
        : problem_(problem), table_(table), fixed_(fixed), comp_(comp),
          local_(comp.box.width(), comp.box.height(), -1) {
        const int w = problem.width();
        for (std::size_t k = 0; k < comp.pixels.size(); ++k) {
            const int x = comp.pixels[k] % w;
            const int y = comp.pixels[k] / w;
            local_(x - comp.box.x0, y - comp.box.y0) = static_cast<int>(k);
        }
    }

    ComponentResult run(int max_sweeps, bool restarts) {
        std::vector<int> start(comp_.pixels.size());
        for (std::size_t k = 0; k < comp_.pixels.size(); ++k) {
            start[k] = fixed_[static_cast<std::size_t>(comp_.pixels[k])];
        }
        ComponentResult result = descend(std::move(start), max_sweeps);
        if (!restarts || comp_.labels.size() < 3) return result;

        // Non-metric pair costs leave local minima that no single move
        // escapes; restart from labelings that favor each label in turn.
        double energy = local_energy(result.labels);
        const int w = problem_.width();
        for (int preferred : comp_.labels) {
            std::vector<int> alt(comp_.pixels.size());
            for (std::size_t k = 0; k < comp_.pixels.size(); ++k) {
                const int x = comp_.pixels[k] % w;
                const int y = comp_.pixels[k] / w;
                alt[k] = problem_.valid(preferred, x, y) ? preferred : fixed_[static_cast<std::size_t>(comp_.pixels[k])];
            }
            ComponentResult other = descend(std::move(alt), max_sweeps);
            result.sweeps += other.sweeps;
            const double e = local_energy(other.labels);
            if (e < energy) {
                result.deltas.push_back(energy - e);
                result.labels = std::move(other.labels);
                energy = e;
            }
        }
        return result;
    }

private:
    /// Steepest descent: each step takes the best expansion, or the best
    /// swap when no expansion lowers the energy.
    ComponentResult descend(std::vector<int> labels, int max_sweeps) const {
        ComponentResult result;
        result.labels = std::move(labels);
        double energy = local_energy(result.labels);
        std::vector<int> best;
        double best_energy = energy;
        auto consider = [&](std::vector<int> proposal) {
            if (proposal == result.labels) return;
            const double e = local_energy(proposal);
            if (e < best_energy) {
                best_energy = e;
                best = std::move(proposal);
            }
        };
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            ++result.sweeps;
            best_energy = energy;
            for (int alpha : comp_.labels) consider(expand(result.labels, alpha));
            if (!(best_energy < energy)) {
                for (std::size_t i = 0; i < comp_.labels.size(); ++i) {
                    for (std::size_t j = i + 1; j < comp_.labels.size(); ++j) {
                        consider(swap(result.labels, comp_.labels[i], comp_.labels[j]));
                    }
                }
            }
            if (!(best_energy < energy)) break;
            result.deltas.push_back(energy - best_energy);
            energy = best_energy;
            result.labels = std::move(best);
        }
        return result;
    }

    int local_index(int x, int y) const {
        if (!comp_.box.contains(x, y)) return -1;
        return local_(x - comp_.box.x0, y - comp_.box.y0);
    }

    int label_at(const std::vector<int> &cur, int x, int y) const {
        const int k = local_index(x, y);
        return k >= 0 ? cur[k] : fixed_(x, y);
    }

    double local_energy(const std::vector<int> &cur) const {
        const int w = problem_.width();
        double e = 0.0;
        for (std::size_t k = 0; k < comp_.pixels.size(); ++k) {
            const int x = comp_.pixels[k] % w;
            const int y = comp_.pixels[k] / w;
            e += problem_.data(x, y, cur[k]);
            for (int d = 0; d < 4; ++d) {
                const int qx = x + kDx[d];
                const int qy = y + kDy[d];
                if (!fixed_.contains(qx, qy)) continue;
                const int qk = local_index(qx, qy);
                // Interior pairs are counted once, from their left/top pixel.
                if (qk >= 0 && (kDx[d] < 0 || kDy[d] < 0)) continue;
                e += table_.smoothness(x, y, qx, qy, cur[k], qk >= 0 ? cur[qk] : fixed_(qx, qy));
            }
        }
        return e;
    }

    /// Every pixel not currently labeled alpha may switch to alpha.
    std::vector<int> expand(const std::vector<int> &cur, int alpha) const {
        const int w = problem_.width();
        std::vector<std::array<int, 2>> choice(cur.size(), {-1, -1});
        for (std::size_t k = 0; k < cur.size(); ++k) {
            const int x = comp_.pixels[k] % w;
            const int y = comp_.pixels[k] / w;
            if (cur[k] != alpha && problem_.valid(alpha, x, y)) choice[k] = {cur[k], alpha};
        }
        return binary_move(cur, choice);
    }

    /// Pixels labeled a or b and valid in both may exchange the two labels.
    std::vector<int> swap(const std::vector<int> &cur, int a, int b) const {
        const int w = problem_.width();
        std::vector<std::array<int, 2>> choice(cur.size(), {-1, -1});
        for (std::size_t k = 0; k < cur.size(); ++k) {
            const int x = comp_.pixels[k] % w;
            const int y = comp_.pixels[k] / w;
            if ((cur[k] == a || cur[k] == b) && problem_.valid(a, x, y) && problem_.valid(b, x, y)) {
                choice[k] = {a, b};
            }
        }
        return binary_move(cur, choice);
    }

    /// Best of the two submodular relaxations below, by exact energy.
    std::vector<int> binary_move(const std::vector<int> &cur, const std::vector<std::array<int, 2>> &choice) const {
        bool truncated = false;
        std::vector<int> first = relaxed_move(cur, choice, false, &truncated);
        if (!truncated) return first;
        std::vector<int> second = relaxed_move(cur, choice, true, nullptr);
        return local_energy(second) < local_energy(first) ? second : first;
    }

    /// Pixels with choice[k][0] >= 0 pick one of two labels by a min cut;
    /// the rest keep their label. A non-submodular pair term is made
    /// submodular by raising the cost of the pair taking (first, second)
    /// choices, or (second, first) when `raise_other` is set. Both keep the
    /// current labeling's cost exact.
    std::vector<int> relaxed_move(const std::vector<int> &cur, const std::vector<std::array<int, 2>> &choice,
                                  bool raise_other, bool *truncated) const {
        const int w = problem_.width();
        const std::size_t n = comp_.pixels.size();
        std::vector<int> var(n, -1);
        int nvars = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (choice[k][0] >= 0) var[k] = nvars++;
        }
        if (nvars == 0) return cur;

        MaxFlow graph(nvars);
        std::vector<double> e0(nvars, 0.0);
        std::vector<double> e1(nvars, 0.0);

        for (std::size_t k = 0; k < n; ++k) {
            if (var[k] < 0) continue;
            const int x = comp_.pixels[k] % w;
            const int y = comp_.pixels[k] / w;
            const int p0 = choice[k][0];
            const int p1 = choice[k][1];
            for (int d = 0; d < 4; ++d) {
                const int qx = x + kDx[d];
                const int qy = y + kDy[d];
                if (!fixed_.contains(qx, qy)) continue;
                const int qk = local_index(qx, qy);
                if (qk >= 0 && var[qk] >= 0) {
                    if (kDx[d] < 0 || kDy[d] < 0) continue;  // handled from the other side
                    const int q0 = choice[qk][0];
                    const int q1 = choice[qk][1];
                    const double a = table_.smoothness(x, y, qx, qy, p0, q0);
                    const double b = table_.smoothness(x, y, qx, qy, p0, q1);
                    const double c = table_.smoothness(x, y, qx, qy, p1, q0);
                    const double dd = table_.smoothness(x, y, qx, qy, p1, q1);
                    // E(xp, xq) = A + (C - A) xp + (D - C) xq + (B + C - A - D) (1 - xp) xq
                    double c_eff = c;
                    const double pair = b + c - a - dd;
                    if (pair < 0.0) {
                        if (truncated) *truncated = true;
                        if (raise_other) c_eff = a + dd - b;
                    }
                    e1[var[k]] += c_eff - a;
                    e1[var[qk]] += dd - c_eff;
                    if (pair > 0.0) graph.add_edge(var[k], var[qk], pair, 0.0);
                } else {
                    const int lq = label_at(cur, qx, qy);
                    e0[var[k]] += table_.smoothness(x, y, qx, qy, p0, lq);
                    e1[var[k]] += table_.smoothness(x, y, qx, qy, p1, lq);
                }
            }
        }
        for (int v = 0; v < nvars; ++v) {
            const double m = std::min(e0[v], e1[v]);
            // Source side takes the first choice (x = 0), sink side the second.
            graph.add_terminal_weights(v, e1[v] - m, e0[v] - m);
        }

        graph.solve();
        std::vector<int> next = cur;
        for (std::size_t k = 0; k < n; ++k) {
            if (var[k] >= 0) next[k] = choice[k][graph.segment(var[k]) == MaxFlow::Segment::Sink ? 1 : 0];
        }
        return next;
    }

    const SeamProblem &problem_;
    const PairTable &table_;
    const LabelMap &fixed_;
    const Component &comp_;
    Grid<int> local_;
};

LabelMap initial_labels(const SeamProblem &problem) {
    LabelMap labels(problem.width(), problem.height(), kNoLabel);
    for (int y = 0; y < problem.height(); ++y) {
        for (int x = 0; x < problem.width(); ++x) {
            const std::uint64_t bits = problem.coverage_bits(x, y);
            if (bits) labels(x, y) = std::countr_zero(bits);
        }
    }
    return labels;
}

}  // namespace

SeamLabeling first_valid_labeling(const SeamProblem &problem) {
    SeamLabeling out;
    out.labels = initial_labels(problem);
    out.energy = problem.total_energy(out.labels);
    out.energy_history = {out.energy};
    return out;
}

SeamLabeling solve_labels(const SeamProblem &problem, const SeamSolverOptions &options) {
    problem.precompute_pairs();
    const PairTable table(problem);

    SeamLabeling out;
    out.labels = initial_labels(problem);
    const double initial = problem.total_energy(out.labels);
    out.energy_history.push_back(initial);

    const std::vector<Component> comps = free_components(problem);
    out.components = static_cast<int>(comps.size());

    // The surrogate must dominate any achievable smoothness total.
    double max_cost = 0.0;
    for (const auto &[a, b] : problem.overlapping_pairs()) {
        const CostMaps &m = problem.pair_maps(a, b);
        for (double c : m.cost.data()) max_cost = std::max(max_cost, c);
    }
    const double pair_count = 2.0 * problem.width() * static_cast<double>(problem.height());
    if (pair_count * max_cost * 2.0 >= kInfiniteCost) {
        std::ostringstream msg;
        msg << "seam costs too large for the infinity surrogate (max cost " << max_cost << ")";
        throw std::runtime_error(msg.str());
    }

    std::vector<ComponentResult> results(comps.size());
    parallel_for(0, static_cast<int>(comps.size()), [&](int c) {
        ComponentSolver solver(problem, table, out.labels, comps[c]);
        results[c] = solver.run(options.max_sweeps, options.restarts);
    });

    double energy = initial;
    for (std::size_t c = 0; c < comps.size(); ++c) {
        for (std::size_t k = 0; k < comps[c].pixels.size(); ++k) {
            out.labels[static_cast<std::size_t>(comps[c].pixels[k])] = results[c].labels[k];
        }
        for (double d : results[c].deltas) {
            energy -= d;
            out.energy_history.push_back(energy);
        }
        out.sweeps = std::max(out.sweeps, results[c].sweeps);
        out.accepted_moves += static_cast<int>(results[c].deltas.size());
    }
    out.energy = problem.total_energy(out.labels);
    return out;
}

std::vector<Mask> labels_to_masks(const LabelMap &labels, int layer_count) {
    std::vector<Mask> masks(static_cast<std::size_t>(layer_count), Mask(labels.width(), labels.height(), 0));
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const int l = labels[k];
        if (l >= 0 && l < layer_count) masks[static_cast<std::size_t>(l)][k] = 1;
    }
    return masks;
}

ColorImage label_visualization(const LabelMap &labels, int layer_count) {
    std::vector<Rgb> palette;
    for (int i = 0; i < layer_count; ++i) {
        // Golden-angle hue spacing.
        const double hue = std::fmod(i * 0.618033988749895, 1.0) * 6.0;
        const int sector = static_cast<int>(hue);
        const float f = static_cast<float>(hue - sector);
        const float v = 0.95f;
        const float p = 0.25f;
        const float q = v - (v - p) * f;
        const float t = p + (v - p) * f;
        Rgb c;
        switch (sector % 6) {
            case 0: c = Rgb(v, t, p); break;
            case 1: c = Rgb(q, v, p); break;
            case 2: c = Rgb(p, v, t); break;
            case 3: c = Rgb(p, q, v); break;
            case 4: c = Rgb(t, p, v); break;
            default: c = Rgb(v, p, q); break;
        }
        palette.push_back(c);
    }
    ColorImage out(labels.width(), labels.height(), Rgb::Zero());
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const int l = labels[k];
        if (l >= 0 && l < layer_count) out[k] = palette[static_cast<std::size_t>(l)];
    }
    return out;
}

}  // namespace pano

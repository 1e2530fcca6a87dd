#include "pano/meshwarp.hpp"

#include "pano/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace pano {

namespace {

// Pairs reference(p) with target(p + (d, 0)) over the box.
double gather(const GrayImage &ref, const Mask &ref_valid, const GrayImage &tgt, const Mask &tgt_valid, Box box,
              int d, std::vector<double> &a, std::vector<double> &b) {
    a.clear();
    b.clear();
    for (int y = box.y0; y < box.y1; ++y) {
        for (int x = box.x0; x < box.x1; ++x) {
            if (!ref_valid(x, y)) continue;
            const int tx = x + d;
            if (!tgt_valid.contains(tx, y) || !tgt_valid(tx, y)) continue;
            a.push_back(ref(x, y));
            b.push_back(tgt(tx, y));
        }
    }
    const double area = static_cast<double>(box.width()) * box.height();
    return area > 0 ? static_cast<double>(a.size()) / area : 0.0;
}

std::optional<double> score_at(const GrayImage &ref, const Mask &ref_valid, const GrayImage &tgt,
                               const Mask &tgt_valid, Box box, int d) {
    std::vector<double> a;
    std::vector<double> b;
    gather(ref, ref_valid, tgt, tgt_valid, box, d, a, b);
    return try_ncc(a, b);
}

// Bilinear lookup where every tap with nonzero weight must be valid.
std::optional<Rgb> sample_valid(const WarpedLayer &layer, double sx, double sy) {
    constexpr double kSnap = 1e-9;
    int x0 = static_cast<int>(std::floor(sx));
    int y0 = static_cast<int>(std::floor(sy));
    double fx = sx - x0;
    double fy = sy - y0;
    if (fx < kSnap) fx = 0.0;
    if (fy < kSnap) fy = 0.0;
    if (fx > 1.0 - kSnap) {
        ++x0;
        fx = 0.0;
    }
    if (fy > 1.0 - kSnap) {
        ++y0;
        fy = 0.0;
    }
    const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    Eigen::Array3d acc = Eigen::Array3d::Zero();
    for (int k = 0; k < 4; ++k) {
        if (wts[k] == 0.0) continue;
        if (!layer.valid.contains(xs[k], ys[k]) || !layer.valid(xs[k], ys[k])) return std::nullopt;
        acc += wts[k] * layer.color(xs[k], ys[k]).cast<double>();
    }
    return Rgb(acc.cast<float>());
}

double cross2(const Vec2 &a, const Vec2 &b) { return a.x() * b.y() - a.y() * b.x(); }

std::vector<double> mesh_lines(int lo, int hi, int step, int extent) {
    std::vector<double> v = {0.0, static_cast<double>(extent - 1)};
    for (int p = lo; p < hi; p += step) {
        if (p > 0 && p < extent - 1) v.push_back(p);
    }
    if (hi > 0 && hi < extent - 1) v.push_back(hi);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::size_t cell_of(const std::vector<double> &lines, double v) {
    auto it = std::upper_bound(lines.begin(), lines.end(), v);
    std::size_t i = it == lines.begin() ? 0 : static_cast<std::size_t>(it - lines.begin()) - 1;
    return std::min(i, lines.size() - 2);
}

}  // namespace

std::optional<double> try_ncc(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("ncc: blocks differ in size");
    const std::size_t n = a.size();
    if (n == 0) return std::nullopt;
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        ma += a[k];
        mb += b[k];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double saa = 0.0;
    double sbb = 0.0;
    double sab = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double da = a[k] - ma;
        const double db = b[k] - mb;
        saa += da * da;
        sbb += db * db;
        sab += da * db;
    }
    const double sigma_a = std::sqrt(saa / static_cast<double>(n));
    const double sigma_b = std::sqrt(sbb / static_cast<double>(n));
    if (sigma_a <= kNccEpsilon || sigma_b <= kNccEpsilon) return std::nullopt;
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double ncc(std::span<const double> a, std::span<const double> b) {
    const auto r = try_ncc(a, b);
    if (!r) throw DegenerateBlockError("ncc: block has no variance");
    return *r;
}

BlockGrid::BlockGrid(Box b, int bw, int bh) : box(b), block_width(bw), block_height(bh) {
    if (bw < 1 || bh < 1) throw std::invalid_argument("block size must be positive");
    if (b.empty()) throw std::invalid_argument("block grid over an empty box");
}

int BlockGrid::strips() const { return (box.height() + block_height - 1) / block_height; }
int BlockGrid::blocks_per_strip() const { return (box.width() + block_width - 1) / block_width; }

Box BlockGrid::strip(int i) const {
    const int y0 = box.y0 + i * block_height;
    return Box{box.x0, y0, box.x1, std::min(box.y1, y0 + block_height)};
}

Box BlockGrid::block(int i, int j) const {
    const Box s = strip(i);
    const int x0 = box.x0 + j * block_width;
    return Box{x0, s.y0, std::min(box.x1, x0 + block_width), s.y1};
}

std::optional<DisparityMatch> initial_disparity(const GrayImage &reference, const Mask &reference_valid,
                                                const GrayImage &target, const Mask &target_valid, Box block,
                                                int radius) {
    if (radius < 0) throw std::invalid_argument("search radius must be >= 0");
    std::optional<DisparityMatch> best;
    std::vector<double> a;
    std::vector<double> b;
    for (int step = 0; step <= 2 * radius; ++step) {
        const int d = (step % 2 == 0) ? step / 2 : -(step + 1) / 2;
        const double support = gather(reference, reference_valid, target, target_valid, block, d, a, b);
        const auto s = try_ncc(a, b);
        if (!s) continue;
        if (!best || *s > best->score) best = DisparityMatch{d, *s, support};
    }
    return best;
}

double confidence(double disparity, double neighborhood_mean, double support, std::optional<double> score,
                  const ConfidenceWeights &weights, double scale) {
    const double consistency = std::exp(-std::abs(disparity - neighborhood_mean) / scale);
    const double similarity = score ? std::max(*score, 0.0) : 0.0;
    return weights.consistency * consistency + weights.support * std::clamp(support, 0.0, 1.0) +
           weights.similarity * similarity;
}

std::vector<Region> group_regions(std::span<const double> rows, double threshold) {
    std::vector<Region> out;
    double sum = 0.0;
    int count = 0;
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        if (count > 0 && std::abs(rows[r] - sum / count) <= threshold) {
            out.back().last = r;
            sum += rows[r];
            ++count;
            continue;
        }
        out.push_back(Region{r, r});
        sum = rows[r];
        count = 1;
    }
    return out;
}

ExpansionResult expand_regions(const GrayImage &reference, const Mask &reference_valid, const GrayImage &target,
                               const Mask &target_valid, const BlockGrid &grid, std::span<const Region> regions,
                               std::span<const int> row_disparities, std::span<const double> row_confidences,
                               double threshold) {
    const int m = grid.strips();
    if (static_cast<int>(row_disparities.size()) != m || static_cast<int>(row_confidences.size()) != m) {
        throw std::invalid_argument("expand_regions: one disparity and confidence per strip required");
    }
    constexpr double kNoScore = -std::numeric_limits<double>::infinity();
    ExpansionResult res;
    res.disparities.assign(row_disparities.begin(), row_disparities.end());
    res.scores.assign(static_cast<std::size_t>(m), kNoScore);
    for (const Region &r : regions) {
        for (int i = r.first; i <= r.last; ++i) {
            res.scores[i] = score_at(reference, reference_valid, target, target_valid, grid.strip(i),
                                     res.disparities[i]).value_or(kNoScore);
        }
    }

    std::vector<int> seeds;
    for (const Region &r : regions) {
        int seed = r.first;
        for (int i = r.first; i <= r.last; ++i) {
            if (row_confidences[i] > row_confidences[seed]) seed = i;
        }
        seeds.push_back(seed);
    }

    auto total = [&] {
        double t = 0.0;
        for (const Region &r : regions) {
            for (int i = r.first; i <= r.last; ++i) {
                if (res.scores[i] != kNoScore) t += res.scores[i];
            }
        }
        return t;
    };

    for (;;) {
        bool changed = false;
        for (std::size_t k = 0; k < regions.size(); ++k) {
            const Region &r = regions[k];
            const int seed = seeds[k];
            const double center = res.disparities[seed];
            const int lo = static_cast<int>(std::ceil(center - threshold));
            const int hi = static_cast<int>(std::floor(center + threshold));
            std::vector<int> order;
            for (int i = seed - 1; i >= r.first; --i) order.push_back(i);
            for (int i = seed + 1; i <= r.last; ++i) order.push_back(i);
            for (int i : order) {
                for (int d = lo; d <= hi; ++d) {
                    if (d == res.disparities[i]) continue;
                    const auto s = score_at(reference, reference_valid, target, target_valid, grid.strip(i), d);
                    if (s && *s > res.scores[i]) {
                        res.scores[i] = *s;
                        res.disparities[i] = d;
                        changed = true;
                    }
                }
            }
        }
        ++res.sweeps;
        res.total_score.push_back(total());
        if (!changed) break;
    }
    return res;
}

AffineModel AffineModel::translation(const Vec2 &t, int region) {
    AffineModel m;
    m.offset = t;
    m.region = region;
    return m;
}

AffineModel fit_affine(std::span<const Vec2> from, std::span<const Vec2> to) {
    if (from.size() != to.size()) throw std::invalid_argument("fit_affine: point lists differ in size");
    const std::size_t n = from.size();
    if (n < 3) throw RankDeficientError("fit_affine: need at least three points");

    Vec2 center = Vec2::Zero();
    for (const Vec2 &p : from) center += p;
    center /= static_cast<double>(n);
    Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
    for (const Vec2 &p : from) scatter += (p - center) * (p - center).transpose();
    const Eigen::Vector2d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(scatter).eigenvalues();
    if (eig(0) <= 1e-12 * std::max(eig(1), 1.0)) throw RankDeficientError("fit_affine: points are collinear");

    Eigen::MatrixXd design(n, 3);
    Eigen::MatrixXd rhs(n, 2);
    for (std::size_t k = 0; k < n; ++k) {
        design(k, 0) = from[k].x() - center.x();
        design(k, 1) = from[k].y() - center.y();
        design(k, 2) = 1.0;
        rhs(k, 0) = to[k].x();
        rhs(k, 1) = to[k].y();
    }
    const Eigen::MatrixXd sol = design.colPivHouseholderQr().solve(rhs);
    AffineModel m;
    m.linear << sol(0, 0), sol(1, 0), sol(0, 1), sol(1, 1);
    // sol(2, :) is the image of the centroid.
    m.offset = Vec2(sol(2, 0), sol(2, 1)) - m.linear * center;
    return m;
}

DeformMesh build_mesh(int width, int height, const BlockGrid &grid, std::span<const Region> regions,
                      std::span<const AffineModel> models) {
    if (regions.size() != models.size()) throw std::invalid_argument("build_mesh: one model per region");
    if (width < 2 || height < 2) throw std::invalid_argument("build_mesh: canvas too small");
    DeformMesh mesh;
    mesh.xs = mesh_lines(grid.box.x0, grid.box.x1, grid.block_width, width);
    mesh.ys = mesh_lines(grid.box.y0, grid.box.y1, grid.block_height, height);
    mesh.source = Grid<Vec2>(static_cast<int>(mesh.xs.size()), static_cast<int>(mesh.ys.size()));

    const int m = grid.strips();
    for (int iy = 0; iy < mesh.source.height(); ++iy) {
        const double y = mesh.ys[iy];
        int strip = -1;
        if (y >= grid.box.y0 && y < grid.box.y1) {
            strip = std::min(m - 1, static_cast<int>(y - grid.box.y0) / grid.block_height);
        } else if (y == grid.box.y1) {
            strip = m - 1;
        }
        const AffineModel *model = nullptr;
        for (std::size_t k = 0; k < regions.size() && strip >= 0; ++k) {
            if (strip >= regions[k].first && strip <= regions[k].last) model = &models[k];
        }
        for (int ix = 0; ix < mesh.source.width(); ++ix) {
            const Vec2 v(mesh.xs[ix], y);
            mesh.source(ix, iy) = model ? model->apply(v) : v;
        }
    }
    return mesh;
}

WarpedLayer apply_mesh_warp(const WarpedLayer &layer, const DeformMesh &mesh) {
    if (mesh.xs.size() < 2 || mesh.ys.size() < 2) throw std::invalid_argument("apply_mesh_warp: degenerate mesh");
    const int w = layer.width();
    const int h = layer.height();
    WarpedLayer out;
    out.color = ColorImage(w, h, Rgb::Zero());
    out.valid = Mask(w, h, 0);
    out.source_index = layer.source_index;
    out.foldover = layer.foldover;

    for (int iy = 0; iy + 1 < mesh.source.height(); ++iy) {
        for (int ix = 0; ix + 1 < mesh.source.width(); ++ix) {
            const Vec2 &s00 = mesh.source(ix, iy);
            const Vec2 &s10 = mesh.source(ix + 1, iy);
            const Vec2 &s01 = mesh.source(ix, iy + 1);
            const Vec2 &s11 = mesh.source(ix + 1, iy + 1);
            if (cross2(s10 - s00, s01 - s00) <= 0.0 || cross2(s11 - s01, s11 - s10) <= 0.0 ||
                cross2(s11 - s01, s01 - s00) <= 0.0 || cross2(s10 - s00, s11 - s10) <= 0.0) {
                out.foldover = true;
            }
        }
    }

    parallel_for(0, h, [&](int y) {
        const std::size_t cy = cell_of(mesh.ys, y);
        const double y0 = mesh.ys[cy];
        const double y1 = mesh.ys[cy + 1];
        const double fy = (y - y0) / (y1 - y0);
        for (int x = 0; x < w; ++x) {
            const std::size_t cx = cell_of(mesh.xs, x);
            const double x0 = mesh.xs[cx];
            const double x1 = mesh.xs[cx + 1];
            const double fx = (x - x0) / (x1 - x0);
            const int ix = static_cast<int>(cx);
            const int iy = static_cast<int>(cy);
            const Vec2 top = (1 - fx) * mesh.source(ix, iy) + fx * mesh.source(ix + 1, iy);
            const Vec2 bot = (1 - fx) * mesh.source(ix, iy + 1) + fx * mesh.source(ix + 1, iy + 1);
            const Vec2 s = (1 - fy) * top + fy * bot;
            const auto c = sample_valid(layer, s.x(), s.y());
            if (c) {
                out.color(x, y) = *c;
                out.valid(x, y) = 1;
            }
        }
    });
    return out;
}

WarpedLayer apply_mesh_warp(const WarpedLayer &layer, const BlockGrid &grid, std::span<const Region> regions,
                            std::span<const AffineModel> models) {
    return apply_mesh_warp(layer, build_mesh(layer.width(), layer.height(), grid, regions, models));
}

MeshWarpResult mesh_align(const WarpedLayer &reference, const WarpedLayer &target, const MeshWarpParams &params) {
    MeshWarpResult res;
    res.warped = target;
    const Mask overlap = mask_and(reference.valid, target.valid);
    const Box box = bounding_box(overlap);
    if (box.empty()) return res;

    res.grid = BlockGrid(box, params.block_width, params.block_height);
    const int m = res.grid.strips();
    const int n = res.grid.blocks_per_strip();
    const int radius = std::min(params.search_radius, box.width());
    const GrayImage ref = to_gray(reference.color);
    const GrayImage tgt = to_gray(target.color);

    res.blocks.assign(static_cast<std::size_t>(m * n), BlockMatch{});
    parallel_for(0, m, [&](int i) {
        for (int j = 0; j < n; ++j) {
            const auto match = initial_disparity(ref, reference.valid, tgt, target.valid, res.grid.block(i, j), radius);
            if (!match) continue;
            BlockMatch &b = res.blocks[i * n + j];
            b.matched = true;
            b.disparity = match->disparity;
            b.score = match->score;
            b.support = match->support;
        }
    });

    res.row_disparity.assign(static_cast<std::size_t>(m), std::nullopt);
    res.row_confidence.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        int best = -1;
        for (int j = 0; j < n; ++j) {
            BlockMatch &b = res.blocks[i * n + j];
            if (!b.matched) continue;
            double sum = 0.0;
            int count = 0;
            for (int k = std::max(0, i - 1); k <= std::min(m - 1, i + 1); ++k) {
                const BlockMatch &nb = res.blocks[k * n + j];
                if (!nb.matched) continue;
                sum += nb.disparity;
                ++count;
            }
            b.confidence = confidence(b.disparity, sum / count, b.support, b.score, params.weights,
                                      params.consistency_scale);
            if (best < 0 || b.confidence > res.blocks[i * n + best].confidence) best = j;
        }
        if (best >= 0) {
            res.row_disparity[i] = res.blocks[i * n + best].disparity;
            res.row_confidence[i] = res.blocks[i * n + best].confidence;
        }
    }

    // Unmatched strips separate regions.
    for (int i = 0; i < m;) {
        if (!res.row_disparity[i]) {
            ++i;
            continue;
        }
        int end = i;
        std::vector<double> run;
        while (end < m && res.row_disparity[end]) run.push_back(*res.row_disparity[end++]);
        for (Region r : group_regions(run, params.disparity_threshold)) {
            res.regions.push_back(Region{r.first + i, r.last + i});
        }
        i = end;
    }
    if (res.regions.empty()) return res;

    std::vector<int> rows(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < m; ++i) rows[i] = res.row_disparity[i].value_or(0);
    res.expansion = expand_regions(ref, reference.valid, tgt, target.valid, res.grid, res.regions, rows,
                                   res.row_confidence, params.disparity_threshold);

    for (std::size_t k = 0; k < res.regions.size(); ++k) {
        const Region &r = res.regions[k];
        std::vector<Vec2> from;
        std::vector<Vec2> to;
        double mean_d = 0.0;
        for (int i = r.first; i <= r.last; ++i) {
            const double d = res.expansion.disparities[i];
            mean_d += d;
            for (int j = 0; j < n; ++j) {
                if (!res.blocks[i * n + j].matched) continue;
                const Box b = res.grid.block(i, j);
                const Vec2 c(0.5 * (b.x0 + b.x1 - 1), 0.5 * (b.y0 + b.y1 - 1));
                from.push_back(c);
                to.push_back(c + Vec2(d, 0.0));
            }
        }
        mean_d /= (r.last - r.first + 1);
        AffineModel model = AffineModel::translation(Vec2(mean_d, 0.0), static_cast<int>(k));
        try {
            AffineModel fitted = fit_affine(from, to);
            if (fitted.linear.determinant() > 0.0) {
                fitted.region = static_cast<int>(k);
                model = fitted;
            }
        } catch (const RankDeficientError &) {
        }
        res.models.push_back(model);
    }

    res.warped = apply_mesh_warp(target, res.grid, res.regions, res.models);
    res.applied = true;
    return res;
}

std::optional<double> overlap_mae(const WarpedLayer &a, const WarpedLayer &b) {
    if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("overlap_mae: size mismatch");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < a.valid.size(); ++k) {
        if (!a.valid[k] || !b.valid[k]) continue;
        sum += std::abs(luminance(a.color[k]) - luminance(b.color[k]));
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

}  // namespace pano

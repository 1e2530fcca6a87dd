#include "fixtures.hpp"

#include "pano/parallel.hpp"
#include "pano/seam.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace pano;

namespace {

WarpedLayer full_layer(int w, int h, const Rgb &c, int index = 0) {
    return fixtures::constant_layer(w, h, c, Mask(w, h, 1), index);
}

std::vector<WarpedLayer> random_layers(std::mt19937_64 &rng, int w, int h, int labels, double keep_prob = 0.75) {
    std::uniform_real_distribution<float> color(0.0f, 1.0f);
    std::bernoulli_distribution keep(keep_prob);
    std::uniform_int_distribution<int> pick(0, labels - 1);
    std::vector<WarpedLayer> layers(labels);
    for (int l = 0; l < labels; ++l) {
        layers[l].color = ColorImage(w, h);
        layers[l].valid = Mask(w, h, 0);
        layers[l].source_index = l;
        for (auto &px : layers[l].color.data()) px = Rgb(color(rng), color(rng), color(rng));
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(w * h); ++i) {
        bool any = false;
        for (int l = 0; l < labels; ++l) {
            layers[l].valid[i] = keep(rng) ? 1 : 0;
            any = any || layers[l].valid[i];
        }
        if (!any) layers[pick(rng)].valid[i] = 1;
    }
    return layers;
}

// Independent energy: validity constraint plus pairwise costs from the
// per-pair maps, summed over 4-neighbors.
double reference_energy(const SeamProblem &p, const LabelMap &labels) {
    double e = 0.0;
    for (int y = 0; y < p.height(); ++y) {
        for (int x = 0; x < p.width(); ++x) {
            const int l = labels(x, y);
            if (l != kNoLabel && !p.valid(l, x, y)) return std::numeric_limits<double>::infinity();
            const int nb[2][2] = {{x + 1, y}, {x, y + 1}};
            for (const auto &q : nb) {
                if (q[0] >= p.width() || q[1] >= p.height()) continue;
                const int m = labels(q[0], q[1]);
                if (l == m || l == kNoLabel || m == kNoLabel) continue;
                e += p.cost(l, m, x, y) + p.cost(l, m, q[0], q[1]);
            }
        }
    }
    return e;
}

double brute_force(const SeamProblem &p) {
    const int n = p.width() * p.height();
    std::vector<std::vector<int>> options(n);
    for (int i = 0; i < n; ++i) {
        for (int l = 0; l < p.layer_count(); ++l) {
            if (p.valid(l, i % p.width(), i / p.width())) options[i].push_back(l);
        }
        if (options[i].empty()) options[i].push_back(kNoLabel);
    }
    std::vector<std::size_t> digit(n, 0);
    LabelMap labels(p.width(), p.height());
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
        for (int i = 0; i < n; ++i) labels[i] = options[i][digit[i]];
        best = std::min(best, reference_energy(p, labels));
        int i = 0;
        while (i < n && ++digit[i] == options[i].size()) digit[i++] = 0;
        if (i == n) return best;
    }
}

}  // namespace

TEST(CostMaps, ColorDifference) {
    const WarpedLayer red = full_layer(3, 3, Rgb(1, 0, 0));
    const WarpedLayer black = full_layer(3, 3, Rgb(0, 0, 0), 1);
    const ScalarMap d = color_diff_map(red, black);
    for (double v : d.data()) EXPECT_DOUBLE_EQ(v, 1.0);
    const auto values = color_diff_map(red, red);
    for (double v : values.data()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(color_diff_map(black, red), d);
}

TEST(CostMaps, ColorDifferenceZeroOutsideOverlap) {
    Mask half(4, 1, 0);
    half(0, 0) = half(1, 0) = 1;
    const WarpedLayer a = fixtures::constant_layer(4, 1, Rgb(1, 1, 1), half);
    const WarpedLayer b = full_layer(4, 1, Rgb(0, 0, 0), 1);
    const ScalarMap d = color_diff_map(a, b);
    EXPECT_GT(d(0, 0), 0.0);
    EXPECT_EQ(d(3, 0), 0.0);
}

TEST(CostMaps, GradientOfConstantsIsZero) {
    const auto values = gradient_map(full_layer(5, 5, Rgb(0.2f, 0.4f, 0.6f)), full_layer(5, 5, Rgb(1, 0, 0), 1));
    for (double v : values.data()) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(CostMaps, SobelStepEdgeHandValue) {
    // Luminance 0 in columns 0..3, 1 in columns 4..7. With the 1/8 scaling a
    // unit step gives (1 + 2 + 1) / 8 = 0.5 on both columns next to the step.
    WarpedLayer step = full_layer(8, 5, Rgb::Zero());
    for (int y = 0; y < 5; ++y) {
        for (int x = 4; x < 8; ++x) step.color(x, y) = Rgb::Ones();
    }
    const WarpedLayer flat = full_layer(8, 5, Rgb::Constant(0.3f), 1);
    const ScalarMap g = gradient_map(step, flat);
    for (int y = 0; y < 5; ++y) {
        EXPECT_NEAR(g(1, y), 0.0, 1e-7);
        EXPECT_NEAR(g(6, y), 0.0, 1e-7);
    }
    for (int y = 1; y < 4; ++y) {
        EXPECT_NEAR(g(3, y), 0.5, 1e-7);
        EXPECT_NEAR(g(4, y), 0.5, 1e-7);
    }
    // Off-canvas taps repeat the center: gx = 3/8, gy = 1/8 on the first row.
    EXPECT_NEAR(g(3, 0), std::hypot(0.375, 0.125), 1e-7);
    EXPECT_EQ(gradient_map(flat, step), g);
}

TEST(CostMaps, TextureRatioOfConstantDifferenceIsOne) {
    const ScalarMap diff(6, 6, 0.4);
    const auto values = texture_ratio_map(diff, Mask(6, 6, 1));
    for (double v : values.data()) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(CostMaps, TextureRatioMeanExcessIsAlpha) {
    std::mt19937_64 rng(40);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ScalarMap diff(24, 18);
    for (double &v : diff.data()) v = u(rng);
    const Mask overlap(24, 18, 1);
    const CostParams params;
    const ScalarMap r = texture_ratio_map(diff, overlap, params);
    double mean = 0.0;
    for (double v : r.data()) {
        EXPECT_GE(v, 1.0);
        mean += v - 1.0;
    }
    mean /= static_cast<double>(r.size());
    EXPECT_NEAR(mean, params.ratio_alpha, 0.05 * params.ratio_alpha);

    ScalarMap scaled = diff;
    for (double &v : scaled.data()) v *= 7.0;
    const ScalarMap rs = texture_ratio_map(scaled, overlap, params);
    // Only the epsilon in the denominator breaks exact scale invariance.
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(rs[i], r[i], 1e-4);
}

TEST(CostMaps, TextureRatioWindowStatistics) {
    // Direct evaluation of the windowed standard deviation at one pixel.
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ScalarMap diff(9, 9);
    for (double &v : diff.data()) v = u(rng);
    const Mask overlap(9, 9, 1);
    const CostParams params;
    auto sigma_at = [&](int cx, int cy) {
        double s = 0, s2 = 0;
        int n = 0;
        for (int y = std::max(0, cy - 2); y <= std::min(8, cy + 2); ++y) {
            for (int x = std::max(0, cx - 2); x <= std::min(8, cx + 2); ++x) {
                s += diff(x, y);
                s2 += diff(x, y) * diff(x, y);
                ++n;
            }
        }
        const double m = s / n;
        return std::sqrt(std::max(0.0, s2 / n - m * m));
    };
    double mean_sigma = 0.0;
    for (int y = 0; y < 9; ++y) {
        for (int x = 0; x < 9; ++x) mean_sigma += sigma_at(x, y);
    }
    mean_sigma /= 81.0;
    const ScalarMap r = texture_ratio_map(diff, overlap, params);
    for (auto [x, y] : {std::pair{4, 4}, {0, 0}, {8, 3}}) {
        EXPECT_NEAR(r(x, y), 1.0 + params.ratio_alpha * sigma_at(x, y) / (mean_sigma + params.ratio_eps), 1e-6);
    }
}

TEST(CostMaps, PixelCostArithmetic) {
    EXPECT_DOUBLE_EQ(pixel_cost(1, 2, 3), 7);
    EXPECT_DOUBLE_EQ(pixel_cost(0, 0, 5), 0);
}

TEST(CostMaps, IdenticalUniformLayersCostNothing) {
    const WarpedLayer a = full_layer(6, 6, Rgb::Constant(0.5f));
    const WarpedLayer b = full_layer(6, 6, Rgb::Constant(0.5f), 1);
    const CostMaps maps = compute_cost_maps(a, b);
    for (double v : maps.cost.data()) EXPECT_EQ(v, 0.0);
}

TEST(SeamProblem, DataTerm) {
    Mask left(2, 1, 0);
    left(0, 0) = 1;
    const std::vector<WarpedLayer> layers = {fixtures::constant_layer(2, 1, Rgb::Zero(), left),
                                             full_layer(2, 1, Rgb::Ones(), 1)};
    const SeamProblem p(layers);
    EXPECT_EQ(p.data(0, 0, 0), 0.0);
    EXPECT_EQ(p.data(1, 0, 0), kInfiniteCost);
    EXPECT_EQ(p.data(1, 0, 1), 0.0);
}

TEST(SeamProblem, SmoothnessAndEnergyByHand) {
    std::mt19937_64 rng(42);
    const auto layers = random_layers(rng, 2, 1, 2, 1.0);
    const SeamProblem p(layers);
    const double cp = p.cost(0, 1, 0, 0);
    const double cq = p.cost(0, 1, 1, 0);
    EXPECT_EQ(p.smoothness(0, 0, 1, 0, 0, 0), 0.0);
    EXPECT_DOUBLE_EQ(p.smoothness(0, 0, 1, 0, 0, 1), cp + cq);
    EXPECT_DOUBLE_EQ(p.smoothness(0, 0, 1, 0, 1, 0), cp + cq);
    EXPECT_DOUBLE_EQ(p.smoothness(1, 0, 0, 0, 0, 1), cp + cq);
    LabelMap labels(2, 1);
    labels(0, 0) = 0;
    labels(1, 0) = 1;
    EXPECT_DOUBLE_EQ(p.total_energy(labels), cp + cq);
    labels(1, 0) = 0;
    EXPECT_DOUBLE_EQ(p.total_energy(labels), 0.0);
}

TEST(SeamProblem, RejectsTooManyLayers) {
    std::vector<WarpedLayer> layers(SeamProblem::kMaxLayers + 1, full_layer(2, 2, Rgb::Zero()));
    EXPECT_THROW(SeamProblem{layers}, std::invalid_argument);
}

TEST(SeamProblem, RejectsMismatchedCanvases) {
    const std::vector<WarpedLayer> layers = {full_layer(2, 2, Rgb::Zero()), full_layer(3, 2, Rgb::Zero(), 1)};
    EXPECT_THROW(SeamProblem{layers}, std::invalid_argument);
}

TEST(SolveLabels, TwoLabelsMatchBruteForce) {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<int> side(1, 4);
    for (int n = 0; n < 150; ++n) {
        const auto layers = random_layers(rng, side(rng), side(rng), 2);
        const SeamProblem p(layers);
        const SeamLabeling s = solve_labels(p);
        const double best = brute_force(p);
        EXPECT_NEAR(s.energy, best, 1e-9 * std::max(1.0, best)) << "instance " << n;
        EXPECT_NEAR(reference_energy(p, s.labels), s.energy, 1e-9);
    }
}

TEST(SolveLabels, ThreeLabelsWithinBoundOfBruteForce) {
    std::mt19937_64 rng(44);
    int exact = 0;
    for (int n = 0; n < 100; ++n) {
        const auto layers = random_layers(rng, 3, 3, 3);
        const SeamProblem p(layers);
        const double got = solve_labels(p).energy;
        const double best = brute_force(p);
        EXPECT_LE(got, 1.05 * best + 1e-9) << "instance " << n;
        if (std::abs(got - best) <= 1e-9 * std::max(1.0, best)) ++exact;
    }
    RecordProperty("exact_matches", exact);
    EXPECT_GE(exact, 95);
}

TEST(SolveLabels, SingleLayerTakesEverything) {
    Mask valid(5, 4, 0);
    valid(1, 1) = valid(2, 1) = valid(3, 2) = 1;
    const std::vector<WarpedLayer> layers = {fixtures::constant_layer(5, 4, Rgb::Ones(), valid)};
    const SeamLabeling s = solve_labels(SeamProblem(layers));
    EXPECT_EQ(s.energy, 0.0);
    for (std::size_t i = 0; i < valid.size(); ++i) EXPECT_EQ(s.labels[i], valid[i] ? 0 : kNoLabel);
}

TEST(SolveLabels, SoleCoverageFixesTheLabel) {
    // Whatever covers a pixel alone must source it.
    std::mt19937_64 rng(45);
    for (int n = 0; n < 30; ++n) {
        const auto layers = random_layers(rng, 8, 6, 3, 0.5);
        const SeamProblem p(layers);
        const SeamLabeling s = solve_labels(p);
        EXPECT_LT(s.energy, kInfiniteCost);
        for (int y = 0; y < 6; ++y) {
            for (int x = 0; x < 8; ++x) {
                ASSERT_NE(s.labels(x, y), kNoLabel);
                EXPECT_TRUE(p.valid(s.labels(x, y), x, y));
            }
        }
    }
}

TEST(SolveLabels, EnergyHistoryIsMonotone) {
    std::mt19937_64 rng(46);
    for (int n = 0; n < 20; ++n) {
        const auto layers = random_layers(rng, 12, 10, 4);
        const SeamLabeling s = solve_labels(SeamProblem(layers));
        ASSERT_FALSE(s.energy_history.empty());
        for (std::size_t i = 1; i < s.energy_history.size(); ++i) {
            EXPECT_LT(s.energy_history[i], s.energy_history[i - 1]);
        }
        EXPECT_NEAR(s.energy_history.back(), s.energy, 1e-9 * std::max(1.0, s.energy));
        EXPECT_EQ(s.accepted_moves + 1, static_cast<int>(s.energy_history.size()));
    }
}

TEST(SolveLabels, NeverWorseThanFirstValid) {
    std::mt19937_64 rng(47);
    for (int n = 0; n < 20; ++n) {
        const auto layers = random_layers(rng, 10, 10, 3);
        const SeamProblem p(layers);
        EXPECT_LE(solve_labels(p).energy, first_valid_labeling(p).energy);
    }
}

TEST(SolveLabels, PermutingLayersKeepsEnergy) {
    std::mt19937_64 rng(48);
    for (int n = 0; n < 30; ++n) {
        auto layers = random_layers(rng, 3, 3, 3);
        const double e = solve_labels(SeamProblem(layers)).energy;
        std::reverse(layers.begin(), layers.end());
        EXPECT_NEAR(solve_labels(SeamProblem(layers)).energy, e, 1e-9 * std::max(1.0, e));
    }
}

TEST(SolveLabels, IndependentOfThreadCount) {
    std::mt19937_64 rng(49);
    const auto layers = random_layers(rng, 40, 30, 4, 0.4);
    set_thread_count(1);
    const SeamLabeling a = solve_labels(SeamProblem(layers));
    set_thread_count(4);
    const SeamLabeling b = solve_labels(SeamProblem(layers));
    set_thread_count(0);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.energy, b.energy);
}

TEST(SeamMasks, PartitionCoverage) {
    std::mt19937_64 rng(50);
    const auto layers = random_layers(rng, 9, 7, 3, 0.5);
    const SeamProblem p(layers);
    const SeamLabeling s = solve_labels(p);
    const auto masks = labels_to_masks(s.labels, 3);
    const Mask cov = p.coverage();
    for (std::size_t i = 0; i < cov.size(); ++i) {
        int sum = 0;
        for (const Mask &m : masks) sum += m[i] ? 1 : 0;
        EXPECT_EQ(sum, cov[i] ? 1 : 0);
    }
    EXPECT_EQ(labels_to_masks(s.labels, 3), masks);
}

TEST(SeamMasks, SingleImageMaskIsItsValidity) {
    Mask valid(4, 4, 0);
    valid(0, 0) = valid(3, 3) = valid(2, 1) = 1;
    const std::vector<WarpedLayer> layers = {fixtures::constant_layer(4, 4, Rgb::Ones(), valid)};
    EXPECT_EQ(labels_to_masks(solve_labels(SeamProblem(layers)).labels, 1)[0], valid);
}

TEST(SeamMasks, VisualizationMarksEmptyPixelsBlack) {
    LabelMap labels(2, 1, kNoLabel);
    labels(1, 0) = 0;
    const ColorImage v = label_visualization(labels, 1);
    EXPECT_TRUE((v(0, 0) == Rgb::Zero()).all());
    EXPECT_GT(v(1, 0).maxCoeff(), 0.0f);
}

#include "pano/blend.hpp"
#include "pano/bundle.hpp"
#include "pano/canvas.hpp"
#include "pano/maxflow.hpp"
#include "pano/parallel.hpp"
#include "pano/seam.hpp"
#include "pano/synthetic.hpp"
#include "pano/warp.hpp"

#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

using namespace pano;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct RingFixture {
    std::vector<Camera> cameras;
    std::vector<ColorImage> views;

    RingFixture(int count, int size) {
        cameras = ring_cameras(count, 45 * kDeg, intrinsics_from_fov(size, size, 60 * kDeg));
        views = render_synthetic_scene(procedural_erp(1024, 512), cameras);
    }
};

const RingFixture &ring() {
    static const RingFixture f(8, 256);
    return f;
}

void BM_WarpErp(benchmark::State &state) {
    set_thread_count(static_cast<int>(state.range(1)));
    const int w = static_cast<int>(state.range(0));
    const PanoramaCanvas canvas(EquirectFormat{}, w, w / 2);
    const auto &f = ring();
    for (auto _ : state) benchmark::DoNotOptimize(warp_image(f.views[0], f.cameras[0], canvas));
    state.SetItemsProcessed(state.iterations() * w * (w / 2));
}
BENCHMARK(BM_WarpErp)->Args({1024, 1})->Args({2048, 1})->Args({2048, 0})->Unit(benchmark::kMillisecond);

// 4-connected grid with random terminal and pairwise capacities.
void BM_MaxFlowGrid(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> cap(0.0, 10.0);
    std::vector<double> terminals(2 * n * n), edges(4 * n * n);
    for (double &v : terminals) v = cap(rng);
    for (double &v : edges) v = cap(rng);
    for (auto _ : state) {
        MaxFlow g(n * n);
        for (int i = 0; i < n * n; ++i) g.add_terminal_weights(i, terminals[2 * i], terminals[2 * i + 1]);
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                const int i = y * n + x;
                if (x + 1 < n) g.add_edge(i, i + 1, edges[4 * i], edges[4 * i + 1]);
                if (y + 1 < n) g.add_edge(i, i + n, edges[4 * i + 2], edges[4 * i + 3]);
            }
        }
        benchmark::DoNotOptimize(g.solve());
    }
    state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_MaxFlowGrid)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_SeamSolve(benchmark::State &state) {
    set_thread_count(1);
    const auto &f = ring();
    const PanoramaCanvas canvas(EquirectFormat{}, 1024, 512);
    std::vector<WarpedLayer> layers;
    for (std::size_t i = 0; i < f.views.size(); ++i) {
        layers.push_back(warp_image(f.views[i], f.cameras[i], canvas, static_cast<int>(i)));
    }
    for (auto _ : state) {
        const SeamProblem problem(layers);
        benchmark::DoNotOptimize(solve_labels(problem));
    }
}
BENCHMARK(BM_SeamSolve)->Unit(benchmark::kMillisecond);

void BM_LaplacianRoundTrip(benchmark::State &state) {
    set_thread_count(1);
    const int w = static_cast<int>(state.range(0));
    const ColorImage img = procedural_erp(w, w / 2);
    for (auto _ : state) benchmark::DoNotOptimize(collapse_pyramid(build_laplacian_pyramid(img, 5)));
    state.SetItemsProcessed(state.iterations() * w * (w / 2));
}
BENCHMARK(BM_LaplacianRoundTrip)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_BundleAdjust(benchmark::State &state) {
    const auto &f = ring();
    std::mt19937_64 rng(9);
    MatchSet matches;
    for (int i = 0; i < 8; ++i) {
        const int j = (i + 1) % 8;
        std::uniform_real_distribution<double> u(0.0, 255.0);
        int found = 0;
        while (found < 50) {
            const Vec2 p(u(rng), u(rng));
            const auto q = ray_to_pixel(f.cameras[j], pixel_to_ray(f.cameras[i], p));
            if (!q || q->x() < 0 || q->y() < 0 || q->x() > 255 || q->y() > 255) continue;
            matches.add(i, j, p, *q);
            ++found;
        }
    }
    auto start = f.cameras;
    for (std::size_t i = 1; i < start.size(); ++i) {
        start[i].rotation = rotation_from_yaw_pitch_roll(0.01, -0.01, 0.005) * start[i].rotation;
    }
    for (auto _ : state) benchmark::DoNotOptimize(optimize(start, matches));
}
BENCHMARK(BM_BundleAdjust)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

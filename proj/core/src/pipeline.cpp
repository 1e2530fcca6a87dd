#include "pano/pipeline.hpp"

#include "pano/io.hpp"
#include "pano/metrics.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <sstream>

namespace pano {

namespace fs = std::filesystem;

namespace {

class StageTimer {
public:
    StageTimer(EvalReport &report, std::string stage)
        : report_(report), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const auto end = std::chrono::steady_clock::now();
        report_.timings.push_back({stage_, std::chrono::duration<double>(end - start_).count()});
    }

private:
    EvalReport &report_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

template <typename T>
Grid<T> crop(const Grid<T> &g, const Box &b) {
    Grid<T> out(b.width(), b.height());
    for (int y = 0; y < b.height(); ++y) {
        for (int x = 0; x < b.width(); ++x) out(x, y) = g(x + b.x0, y + b.y0);
    }
    return out;
}

std::string indexed(const std::string &stem, int i, const std::string &ext) {
    std::ostringstream s;
    s << stem << '_' << (i < 10 ? "0" : "") << i << ext;
    return s.str();
}

void write_debug(const std::string &dir, const std::vector<WarpedLayer> &layers, const std::vector<Mask> &masks,
                 const LabelMap &labels, const SeamProblem *problem) {
    fs::create_directories(dir);
    const fs::path root(dir);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const int k = static_cast<int>(i);
        save_image((root / indexed("layer", k, ".png")).string(), layers[i].color);
        save_mask((root / indexed("valid", k, ".png")).string(), layers[i].valid);
        save_mask((root / indexed("seam_mask", k, ".png")).string(), masks[i]);
    }
    save_image((root / "labels.png").string(), label_visualization(labels, static_cast<int>(layers.size())));
    if (!problem) return;
    for (const auto &[a, b] : problem->overlapping_pairs()) {
        const CostMaps &m = problem->pair_maps(a, b);
        std::ostringstream name;
        name << "cost_" << a << '_' << b << ".png";
        save_scalar_map((root / name.str()).string(), m.cost);
    }
}

double horizontal_fov(const Camera &c) { return c.intrinsics.horizontal_fov(); }

}  // namespace

double angular_span(const std::vector<Camera> &cameras) {
    if (cameras.empty()) throw std::invalid_argument("angular_span needs at least one camera");
    double widest = 0.0;
    for (const Camera &c : cameras) widest = std::max(widest, horizontal_fov(c));
    double spread = 0.0;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        for (std::size_t j = i + 1; j < cameras.size(); ++j) {
            const double cosang = std::clamp(cameras[i].optical_axis().dot(cameras[j].optical_axis()), -1.0, 1.0);
            spread = std::max(spread, std::acos(cosang));
        }
    }
    return spread + widest;
}

ProjectionFormat suggest_projection(const std::vector<Camera> &cameras) {
    const double span = angular_span(cameras) * 180.0 / std::numbers::pi;
    if (span < 120.0) return PlanarFormat{};
    if (span < 200.0) return CylindricalFormat{};
    return EquirectFormat{};
}

StitchResult stitch(const std::vector<ColorImage> &images, const std::vector<Camera> &cameras,
                    const StitchConfig &config, const std::optional<MatchSet> &matches) {
    if (images.empty()) throw std::invalid_argument("stitch needs at least one image");
    if (images.size() != cameras.size()) throw std::invalid_argument("one camera per image is required");

    StitchResult res;
    EvalReport &rep = res.report;
    rep.images = static_cast<int>(images.size());
    res.cameras = cameras;

    if (config.bundle_adjust) {
        StageTimer t(rep, "bundle_adjustment");
        if (!matches || matches->pairs.empty()) {
            rep.warnings.push_back("bundle adjustment requested without matches; skipped");
        } else if (images.size() > 1) {
            BundleResult ba;
            try {
                ba = optimize(cameras, *matches, config.bundle);
            } catch (const std::invalid_argument &e) {
                throw StitchError(std::string("bundle adjustment: ") + e.what());
            }
            if (ba.report.final_cost <= ba.report.initial_cost) res.cameras = ba.cameras;
            rep.bundle = ba.report;
        }
    }

    const PanoramaCanvas canvas(config.format, config.width, config.height);
    rep.projection = canvas.name();
    rep.width = canvas.width();
    rep.height = canvas.height();

    {
        StageTimer t(rep, "warp");
        for (std::size_t i = 0; i < images.size(); ++i) {
            res.layers.push_back(warp_image(images[i], res.cameras[i], canvas, static_cast<int>(i)));
        }
    }

    if (config.mesh_warp) {
        StageTimer t(rep, "mesh_warp");
        for (std::size_t i = 1; i < res.layers.size(); ++i) {
            std::size_t best = i;
            std::size_t best_overlap = 0;
            for (std::size_t j = 0; j < i; ++j) {
                const std::size_t n = count_set(mask_and(res.layers[j].valid, res.layers[i].valid));
                if (n > best_overlap) {
                    best_overlap = n;
                    best = j;
                }
            }
            if (best == i) continue;
            MeshWarpResult mw = mesh_align(res.layers[best], res.layers[i], config.mesh);
            if (!mw.applied) continue;
            if (mw.warped.foldover) rep.warnings.push_back("mesh warp fold-over in layer " + std::to_string(i));
            res.layers[i] = std::move(mw.warped);
            rep.mesh_warped.push_back(static_cast<int>(i));
        }
    }

    std::optional<SeamProblem> problem;
    {
        StageTimer t(rep, "seam");
        problem.emplace(std::span<const WarpedLayer>(res.layers), config.seam_costs);
        if (problem->overlapping_pairs().empty() && res.layers.size() > 1) {
            rep.warnings.push_back("no overlapping layers; panorama is a side-by-side composite");
        }
        SeamLabeling labeling = config.seam ? solve_labels(*problem) : first_valid_labeling(*problem);
        rep.seam_energy = labeling.energy;
        rep.seam_components = labeling.components;
        res.labels = std::move(labeling.labels);
    }

    const std::vector<Mask> masks = labels_to_masks(res.labels, static_cast<int>(res.layers.size()));
    {
        StageTimer t(rep, "blend");
        BlendResult blended;
        try {
            blended = blend_layers(res.layers, masks, config.blend);
        } catch (const std::invalid_argument &e) {
            throw StitchError(std::string("blend: ") + e.what());
        }
        res.panorama = std::move(blended.image);
        res.coverage = std::move(blended.coverage);
    }
    rep.covered_pixels = count_set(res.coverage);

    {
        StageTimer t(rep, "metrics");
        for (const auto &[a, b] : problem->overlapping_pairs()) {
            const Mask overlap = mask_and(res.layers[a].valid, res.layers[b].valid);
            const Box box = bounding_box(overlap);
            OverlapMetric m;
            m.a = a;
            m.b = b;
            m.pixels = count_set(overlap);
            const Mask om = crop(overlap, box);
            const ColorImage ca = crop(res.layers[a].color, box);
            const ColorImage cb = crop(res.layers[b].color, box);
            m.psnr = psnr(ca, cb, om);
            m.ssim = ssim(ca, cb, om);
            rep.overlaps.push_back(m);
        }
    }

    if (config.debug_dir) {
        StageTimer t(rep, "debug_output");
        write_debug(*config.debug_dir, res.layers, masks, res.labels, &*problem);
    }
    return res;
}

StitchResult stitch(const Scene &scene, const StitchConfig &config) {
    std::optional<MatchSet> matches;
    if (config.bundle_adjust) {
        std::optional<std::string> path = config.matches_path;
        if (!path && scene.description.matches) path = scene.description.resolve(*scene.description.matches);
        if (path) matches = load_matches(*path);
    }
    StitchConfig cfg = config;
    cfg.bundle.shared_focal = config.bundle.shared_focal && scene.description.shared_focal;
    return stitch(scene.images, scene.cameras, cfg, matches);
}

void evaluate_against_reference(StitchResult &result, const ColorImage &reference) {
    if (reference.width() != result.panorama.width() || reference.height() != result.panorama.height()) {
        throw std::invalid_argument("reference panorama size differs from the stitched canvas");
    }
    result.report.reference_psnr = psnr(result.panorama, reference, result.coverage);
    result.report.reference_ssim = ssim(result.panorama, reference, result.coverage);
}

std::string report_to_json(const EvalReport &report) {
    using nlohmann::json;
    json j;
    j["projection"] = report.projection;
    j["canvas"] = {report.width, report.height};
    j["images"] = report.images;
    j["covered_pixels"] = report.covered_pixels;
    j["overlaps"] = json::array();
    for (const auto &o : report.overlaps) {
        j["overlaps"].push_back({{"a", o.a},
                                 {"b", o.b},
                                 {"pixels", o.pixels},
                                 {"psnr_db", displayable_psnr(o.psnr)},
                                 {"ssim", o.ssim}});
    }
    if (report.reference_psnr) j["reference_psnr_db"] = displayable_psnr(*report.reference_psnr);
    if (report.reference_ssim) j["reference_ssim"] = *report.reference_ssim;
    if (report.seam_energy) j["seam_energy"] = *report.seam_energy;
    j["seam_components"] = report.seam_components;
    if (report.bundle) {
        const SolveReport &b = *report.bundle;
        j["bundle_adjustment"] = {{"initial_cost", b.initial_cost},
                                  {"final_cost", b.final_cost},
                                  {"initial_rms_px", b.initial_rms},
                                  {"final_rms_px", b.final_rms},
                                  {"iterations", b.iterations},
                                  {"accepted_steps", b.accepted_steps},
                                  {"stop_reason", stop_reason_name(b.reason)}};
    }
    j["mesh_warped_layers"] = report.mesh_warped;
    json timings = json::object();
    for (const auto &t : report.timings) timings[t.stage] = t.seconds;
    j["timings_s"] = timings;
    j["warnings"] = report.warnings;
    return j.dump(2);
}

}  // namespace pano

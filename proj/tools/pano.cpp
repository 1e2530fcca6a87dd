// pano: command-line front end for stitching, synthetic scene generation and
// image comparison.

#include "pano/bundle.hpp"
#include "pano/io.hpp"
#include "pano/metrics.hpp"
#include "pano/parallel.hpp"
#include "pano/pipeline.hpp"
#include "pano/scene.hpp"
#include "pano/synthetic.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pano;

namespace {

enum ExitCode { kOk = 0, kInputError = 1, kStitchError = 2, kInternalError = 3 };

constexpr double kDeg = std::numbers::pi / 180.0;

std::pair<int, int> parse_size(const std::string &text) {
    int w = 0, h = 0;
    char x = 0, extra = 0;
    if (std::sscanf(text.c_str(), "%d%c%d%c", &w, &x, &h, &extra) != 3 || (x != 'x' && x != 'X') || w <= 0 || h <= 0) {
        throw std::invalid_argument("expected a size like 2048x1024, got '" + text + "'");
    }
    return {w, h};
}

bool parse_switch(const std::string &value) { return value == "on"; }

/// One camera per non-comment line: yaw pitch [roll], degrees.
std::vector<Rotation> read_poses(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw SceneError("cannot open pose file '" + path + "'");
    std::vector<Rotation> poses;
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream ss(line);
        double yaw = 0.0, pitch = 0.0, roll = 0.0;
        if (!(ss >> yaw >> pitch)) {
            throw SceneError("pose file line " + std::to_string(lineno) + ": expected 'yaw pitch [roll]' in degrees");
        }
        ss >> roll;
        poses.push_back(rotation_from_yaw_pitch_roll(yaw * kDeg, pitch * kDeg, roll * kDeg));
    }
    if (poses.empty()) throw SceneError("pose file '" + path + "' lists no cameras");
    return poses;
}

/// Grid correspondences between every pair of views that see each other.
MatchSet exact_matches(const std::vector<Camera> &cameras) {
    constexpr int kGrid = 12;
    constexpr int kMinPoints = 8;
    MatchSet matches;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        for (std::size_t j = i + 1; j < cameras.size(); ++j) {
            const Intrinsics &ki = cameras[i].intrinsics;
            const Intrinsics &kj = cameras[j].intrinsics;
            std::vector<PointPair> found;
            for (int gy = 0; gy < kGrid; ++gy) {
                for (int gx = 0; gx < kGrid; ++gx) {
                    const Vec2 p((gx + 0.5) * ki.width / kGrid, (gy + 0.5) * ki.height / kGrid);
                    const auto q = ray_to_pixel(cameras[j], pixel_to_ray(cameras[i], p));
                    if (!q || q->x() < 0 || q->y() < 0 || q->x() > kj.width - 1 || q->y() > kj.height - 1) continue;
                    found.push_back({p, *q});
                }
            }
            if (static_cast<int>(found.size()) < kMinPoints) continue;
            for (const PointPair &pp : found) matches.add(static_cast<int>(i), static_cast<int>(j), pp.from, pp.to);
        }
    }
    return matches;
}

int run_stitch(const std::string &scene_path, const std::string &projection, const std::string &canvas,
               const std::string &blend, int bands, const std::string &seam, const std::string &meshwarp,
               const std::string &ba, const std::string &matches, const std::string &out, const std::string &report,
               const std::string &debug_dir) {
    const Scene scene = load_scene(scene_path);
    StitchConfig cfg;
    cfg.format = projection == "auto" ? suggest_projection(scene.cameras) : format_from_name(projection);
    std::tie(cfg.width, cfg.height) = parse_size(canvas);
    cfg.blend.mode = blend_mode_from_name(blend);
    cfg.blend.bands = bands;
    cfg.seam = parse_switch(seam);
    cfg.mesh_warp = parse_switch(meshwarp);
    cfg.bundle_adjust = parse_switch(ba);
    if (!matches.empty()) cfg.matches_path = matches;
    if (!debug_dir.empty()) cfg.debug_dir = debug_dir;

    const StitchResult result = stitch(scene, cfg);
    save_image(out, result.panorama);
    if (cfg.debug_dir) save_mask((fs::path(*cfg.debug_dir) / "coverage.png").string(), result.coverage);
    const std::string json = report_to_json(result.report);
    if (!report.empty()) {
        std::ofstream f(report);
        if (!f) throw std::runtime_error("cannot write report '" + report + "'");
        f << json << '\n';
    }
    std::cout << "wrote " << out << " (" << result.report.projection << ", " << cfg.width << "x" << cfg.height
              << ", " << result.report.covered_pixels << " covered pixels)\n";
    for (const StageTiming &t : result.report.timings) std::cout << "  " << t.stage << ": " << t.seconds << " s\n";
    for (const std::string &w : result.report.warnings) std::cerr << "warning: " << w << '\n';
    return kOk;
}

int run_synth(const std::string &erp_path, const std::string &poses_path, double fov_deg, const std::string &out_dir,
              const std::string &size) {
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw std::invalid_argument("--fov must be in (0, 180) degrees");
    const ColorImage erp = load_image(erp_path);
    if (erp.width() != 2 * erp.height()) throw std::invalid_argument("the ERP image must be twice as wide as tall");
    const auto [w, h] = parse_size(size);
    const Intrinsics k = intrinsics_from_fov(w, h, fov_deg * kDeg);
    std::vector<Camera> cameras;
    for (const Rotation &r : read_poses(poses_path)) {
        Camera c;
        c.intrinsics = k;
        c.rotation = r;
        cameras.push_back(c);
    }
    const auto views = render_synthetic_scene(erp, cameras);

    fs::create_directories(out_dir);
    SceneDescription scene;
    for (std::size_t i = 0; i < views.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "view_%03zu.png", i);
        save_image((fs::path(out_dir) / name).string(), views[i]);
        scene.images.push_back({name, cameras[i]});
    }
    const MatchSet matches = exact_matches(cameras);
    if (!matches.pairs.empty()) {
        std::ofstream f(fs::path(out_dir) / "matches.txt");
        write_matches(f, matches);
        scene.matches = "matches.txt";
    }
    save_scene((fs::path(out_dir) / "scene.json").string(), scene);
    std::cout << "wrote " << views.size() << " views, " << matches.pairs.size() << " matched pairs to " << out_dir
              << '\n';
    return kOk;
}

int run_eval(const std::string &a_path, const std::string &b_path, const std::string &mask_path) {
    const ColorImage a = load_image(a_path);
    const ColorImage b = load_image(b_path);
    if (a.width() != b.width() || a.height() != b.height()) throw std::invalid_argument("images differ in size");
    const Mask mask = mask_path.empty() ? Mask(a.width(), a.height(), 1) : load_mask(mask_path);
    std::cout << "psnr_db " << displayable_psnr(psnr(a, b, mask)) << '\n' << "ssim " << ssim(a, b, mask) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Panorama stitching from calibrated views"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

    std::string scene, projection = "auto", canvas = "2048x1024", blend = "feather", seam = "on", meshwarp = "off",
                ba = "off", matches, out, report, debug_dir;
    int bands = 0;
    auto *stitch_cmd = app.add_subcommand("stitch", "Stitch a scene into a panorama");
    stitch_cmd->add_option("--scene", scene, "Scene JSON file")->required();
    stitch_cmd->add_option("--projection", projection, "Output projection or 'auto'");
    stitch_cmd->add_option("--canvas", canvas, "Canvas size WxH");
    stitch_cmd->add_option("--blend", blend)->check(CLI::IsMember({"feather", "multiband", "none"}));
    stitch_cmd->add_option("--bands", bands, "Multiband levels (0 = automatic)")->check(CLI::NonNegativeNumber);
    stitch_cmd->add_option("--seam", seam)->check(CLI::IsMember({"on", "off"}));
    stitch_cmd->add_option("--meshwarp", meshwarp)->check(CLI::IsMember({"on", "off"}));
    stitch_cmd->add_option("--ba", ba)->check(CLI::IsMember({"on", "off"}));
    stitch_cmd->add_option("--matches", matches, "Match file overriding the scene's");
    stitch_cmd->add_option("--out", out, "Output image")->required();
    stitch_cmd->add_option("--report", report, "Write the JSON report here");
    stitch_cmd->add_option("--debug-dir", debug_dir, "Dump layers, masks, labels, cost maps and coverage");

    std::string erp, poses, out_dir, size = "512x512";
    double fov = 60.0;
    auto *synth_cmd = app.add_subcommand("synth", "Render perspective views of an ERP image");
    synth_cmd->add_option("--erp", erp, "Equirectangular source image")->required();
    synth_cmd->add_option("--poses", poses, "Text file of 'yaw pitch [roll]' lines in degrees")->required();
    synth_cmd->add_option("--fov", fov, "Horizontal field of view in degrees");
    synth_cmd->add_option("--out-dir", out_dir, "Destination directory")->required();
    synth_cmd->add_option("--size", size, "View size WxH");

    std::string a, b, mask;
    auto *eval_cmd = app.add_subcommand("eval", "PSNR and SSIM between two images");
    eval_cmd->add_option("--a", a)->required();
    eval_cmd->add_option("--b", b)->required();
    eval_cmd->add_option("--mask", mask, "Only compare where the mask is nonzero");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        set_thread_count(threads);
        if (*stitch_cmd) {
            return run_stitch(scene, projection, canvas, blend, bands, seam, meshwarp, ba, matches, out, report,
                              debug_dir);
        }
        if (*synth_cmd) return run_synth(erp, poses, fov, out_dir, size);
        return run_eval(a, b, mask);
    } catch (const StitchError &e) {
        std::cerr << "stitch failed: " << e.what() << '\n';
        return kStitchError;
    } catch (const SceneError &e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const ImageIoError &e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const MatchFormatError &e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument &e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
}

#pragma once

#include "pano/blend.hpp"
#include "pano/bundle.hpp"
#include "pano/canvas.hpp"
#include "pano/meshwarp.hpp"
#include "pano/scene.hpp"
#include "pano/seam.hpp"
#include "pano/warp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pano {

struct StitchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StitchConfig {
    ProjectionFormat format = EquirectFormat{};
    int width = 2048;
    int height = 1024;
    BlendConfig blend;
    bool seam = true;
    CostParams seam_costs;
    bool mesh_warp = false;
    MeshWarpParams mesh;
    bool bundle_adjust = false;
    BundleOptions bundle;
    /// Overrides the scene's match file.
    std::optional<std::string> matches_path;
    /// Receives warped layers, masks, the label map and cost maps when set.
    std::optional<std::string> debug_dir;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct OverlapMetric {
    int a = 0;
    int b = 0;
    std::size_t pixels = 0;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct EvalReport {
    std::string projection;
    int width = 0;
    int height = 0;
    int images = 0;
    std::size_t covered_pixels = 0;
    std::vector<OverlapMetric> overlaps;
    std::optional<double> reference_psnr;
    std::optional<double> reference_ssim;
    std::optional<double> seam_energy;
    int seam_components = 0;
    std::optional<SolveReport> bundle;
    std::vector<int> mesh_warped;
    std::vector<StageTiming> timings;
    std::vector<std::string> warnings;
};

struct StitchResult {
    ColorImage panorama;
    Mask coverage;
    EvalReport report;
    std::vector<Camera> cameras;
    std::vector<WarpedLayer> layers;
    LabelMap labels;
};

/// Bundle adjustment (optional) -> warp -> mesh warp (optional) -> seams ->
/// blend. Deterministic for a given (images, cameras, config). Throws
/// StitchError for stage failures and std::invalid_argument for bad input.
StitchResult stitch(const std::vector<ColorImage> &images, const std::vector<Camera> &cameras,
                    const StitchConfig &config, const std::optional<MatchSet> &matches = std::nullopt);

/// Loads the scene's match file when bundle adjustment needs one.
StitchResult stitch(const Scene &scene, const StitchConfig &config);

/// Adds PSNR/SSIM of the panorama against a ground truth on covered pixels.
void evaluate_against_reference(StitchResult &result, const ColorImage &reference);

/// planar below 120 degrees of span, cylindrical below 200, erp otherwise.
/// Span = largest angle between two optical axes + the widest horizontal FoV.
ProjectionFormat suggest_projection(const std::vector<Camera> &cameras);
double angular_span(const std::vector<Camera> &cameras);

std::string report_to_json(const EvalReport &report);

}  // namespace pano

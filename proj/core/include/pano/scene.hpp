#pragma once

#include "pano/geometry.hpp"
#include "pano/image.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pano {

inline constexpr const char *kSceneSchema = "panostitch.scene/1";

struct SceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SceneSchemaError : SceneError {
    using SceneError::SceneError;
};
struct MissingImageError : SceneError {
    using SceneError::SceneError;
};
struct ResolutionMismatchError : SceneError {
    using SceneError::SceneError;
};

struct SceneImage {
    /// As written in the scene file (relative paths resolve against it).
    std::string path;
    Camera camera;
};

struct SceneDescription {
    std::vector<SceneImage> images;
    bool shared_focal = true;
    std::optional<std::string> matches;
    /// Directory relative paths are resolved against.
    std::string base_dir = ".";

    std::string resolve(const std::string &path) const;
};

struct Scene {
    SceneDescription description;
    std::vector<ColorImage> images;
    std::vector<Camera> cameras;
};

/// Parses scene JSON text. Throws SceneSchemaError with a field path on any
/// violation.
SceneDescription parse_scene(const std::string &text, const std::string &base_dir = ".");
SceneDescription read_scene_description(const std::string &path);

/// Loads the scene and its images. When an image's size differs from its
/// record the intrinsics are rescaled; an aspect change raises
/// ResolutionMismatchError. Cameras are moved to the first-camera gauge.
Scene load_scene(const std::string &path);

/// R_i <- R_i R_0^T; camera 0 becomes exactly the identity with zero
/// translation.
std::vector<Camera> normalize_gauge(const std::vector<Camera> &cameras);

std::string scene_to_json(const SceneDescription &scene);
void save_scene(const std::string &path, const SceneDescription &scene);

}  // namespace pano

#include "pano/scene.hpp"

#include "pano/io.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace pano {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void schema_error(const std::string &where, const std::string &what) {
    throw SceneSchemaError("scene " + where + ": " + what);
}

double number(const json &j, const std::string &key, const std::string &where) {
    if (!j.contains(key)) schema_error(where, "missing '" + key + "'");
    if (!j[key].is_number()) schema_error(where + "." + key, "expected a number");
    return j[key].get<double>();
}

int positive_int(const json &j, const std::string &key, const std::string &where) {
    if (!j.contains(key)) schema_error(where, "missing '" + key + "'");
    if (!j[key].is_number_integer() || j[key].get<long long>() <= 0) {
        schema_error(where + "." + key, "expected a positive integer");
    }
    return j[key].get<int>();
}

std::vector<double> numbers(const json &j, std::size_t n, const std::string &where) {
    if (!j.is_array() || j.size() != n) schema_error(where, "expected an array of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (const auto &v : j) {
        if (!v.is_number()) schema_error(where, "expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

Rotation parse_rotation(const json &j, const std::string &where) {
    if (!j.is_object()) schema_error(where, "expected an object with 'quaternion' or 'angle_axis'");
    const bool has_q = j.contains("quaternion");
    const bool has_a = j.contains("angle_axis");
    if (has_q == has_a) schema_error(where, "exactly one of 'quaternion' and 'angle_axis' is required");
    if (has_q) {
        const auto q = numbers(j["quaternion"], 4, where + ".quaternion");
        if (Eigen::Vector4d(q[0], q[1], q[2], q[3]).norm() < 1e-12) schema_error(where, "zero quaternion");
        return rotation_from_quaternion(q[0], q[1], q[2], q[3]);
    }
    const auto a = numbers(j["angle_axis"], 3, where + ".angle_axis");
    return rotation_from_angle_axis(Vec3(a[0], a[1], a[2]));
}

}  // namespace

std::string SceneDescription::resolve(const std::string &path) const {
    const fs::path p(path);
    if (p.is_absolute()) return p.string();
    return (fs::path(base_dir) / p).lexically_normal().string();
}

SceneDescription parse_scene(const std::string &text, const std::string &base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error &e) {
        throw SceneSchemaError(std::string("scene is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) schema_error("root", "expected an object");
    if (!root.contains("schema") || !root["schema"].is_string() || root["schema"].get<std::string>() != kSceneSchema) {
        schema_error("schema", std::string("expected \"") + kSceneSchema + "\"");
    }
    SceneDescription scene;
    scene.base_dir = base_dir;
    if (root.contains("shared_focal")) {
        if (!root["shared_focal"].is_boolean()) schema_error("shared_focal", "expected a boolean");
        scene.shared_focal = root["shared_focal"].get<bool>();
    }
    if (root.contains("matches")) {
        if (!root["matches"].is_string()) schema_error("matches", "expected a path");
        scene.matches = root["matches"].get<std::string>();
    }
    if (!root.contains("images") || !root["images"].is_array() || root["images"].empty()) {
        schema_error("images", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < root["images"].size(); ++i) {
        const json &rec = root["images"][i];
        const std::string where = "images[" + std::to_string(i) + "]";
        if (!rec.is_object()) schema_error(where, "expected an object");
        if (!rec.contains("path") || !rec["path"].is_string()) schema_error(where, "missing 'path'");
        SceneImage img;
        img.path = rec["path"].get<std::string>();
        Intrinsics &k = img.camera.intrinsics;
        k.width = positive_int(rec, "width", where);
        k.height = positive_int(rec, "height", where);
        k.focal = number(rec, "focal", where);
        if (!(k.focal > 0.0)) schema_error(where + ".focal", "must be > 0");
        if (rec.contains("principal_point")) {
            const auto pp = numbers(rec["principal_point"], 2, where + ".principal_point");
            k.principal_x = pp[0];
            k.principal_y = pp[1];
        } else {
            k.principal_x = 0.5 * k.width;
            k.principal_y = 0.5 * k.height;
        }
        if (!rec.contains("rotation")) schema_error(where, "missing 'rotation'");
        img.camera.rotation = parse_rotation(rec["rotation"], where + ".rotation");
        if (rec.contains("translation")) {
            const auto t = numbers(rec["translation"], 3, where + ".translation");
            img.camera.translation = Vec3(t[0], t[1], t[2]);
        }
        scene.images.push_back(std::move(img));
    }
    return scene;
}

SceneDescription read_scene_description(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw SceneError("cannot open scene file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const fs::path parent = fs::path(path).parent_path();
    return parse_scene(ss.str(), parent.empty() ? "." : parent.string());
}

std::vector<Camera> normalize_gauge(const std::vector<Camera> &cameras) {
    if (cameras.empty()) return {};
    const Rotation r0_inv = cameras[0].rotation.inverse();
    const Vec3 t0 = cameras[0].translation;
    std::vector<Camera> out = cameras;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].rotation = i == 0 ? Rotation::identity() : cameras[i].rotation * r0_inv;
        out[i].translation = cameras[i].translation - t0;
    }
    out[0].translation = Vec3::Zero();
    return out;
}

Scene load_scene(const std::string &path) {
    Scene scene;
    scene.description = read_scene_description(path);
    for (const SceneImage &rec : scene.description.images) {
        const std::string file = scene.description.resolve(rec.path);
        if (!fs::exists(file)) throw MissingImageError("missing image: '" + file + "'");
        ColorImage img;
        try {
            img = load_image(file);
        } catch (const ImageIoError &e) {
            throw MissingImageError(e.what());
        }
        Camera cam = rec.camera;
        if (img.width() != cam.intrinsics.width || img.height() != cam.intrinsics.height) {
            try {
                cam.intrinsics = rescale_intrinsics(cam.intrinsics, img.width(), img.height());
            } catch (const AnisotropicScaleError &) {
                std::ostringstream msg;
                msg << "resolution mismatch for '" << file << "': scene says " << rec.camera.intrinsics.width << "x"
                    << rec.camera.intrinsics.height << ", file is " << img.width() << "x" << img.height();
                throw ResolutionMismatchError(msg.str());
            }
        }
        scene.images.push_back(std::move(img));
        scene.cameras.push_back(cam);
    }
    scene.cameras = normalize_gauge(scene.cameras);
    return scene;
}

std::string scene_to_json(const SceneDescription &scene) {
    json root;
    root["schema"] = kSceneSchema;
    root["shared_focal"] = scene.shared_focal;
    if (scene.matches) root["matches"] = *scene.matches;
    root["images"] = json::array();
    for (const SceneImage &img : scene.images) {
        const Intrinsics &k = img.camera.intrinsics;
        const Vec3 aa = rotation_to_angle_axis(img.camera.rotation);
        const Vec3 &t = img.camera.translation;
        root["images"].push_back({{"path", img.path},
                                  {"width", k.width},
                                  {"height", k.height},
                                  {"focal", k.focal},
                                  {"principal_point", {k.principal_x, k.principal_y}},
                                  {"rotation", {{"angle_axis", {aa.x(), aa.y(), aa.z()}}}},
                                  {"translation", {t.x(), t.y(), t.z()}}});
    }
    return root.dump(2);
}

void save_scene(const std::string &path, const SceneDescription &scene) {
    std::ofstream out(path);
    if (!out) throw SceneError("cannot write scene file '" + path + "'");
    out << scene_to_json(scene) << '\n';
}

}  // namespace pano

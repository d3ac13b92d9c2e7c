#include "arf/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "arf/errors.hpp"
#include "arf/rng.hpp"

namespace arf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void write_scene_manifest(const std::string& dir, const SceneManifest& m) {
    json j;
    j["kind"] = m.kind;
    j["params"] = m.params;
    j["width"] = m.width;
    j["height"] = m.height;
    j["train_views"] = m.train_views;
    j["test_views"] = m.test_views;
    j["fine_n"] = m.fine_n;
    j["camera_angle_x"] = m.camera_angle_x;
    j["camera_radius"] = m.camera_radius;
    j["t_near"] = m.t_near;
    j["t_far"] = m.t_far;
    j["background"] = {m.background.x, m.background.y, m.background.z};
    j["seed"] = m.seed;
    write_text_file((fs::path(dir) / "scene_manifest.json").string(), j.dump(2) + "\n");
}

SceneManifest read_scene_manifest(const std::string& dir) {
    const json j = load_json_file((fs::path(dir) / "scene_manifest.json").string());
    SceneManifest m;
    try {
        m.kind = j.value("kind", m.kind);
        if (j.contains("params")) m.params = j["params"].get<SceneParams>();
        m.width = j.value("width", m.width);
        m.height = j.value("height", m.height);
        m.train_views = j.value("train_views", m.train_views);
        m.test_views = j.value("test_views", m.test_views);
        m.fine_n = j.value("fine_n", m.fine_n);
        m.camera_angle_x = j.value("camera_angle_x", m.camera_angle_x);
        m.camera_radius = j.value("camera_radius", m.camera_radius);
        m.t_near = j.value("t_near", m.t_near);
        m.t_far = j.value("t_far", m.t_far);
        if (j.contains("background")) {
            const auto& b = j["background"];
            m.background = Vec3(b.at(0).get<double>(), b.at(1).get<double>(),
                                b.at(2).get<double>());
        }
        m.seed = j.value("seed", m.seed);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scene_manifest.json: ") + e.what());
    }
    return m;
}

std::vector<CameraModel> make_orbit_cameras(int count, double radius, double camera_angle_x,
                                            int width, int height, std::uint64_t seed) {
    if (count < 1) throw ConfigError("make_orbit_cameras: need at least one view");
    if (!(radius > 0.0)) throw ConfigError("make_orbit_cameras: radius must be positive");
    Rng rng(seed);
    const double focal = focal_from_angle_x(camera_angle_x, width);
    const double golden = 2.399963229728653;  // golden-angle azimuth step
    std::vector<CameraModel> cams;
    cams.reserve(std::size_t(count));
    for (int k = 0; k < count; ++k) {
        const double z = -0.7 + 1.4 * (double(k) + 0.5) / double(count);
        const double phi = golden * double(k) + rng.uniform(0.0, 0.35);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 pos = Vec3(r * std::cos(phi), r * std::sin(phi), z) * radius;
        CameraModel cam;
        cam.width = width;
        cam.height = height;
        cam.focal = focal;
        cam.camera_to_world = look_at_pose(pos, Vec3(0, 0, 0), Vec3(0, 0, 1));
        cams.push_back(cam);
    }
    return cams;
}

Dataset render_reference_dataset(const AnalyticScene& scene,
                                 const std::vector<CameraModel>& cameras, int fine_n,
                                 double t_near, double t_far, double camera_angle_x,
                                 const Vec3& background) {
    Dataset ds;
    ds.t_near = t_near;
    ds.t_far = t_far;
    ds.camera_angle_x = camera_angle_x;
    ds.background = background;
    auto sigma_fn = [&scene](const Vec3& x, const Vec3&) { return scene.sigma(x); };
    auto color_fn = [&scene](const Vec3& x, const Vec3&) { return scene.color(x); };
    for (std::size_t vi = 0; vi < cameras.size(); ++vi) {
        DatasetView view;
        view.name = "r_" + std::to_string(vi);
        view.camera = cameras[vi];
        view.image = Image(cameras[vi].width, cameras[vi].height);
        for (int y = 0; y < cameras[vi].height; ++y) {
            for (int x = 0; x < cameras[vi].width; ++x) {
                const Ray ray =
                    ray_through_pixel(cameras[vi], double(x), double(y), t_near, t_far);
                const OracleResult res =
                    integrate_ray_oracle(sigma_fn, color_fn, ray, fine_n, background);
                view.image.set_pixel(x, y, res.rgb);
            }
        }
        ds.views.push_back(std::move(view));
    }
    return ds;
}

void save_dataset(const std::string& dir, const std::string& split, const Dataset& dataset) {
    const fs::path root(dir);
    fs::create_directories(root / split);
    json frames = json::array();
    for (const auto& view : dataset.views) {
        const auto& pose = view.camera.camera_to_world;
        json matrix = json::array();
        for (int r = 0; r < 3; ++r)
            matrix.push_back({pose.rotation(r, 0), pose.rotation(r, 1), pose.rotation(r, 2),
                              pose.translation[r]});
        matrix.push_back({0.0, 0.0, 0.0, 1.0});
        frames.push_back(
            {{"file_path", "./" + split + "/" + view.name}, {"transform_matrix", matrix}});
        write_png_rgb8((root / split / (view.name + ".png")).string(), view.image);
    }
    const json j = {{"camera_angle_x", dataset.camera_angle_x}, {"frames", frames}};
    write_text_file((root / ("transforms_" + split + ".json")).string(), j.dump(2) + "\n");
}

Dataset load_dataset(const std::string& dir, const std::string& split, const Vec3& background,
                     double t_near, double t_far) {
    const fs::path root(dir);
    const std::string tpath = (root / ("transforms_" + split + ".json")).string();
    const json j = load_json_file(tpath);
    Dataset ds;
    ds.t_near = t_near;
    ds.t_far = t_far;
    ds.background = background;
    try {
        ds.camera_angle_x = j.at("camera_angle_x").get<double>();
        for (const auto& frame : j.at("frames")) {
            DatasetView view;
            const std::string file_path = frame.at("file_path").get<std::string>();
            view.name = fs::path(file_path).filename().string();
            view.image = read_png_to_linear((root / (file_path + ".png")).lexically_normal().string(),
                                            background);
            const auto& m = frame.at("transform_matrix");
            Pose pose;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) pose.rotation(r, c) = m.at(r).at(c).get<double>();
            pose.translation =
                Vec3(m.at(0).at(3).get<double>(), m.at(1).at(3).get<double>(),
                     m.at(2).at(3).get<double>());
            if (pose.rotation.orthonormality_error() > 1e-6)
                throw InputError(tpath + ": pose rotation is not orthonormal (" + view.name +
                                 ")");
            view.camera.width = view.image.width;
            view.camera.height = view.image.height;
            view.camera.focal = focal_from_angle_x(ds.camera_angle_x, view.image.width);
            view.camera.camera_to_world = pose;
            ds.views.push_back(std::move(view));
        }
    } catch (const json::exception& e) {
        throw ParseError(tpath + ": " + e.what());
    }
    if (ds.views.empty()) throw InputError(tpath + ": no frames");
    return ds;
}

TrainRays dataset_to_rays(const Dataset& dataset) {
    TrainRays out;
    std::size_t total = 0;
    for (const auto& view : dataset.views) total += view.image.pixel_count();
    out.rays.reserve(total);
    out.gt.reserve(total);
    for (const auto& view : dataset.views) {
        for (int y = 0; y < view.image.height; ++y) {
            for (int x = 0; x < view.image.width; ++x) {
                out.rays.push_back(ray_through_pixel(view.camera, double(x), double(y),
                                                     dataset.t_near, dataset.t_far));
                out.gt.push_back(view.image.pixel(x, y));
            }
        }
    }
    return out;
}

}  // namespace arf

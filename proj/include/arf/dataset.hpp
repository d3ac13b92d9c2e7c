#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arf/image.hpp"
#include "arf/renderer.hpp"
#include "arf/scene.hpp"
#include "arf/train.hpp"
#include "arf/vec.hpp"

namespace arf {

struct DatasetView {
    std::string name;  // file stem, e.g. "r_0"
    CameraModel camera;
    Image image;
};

struct Dataset {
    std::vector<DatasetView> views;
    double t_near = 0.0, t_far = 0.0;
    double camera_angle_x = 0.0;
    Vec3 background{1, 1, 1};
};

// Everything needed to regenerate or consume a generated scene directory.
struct SceneManifest {
    std::string kind = "anisotropic_slats";
    SceneParams params;
    int width = 64, height = 64;
    int train_views = 30, test_views = 10;
    int fine_n = 4096;
    double camera_angle_x = 1.0;
    double camera_radius = 3.2;
    double t_near = 1.3, t_far = 5.2;
    Vec3 background{1, 1, 1};
    std::uint64_t seed = 1;
};

void write_scene_manifest(const std::string& dir, const SceneManifest& m);
SceneManifest read_scene_manifest(const std::string& dir);

// Poses spiral over the sphere of the given radius, looking at the origin,
// avoiding the poles; the seed jitters the azimuths.
std::vector<CameraModel> make_orbit_cameras(int count, double radius, double camera_angle_x,
                                            int width, int height, std::uint64_t seed);

// Ground truth by the reference integrator, one image per camera.
Dataset render_reference_dataset(const AnalyticScene& scene,
                                 const std::vector<CameraModel>& cameras, int fine_n,
                                 double t_near, double t_far, double camera_angle_x,
                                 const Vec3& background);

// transforms_<split>.json plus <split>/<name>.png under dir.
void save_dataset(const std::string& dir, const std::string& split, const Dataset& dataset);
Dataset load_dataset(const std::string& dir, const std::string& split, const Vec3& background,
                     double t_near, double t_far);

// Flattens every pixel of every view into supervision rays.
TrainRays dataset_to_rays(const Dataset& dataset);

}  // namespace arf

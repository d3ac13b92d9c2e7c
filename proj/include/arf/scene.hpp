#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "arf/vec.hpp"

namespace arf {

enum class SceneKind { kIsotropicBlob, kThinShell, kAnisotropicSlats };

SceneKind scene_kind_from_string(const std::string& name);
std::string scene_kind_to_string(SceneKind kind);

struct SceneParams {
    // isotropic_blob
    double blob_amplitude = 8.0;
    double blob_width = 0.35;
    // thin_shell
    double shell_amplitude = 25.0;
    double shell_radius = 0.6;
    double shell_width = 0.06;
    // anisotropic_slats: parallel Gaussian slabs plus a blob tucked behind
    // the stack
    double slat_amplitude = 35.0;
    double slat_width = 0.05;
    double slat_spacing = 0.2;
    int slat_count = 7;
    double slat_extent = 0.55;
    double back_blob_amplitude = 25.0;
    double back_blob_width = 0.12;
    double back_blob_offset = 0.95;
};

void to_json(nlohmann::json& j, const SceneParams& p);
void from_json(const nlohmann::json& j, SceneParams& p);

// Smooth closed-form emitter. Density and color depend on position only; the
// view-dependent training signal comes from under-sampling thin structure,
// not from the medium itself.
struct AnalyticScene {
    std::string name;
    std::function<double(const Vec3&)> sigma;
    std::function<Vec3(const Vec3&)> color;
    Aabb bounds;
    double camera_radius = 3.2;
    double t_near = 1.3;
    double t_far = 5.2;
    double camera_angle_x = 1.0;
};

AnalyticScene make_scene(SceneKind kind, const SceneParams& params);

}  // namespace arf

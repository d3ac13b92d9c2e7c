#include "arf/scene.hpp"

#include <cmath>

#include "arf/errors.hpp"

namespace arf {

SceneKind scene_kind_from_string(const std::string& name) {
    if (name == "isotropic_blob") return SceneKind::kIsotropicBlob;
    if (name == "thin_shell") return SceneKind::kThinShell;
    if (name == "anisotropic_slats") return SceneKind::kAnisotropicSlats;
    throw ConfigError("unknown scene kind: " + name);
}

std::string scene_kind_to_string(SceneKind kind) {
    switch (kind) {
        case SceneKind::kIsotropicBlob: return "isotropic_blob";
        case SceneKind::kThinShell: return "thin_shell";
        case SceneKind::kAnisotropicSlats: return "anisotropic_slats";
    }
    throw ConfigError("unknown scene kind");
}

void to_json(nlohmann::json& j, const SceneParams& p) {
    j = {{"blob_amplitude", p.blob_amplitude},
         {"blob_width", p.blob_width},
         {"shell_amplitude", p.shell_amplitude},
         {"shell_radius", p.shell_radius},
         {"shell_width", p.shell_width},
         {"slat_amplitude", p.slat_amplitude},
         {"slat_width", p.slat_width},
         {"slat_spacing", p.slat_spacing},
         {"slat_count", p.slat_count},
         {"slat_extent", p.slat_extent},
         {"back_blob_amplitude", p.back_blob_amplitude},
         {"back_blob_width", p.back_blob_width},
         {"back_blob_offset", p.back_blob_offset}};
}

void from_json(const nlohmann::json& j, SceneParams& p) {
    SceneParams d;
    p.blob_amplitude = j.value("blob_amplitude", d.blob_amplitude);
    p.blob_width = j.value("blob_width", d.blob_width);
    p.shell_amplitude = j.value("shell_amplitude", d.shell_amplitude);
    p.shell_radius = j.value("shell_radius", d.shell_radius);
    p.shell_width = j.value("shell_width", d.shell_width);
    p.slat_amplitude = j.value("slat_amplitude", d.slat_amplitude);
    p.slat_width = j.value("slat_width", d.slat_width);
    p.slat_spacing = j.value("slat_spacing", d.slat_spacing);
    p.slat_count = j.value("slat_count", d.slat_count);
    p.slat_extent = j.value("slat_extent", d.slat_extent);
    p.back_blob_amplitude = j.value("back_blob_amplitude", d.back_blob_amplitude);
    p.back_blob_width = j.value("back_blob_width", d.back_blob_width);
    p.back_blob_offset = j.value("back_blob_offset", d.back_blob_offset);
}

namespace {

double gaussian(double d2, double width) { return std::exp(-d2 / (2.0 * width * width)); }

void check_positive(double v, const char* what) {
    if (!(v > 0.0)) throw ConfigError(std::string("scene: ") + what + " must be positive");
}

AnalyticScene make_isotropic_blob(const SceneParams& p) {
    check_positive(p.blob_amplitude, "blob_amplitude");
    check_positive(p.blob_width, "blob_width");
    AnalyticScene s;
    s.name = "isotropic_blob";
    const double a = p.blob_amplitude, w = p.blob_width;
    s.sigma = [a, w](const Vec3& x) { return a * gaussian(x.dot(x), w); };
    s.color = [](const Vec3& x) {
        return Vec3{0.5 + 0.45 * std::sin(2.2 * x.x + 0.3),
                    0.5 + 0.45 * std::sin(2.2 * x.y - 0.8),
                    0.5 + 0.45 * std::sin(2.2 * x.z + 1.9)};
    };
    return s;
}

AnalyticScene make_thin_shell(const SceneParams& p) {
    check_positive(p.shell_amplitude, "shell_amplitude");
    check_positive(p.shell_radius, "shell_radius");
    check_positive(p.shell_width, "shell_width");
    AnalyticScene s;
    s.name = "thin_shell";
    const double a = p.shell_amplitude, r = p.shell_radius, w = p.shell_width;
    s.sigma = [a, r, w](const Vec3& x) {
        const double d = x.norm() - r;
        return a * gaussian(d * d, w);
    };
    s.color = [](const Vec3& x) {
        const double n = x.norm();
        if (n < 1e-9) return Vec3{0.5, 0.5, 0.5};
        const Vec3 u = x / n;
        return Vec3{0.5 + 0.45 * u.x, 0.5 + 0.45 * u.y, 0.5 + 0.45 * u.z};
    };
    return s;
}

AnalyticScene make_anisotropic_slats(const SceneParams& p) {
    check_positive(p.slat_amplitude, "slat_amplitude");
    check_positive(p.slat_width, "slat_width");
    check_positive(p.slat_spacing, "slat_spacing");
    check_positive(p.slat_extent, "slat_extent");
    check_positive(p.back_blob_amplitude, "back_blob_amplitude");
    check_positive(p.back_blob_width, "back_blob_width");
    if (p.slat_count < 1) throw ConfigError("scene: slat_count must be at least 1");

    AnalyticScene s;
    s.name = "anisotropic_slats";
    const Vec3 n = Vec3(1, 0, 1).normalized();
    const Vec3 t1(0, 1, 0);
    const Vec3 t2 = n.cross(t1);
    const Vec3 blob_center = n * -p.back_blob_offset;
    const SceneParams prm = p;

    auto slats_density = [prm, n, t1, t2](const Vec3& x) {
        const double u = n.dot(x);
        const double lat = t1.dot(x) * t1.dot(x) + t2.dot(x) * t2.dot(x);
        const double env = gaussian(lat, prm.slat_extent);
        double acc = 0.0;
        const double mid = 0.5 * double(prm.slat_count - 1);
        for (int k = 0; k < prm.slat_count; ++k) {
            const double d = u - (double(k) - mid) * prm.slat_spacing;
            acc += gaussian(d * d, prm.slat_width);
        }
        return prm.slat_amplitude * env * acc;
    };
    auto blob_density = [prm, blob_center](const Vec3& x) {
        const Vec3 d = x - blob_center;
        return prm.back_blob_amplitude * gaussian(d.dot(d), prm.back_blob_width);
    };
    s.sigma = [slats_density, blob_density](const Vec3& x) {
        return slats_density(x) + blob_density(x);
    };
    // Each slat is painted warm on the +n face and cool on the -n face, so
    // opposite sides of the stack show opposite palettes.
    s.color = [slats_density, blob_density, n, t1, t2, prm](const Vec3& x) {
        const double u = n.dot(x);
        const double pp = t1.dot(x), q = t2.dot(x);
        const double mid = 0.5 * double(prm.slat_count - 1);
        int k_star = 0;
        double du = u - (0.0 - mid) * prm.slat_spacing;
        for (int k = 1; k < prm.slat_count; ++k) {
            const double d = u - (double(k) - mid) * prm.slat_spacing;
            if (std::abs(d) < std::abs(du)) {
                du = d;
                k_star = k;
            }
        }
        // Hue rotates per slat and swings half a turn between the two faces,
        // so the palette seen from one side of the stack never matches the
        // other side.
        const double face = std::tanh(du / (0.75 * prm.slat_width));
        const double hue =
            2.1 * double(k_star) + 1.57 * face + 1.5 * pp + 0.7 * q;
        const Vec3 slat_col{0.5 + 0.45 * std::sin(hue),
                            0.5 + 0.45 * std::sin(hue + 2.0943951023931953),
                            0.5 + 0.45 * std::sin(hue + 4.1887902047863905)};
        const double bh = 6.0 * pp + 3.5 * q;
        const Vec3 blob_col{0.5 + 0.5 * std::sin(bh),
                            0.5 + 0.5 * std::sin(bh + 2.0943951023931953),
                            0.5 + 0.5 * std::sin(bh + 4.1887902047863905)};
        const double ws = slats_density(x);
        const double wb = blob_density(x);
        const double mix = wb / (ws + wb + 1e-12);
        return slat_col + (blob_col - slat_col) * mix;
    };
    return s;
}

}  // namespace

AnalyticScene make_scene(SceneKind kind, const SceneParams& params) {
    switch (kind) {
        case SceneKind::kIsotropicBlob: return make_isotropic_blob(params);
        case SceneKind::kThinShell: return make_thin_shell(params);
        case SceneKind::kAnisotropicSlats: return make_anisotropic_slats(params);
    }
    throw ConfigError("unknown scene kind");
}

}  // namespace arf

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "arf/errors.hpp"
#include "arf/rng.hpp"
#include "arf/vec.hpp"

namespace arf {

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
    double t_near = 0.0;
    double t_far = 0.0;

    Vec3 at(double t) const { return origin + direction * t; }
};

inline void validate_ray(const Ray& ray) {
    const double n = ray.direction.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InputError("ray: direction is degenerate");
    if (!(ray.t_near >= 0.0) || !(ray.t_far > ray.t_near))
        throw InputError("ray: need 0 <= t_near < t_far");
}

// Sample positions along [t_near, t_far] with one sample per equal-width bin.
// With an rng the sample is uniform within its bin; without, it sits at the
// bin center. delta[i] = t[i+1] - t[i], and the last delta runs to t_far.
struct SampleSet {
    std::vector<double> t;
    std::vector<double> delta;
};

inline SampleSet sample_stratified(double t_near, double t_far, int n, Rng* rng) {
    if (n < 1) throw ConfigError("sample_stratified: need at least one sample");
    if (!(t_far > t_near)) throw InputError("sample_stratified: need t_near < t_far");
    SampleSet s;
    s.t.resize(std::size_t(n));
    s.delta.resize(std::size_t(n));
    const double h = (t_far - t_near) / double(n);
    for (int i = 0; i < n; ++i) {
        const double u = rng ? rng->uniform() : 0.5;
        s.t[std::size_t(i)] = t_near + (double(i) + u) * h;
    }
    for (int i = 0; i + 1 < n; ++i) s.delta[std::size_t(i)] = s.t[std::size_t(i + 1)] - s.t[std::size_t(i)];
    s.delta[std::size_t(n - 1)] = t_far - s.t[std::size_t(n - 1)];
    return s;
}

// Pinhole camera, OpenGL-style axes: looks down local -z, x right, y up.
struct CameraModel {
    int width = 0, height = 0;
    double focal = 0.0;  // pixels
    Pose camera_to_world;
};

inline double focal_from_angle_x(double camera_angle_x, int width) {
    if (!(camera_angle_x > 0.0) || width <= 0)
        throw ConfigError("focal_from_angle_x: bad field of view or width");
    return 0.5 * double(width) / std::tan(0.5 * camera_angle_x);
}

inline Pose look_at_pose(const Vec3& position, const Vec3& target, const Vec3& up_hint) {
    Vec3 f = target - position;
    if (!(f.norm() > 0.0)) throw InputError("look_at_pose: position equals target");
    f = f.normalized();
    Vec3 up = up_hint;
    if (f.cross(up).norm() < 1e-8) up = Vec3(0, 1, 0);
    const Vec3 z = -f;
    const Vec3 x = up.cross(z).normalized();
    const Vec3 y = z.cross(x);
    Pose pose;
    for (int r = 0; r < 3; ++r) {
        pose.rotation(r, 0) = x[r];
        pose.rotation(r, 1) = y[r];
        pose.rotation(r, 2) = z[r];
    }
    pose.translation = position;
    return pose;
}

// px/py are pixel indices; the ray passes through the pixel center.
inline Ray ray_through_pixel(const CameraModel& cam, double px, double py, double t_near,
                             double t_far) {
    if (cam.width <= 0 || cam.height <= 0 || !(cam.focal > 0.0))
        throw ConfigError("ray_through_pixel: bad camera");
    const Vec3 d_cam{(px + 0.5 - 0.5 * double(cam.width)) / cam.focal,
                     -(py + 0.5 - 0.5 * double(cam.height)) / cam.focal, -1.0};
    Ray ray;
    ray.origin = cam.camera_to_world.translation;
    ray.direction = cam.camera_to_world.rotate(d_cam).normalized();
    ray.t_near = t_near;
    ray.t_far = t_far;
    validate_ray(ray);
    return ray;
}

// All pixel rays in row-major order (y outer, x inner).
inline std::vector<Ray> generate_rays(const CameraModel& cam, double t_near, double t_far) {
    std::vector<Ray> rays;
    rays.reserve(std::size_t(cam.width) * std::size_t(cam.height));
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x)
            rays.push_back(ray_through_pixel(cam, double(x), double(y), t_near, t_far));
    return rays;
}

// Alpha compositing of discrete samples, always in double:
//   alpha_i = 1 - exp(-sigma_i * delta_i)
//   T_1 = 1, T_{i+1} = T_i (1 - alpha_i)
//   rgb = sum_i T_i alpha_i c_i + T_{N+1} * background
//   opacity = 1 - T_{N+1}
// weight_sum + trans_final = 1 to within roundoff by construction.
struct CompositeResult {
    Vec3 rgb;
    double opacity = 0.0;
    double weight_sum = 0.0;
    double trans_final = 1.0;
};

// `alpha` (length N) and `trans` (length N+1, trans[0] = 1) are optional
// caches for the backward pass.
inline CompositeResult composite(std::span<const double> sigma, std::span<const Vec3> color,
                                 std::span<const double> delta, const Vec3& background,
                                 std::vector<double>* alpha = nullptr,
                                 std::vector<double>* trans = nullptr) {
    const std::size_t n = sigma.size();
    if (color.size() != n || delta.size() != n)
        throw UsageError("composite: sigma/color/delta size mismatch");
    if (alpha) alpha->resize(n);
    if (trans) trans->resize(n + 1);
    CompositeResult out;
    out.rgb = Vec3(0, 0, 0);
    double t_cur = 1.0;
    if (trans) (*trans)[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& c = color[i];
        if (!std::isfinite(sigma[i]) || !std::isfinite(c.x) || !std::isfinite(c.y) ||
            !std::isfinite(c.z))
            throw RenderError("non-finite field output at sample " + std::to_string(i));
        const double a = 1.0 - std::exp(-sigma[i] * delta[i]);
        const double w = t_cur * a;
        out.rgb += c * w;
        out.weight_sum += w;
        t_cur *= 1.0 - a;
        if (alpha) (*alpha)[i] = a;
        if (trans) (*trans)[i + 1] = t_cur;
    }
    out.rgb += background * t_cur;
    out.trans_final = t_cur;
    out.opacity = 1.0 - t_cur;
    return out;
}

// Gradients of (rgb, opacity) wrt per-sample sigma and color, given the
// caches from composite(). Reverse sweep over a suffix accumulator:
//   d rgb / d(sigma_i delta_i) = T_{i+1} c_i - sum_{j>i} w_j c_j - T_{N+1} bg
//   d opacity / d(sigma_i delta_i) = T_{N+1}
//   d rgb / d c_i = w_i
inline void composite_backward(std::span<const double> sigma, std::span<const Vec3> color,
                               std::span<const double> delta,
                               std::span<const double> alpha, std::span<const double> trans,
                               const Vec3& background, const Vec3& d_rgb, double d_opacity,
                               std::span<double> d_sigma, std::span<Vec3> d_color) {
    const std::size_t n = sigma.size();
    if (color.size() != n || delta.size() != n || alpha.size() != n || trans.size() != n + 1 ||
        d_sigma.size() != n || d_color.size() != n)
        throw UsageError("composite_backward: size mismatch");
    const double t_final = trans[n];
    Vec3 suffix = background * t_final;
    for (std::size_t ii = n; ii-- > 0;) {
        const double w = trans[ii] * alpha[ii];
        const Vec3 da_vec = color[ii] * trans[ii + 1] - suffix;
        const double da = da_vec.dot(d_rgb) + t_final * d_opacity;
        d_sigma[ii] = da * delta[ii];
        d_color[ii] = d_rgb * w;
        suffix += color[ii] * w;
    }
    (void)sigma;
}

// Point query interface used by the single-ray renderer and by tests.
using PointFn = std::function<std::pair<double, Vec3>(const Vec3& position, const Vec3& dir)>;

struct RenderedRay {
    Vec3 rgb;
    double opacity = 0.0;
    double weight_sum = 0.0;
    double trans_final = 1.0;
    // per-sample caches for the backward pass
    std::vector<double> sigma;
    std::vector<Vec3> color;
    std::vector<double> alpha;
    std::vector<double> trans;
};

inline RenderedRay render_ray(const PointFn& point, const Ray& ray, const SampleSet& samples,
                              const Vec3& background) {
    validate_ray(ray);
    const std::size_t n = samples.t.size();
    RenderedRay out;
    out.sigma.resize(n);
    out.color.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [s, c] = point(ray.at(samples.t[i]), ray.direction);
        out.sigma[i] = s;
        out.color[i] = c;
    }
    const CompositeResult res =
        composite(out.sigma, out.color, samples.delta, background, &out.alpha, &out.trans);
    out.rgb = res.rgb;
    out.opacity = res.opacity;
    out.weight_sum = res.weight_sum;
    out.trans_final = res.trans_final;
    return out;
}

struct RaySampleGrads {
    std::vector<double> d_sigma;
    std::vector<Vec3> d_color;
};

inline RaySampleGrads render_ray_backward(const RenderedRay& cache, const SampleSet& samples,
                                          const Vec3& background, const Vec3& d_rgb,
                                          double d_opacity) {
    RaySampleGrads g;
    g.d_sigma.resize(cache.sigma.size());
    g.d_color.resize(cache.sigma.size());
    composite_backward(cache.sigma, cache.color, samples.delta, cache.alpha, cache.trans,
                       background, d_rgb, d_opacity, g.d_sigma, g.d_color);
    return g;
}

// Reference integrator for the continuous emission/absorption transport along
// a ray. Composite midpoint rule with the transmittance carried as accumulated
// optical depth; an independent route from the alpha-compositing renderer.
struct OracleResult {
    Vec3 rgb;
    double opacity = 0.0;
};

inline OracleResult integrate_ray_oracle(const std::function<double(const Vec3&, const Vec3&)>& sigma_fn,
                                         const std::function<Vec3(const Vec3&, const Vec3&)>& color_fn,
                                         const Ray& ray, int fine_n, const Vec3& background) {
    validate_ray(ray);
    if (fine_n < 1) throw ConfigError("integrate_ray_oracle: need at least one step");
    const double h = (ray.t_far - ray.t_near) / double(fine_n);
    double tau = 0.0;
    Vec3 acc(0, 0, 0);
    for (int k = 0; k < fine_n; ++k) {
        const double tm = ray.t_near + (double(k) + 0.5) * h;
        const Vec3 x = ray.at(tm);
        const double s = sigma_fn(x, ray.direction);
        const Vec3 c = color_fn(x, ray.direction);
        const double t_mid = std::exp(-(tau + 0.5 * s * h));
        acc += c * (t_mid * s * h);
        tau += s * h;
    }
    OracleResult out;
    const double t_final = std::exp(-tau);
    out.rgb = acc + background * t_final;
    out.opacity = 1.0 - t_final;
    return out;
}

}  // namespace arf

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arf/field.hpp"
#include "arf/image.hpp"
#include "arf/renderer.hpp"

namespace arf {

struct RenderImageStats {
    // max over rays of |weight_sum + trans_final - 1|
    double max_conservation_error = 0.0;
    std::size_t rays = 0;
};

// Renders one camera view of a field, compositing in double. Rays are
// processed in row-major order in fixed-size chunks; the rng stream (when
// sampling stochastically) advances per ray in that order, so the result is
// independent of chunk size.
template <typename T>
Image render_field_image(const Field<T>& field, const CameraModel& cam, int n_samples,
                         double t_near, double t_far, const Vec3& background,
                         bool deterministic, std::uint64_t seed, int chunk_rays = 4096,
                         RenderImageStats* stats = nullptr) {
    if (n_samples < 1) throw ConfigError("render_field_image: need at least one sample");
    if (chunk_rays < 1) throw ConfigError("render_field_image: chunk_rays must be positive");
    const std::vector<Ray> rays = generate_rays(cam, t_near, t_far);
    Image img(cam.width, cam.height);
    Rng rng(seed);
    Rng* rng_ptr = deterministic ? nullptr : &rng;

    FieldForward<T> fw;
    std::vector<SampleSet> samples;
    std::vector<Vec3> positions, dirs;
    std::vector<double> sig_d(static_cast<std::size_t>(n_samples));
    std::vector<Vec3> col_d(static_cast<std::size_t>(n_samples));

    for (std::size_t begin = 0; begin < rays.size(); begin += std::size_t(chunk_rays)) {
        const std::size_t end = std::min(rays.size(), begin + std::size_t(chunk_rays));
        const std::size_t count = end - begin;
        samples.resize(count);
        positions.resize(count * std::size_t(n_samples));
        dirs.resize(count * std::size_t(n_samples));
        for (std::size_t r = 0; r < count; ++r) {
            const Ray& ray = rays[begin + r];
            samples[r] = sample_stratified(ray.t_near, ray.t_far, n_samples, rng_ptr);
            for (int i = 0; i < n_samples; ++i) {
                const std::size_t s = r * std::size_t(n_samples) + std::size_t(i);
                positions[s] = ray.at(samples[r].t[std::size_t(i)]);
                dirs[s] = ray.direction;
            }
        }
        field.forward_batch(positions, dirs, fw);
        for (std::size_t r = 0; r < count; ++r) {
            for (int i = 0; i < n_samples; ++i) {
                const std::size_t s = r * std::size_t(n_samples) + std::size_t(i);
                sig_d[std::size_t(i)] = double(fw.sigma[s]);
                col_d[std::size_t(i)] =
                    Vec3(double(fw.rgb(s, 0)), double(fw.rgb(s, 1)), double(fw.rgb(s, 2)));
            }
            CompositeResult res;
            try {
                res = composite(sig_d, col_d, samples[r].delta, background);
            } catch (const RenderError& e) {
                throw RenderError("ray " + std::to_string(begin + r) + ": " + e.what());
            }
            const std::size_t ray_index = begin + r;
            img.set_pixel(int(ray_index % std::size_t(cam.width)),
                          int(ray_index / std::size_t(cam.width)), res.rgb);
            if (stats) {
                stats->max_conservation_error =
                    std::max(stats->max_conservation_error,
                             std::abs(res.weight_sum + res.trans_final - 1.0));
                ++stats->rays;
            }
        }
    }
    return img;
}

}  // namespace arf

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "arf/adam.hpp"
#include "arf/errors.hpp"
#include "arf/field.hpp"
#include "arf/losses.hpp"
#include "arf/renderer.hpp"
#include "arf/rng.hpp"

namespace arf {

struct TrainConfig {
    FieldConfig field;
    double lambda = 1e-4;
    double learning_rate = 5e-4;
    double lr_final = 5e-5;
    int batch_rays = 1024;
    int samples_per_ray = 64;
    int iterations = 20000;
    std::uint64_t seed = 0;
    Vec3 background{1, 1, 1};
    bool deterministic_sampling = false;
    AdamConfig adam;

    void validate() const {
        field.validate();
        if (!(lambda >= 0.0)) throw ConfigError("train: lambda must be non-negative");
        if (!(learning_rate > 0.0) || !(lr_final > 0.0))
            throw ConfigError("train: learning rates must be positive");
        if (batch_rays < 1 || samples_per_ray < 1 || iterations < 1)
            throw ConfigError("train: batch_rays, samples_per_ray, iterations must be positive");
    }
};

// Flattened supervision: one ray per training pixel with its target color.
struct TrainRays {
    std::vector<Ray> rays;
    std::vector<Vec3> gt;
};

struct TrainResult {
    std::vector<LossTerms> trace;  // one row per iteration run
    bool diverged = false;
    std::string note;
};

// Exponential learning-rate schedule from learning_rate to lr_final across
// the run.
inline double lr_at(const TrainConfig& cfg, int iteration) {
    const double span = double(cfg.iterations > 1 ? cfg.iterations - 1 : 1);
    const double u = double(iteration) / span;
    return cfg.learning_rate * std::pow(cfg.lr_final / cfg.learning_rate, u);
}

// Minibatch training; the field is updated in place. A non-finite loss or
// field output stops the loop with the parameters from the last finished
// step and diverged set.
template <typename T>
TrainResult train(const TrainConfig& cfg, const TrainRays& data, Field<T>& field,
                  const std::function<void(int, const LossTerms&)>& on_iter = nullptr) {
    cfg.validate();
    if (data.rays.size() != data.gt.size() || data.rays.empty())
        throw UsageError("train: rays/targets size mismatch");

    const int n_batch = cfg.batch_rays;
    const int n_samp = cfg.samples_per_ray;
    const std::size_t s_total = std::size_t(n_batch) * std::size_t(n_samp);

    Rng rng(cfg.seed);
    FieldGradients<T> grads = field.make_gradients();
    const std::vector<ParamBlock<T>> blocks = field.param_blocks(grads);
    AdamState adam = adam_init(blocks);

    TrainResult out;
    out.trace.reserve(std::size_t(cfg.iterations));

    std::vector<std::size_t> pick(static_cast<std::size_t>(n_batch));
    std::vector<SampleSet> samples(static_cast<std::size_t>(n_batch));
    std::vector<Vec3> positions(s_total), dirs(s_total);
    FieldForward<T> fw;
    FieldUpstream<T> up;
    std::vector<double> sig_d(static_cast<std::size_t>(n_samp));
    std::vector<Vec3> col_d(static_cast<std::size_t>(n_samp));
    std::vector<double> alpha, trans;
    std::vector<double> dsig(static_cast<std::size_t>(n_samp));
    std::vector<Vec3> dcol(static_cast<std::size_t>(n_samp));
    std::vector<Vec3> pred(static_cast<std::size_t>(n_batch)), target(static_cast<std::size_t>(n_batch));
    std::vector<std::vector<double>> alphas(static_cast<std::size_t>(n_batch)), transes(static_cast<std::size_t>(n_batch));

    for (int it = 0; it < cfg.iterations; ++it) {
        for (int b = 0; b < n_batch; ++b)
            pick[std::size_t(b)] = std::size_t(rng.uniform_index(data.rays.size()));
        for (int b = 0; b < n_batch; ++b) {
            const Ray& ray = data.rays[pick[std::size_t(b)]];
            samples[std::size_t(b)] = sample_stratified(
                ray.t_near, ray.t_far, n_samp, cfg.deterministic_sampling ? nullptr : &rng);
            for (int i = 0; i < n_samp; ++i) {
                const std::size_t s = std::size_t(b) * std::size_t(n_samp) + std::size_t(i);
                positions[s] = ray.at(samples[std::size_t(b)].t[std::size_t(i)]);
                dirs[s] = ray.direction;
            }
            target[std::size_t(b)] = data.gt[pick[std::size_t(b)]];
        }

        field.forward_batch(positions, dirs, fw);

        bool render_ok = true;
        for (int b = 0; b < n_batch && render_ok; ++b) {
            const std::size_t base = std::size_t(b) * std::size_t(n_samp);
            for (int i = 0; i < n_samp; ++i) {
                const std::size_t s = base + std::size_t(i);
                sig_d[std::size_t(i)] = double(fw.sigma[s]);
                col_d[std::size_t(i)] = Vec3(double(fw.rgb(s, 0)), double(fw.rgb(s, 1)),
                                             double(fw.rgb(s, 2)));
            }
            try {
                const CompositeResult res =
                    composite(sig_d, col_d, samples[std::size_t(b)].delta, cfg.background,
                              &alphas[std::size_t(b)], &transes[std::size_t(b)]);
                pred[std::size_t(b)] = res.rgb;
            } catch (const RenderError& e) {
                out.diverged = true;
                out.note = "iteration " + std::to_string(it) + ": " + e.what();
                render_ok = false;
            }
        }
        if (!render_ok) break;

        LossTerms row;
        row.recon = recon_loss(pred, target);
        row.aniso = anisotropy_penalty<T>(fw.sigma_aniso, fw.e_aniso);
        row.total = total_loss(row.recon, row.aniso, cfg.lambda);
        row.psnr = psnr_from_mse(row.recon / 3.0);
        out.trace.push_back(row);
        if (on_iter) on_iter(it, row);
        if (!std::isfinite(row.total)) {
            out.diverged = true;
            out.note = "iteration " + std::to_string(it) + ": non-finite loss";
            break;
        }

        up.d_sigma.assign(s_total, T(0));
        up.d_rgb.resize(s_total, 3);
        const double ray_scale = 2.0 / double(n_batch);
        for (int b = 0; b < n_batch; ++b) {
            const std::size_t base = std::size_t(b) * std::size_t(n_samp);
            for (int i = 0; i < n_samp; ++i) {
                const std::size_t s = base + std::size_t(i);
                sig_d[std::size_t(i)] = double(fw.sigma[s]);
                col_d[std::size_t(i)] = Vec3(double(fw.rgb(s, 0)), double(fw.rgb(s, 1)),
                                             double(fw.rgb(s, 2)));
            }
            const Vec3 d_rgb = (pred[std::size_t(b)] - target[std::size_t(b)]) * ray_scale;
            composite_backward(sig_d, col_d, samples[std::size_t(b)].delta,
                               alphas[std::size_t(b)], transes[std::size_t(b)], cfg.background,
                               d_rgb, 0.0, dsig, dcol);
            for (int i = 0; i < n_samp; ++i) {
                const std::size_t s = base + std::size_t(i);
                up.d_sigma[s] = T(dsig[std::size_t(i)]);
                up.d_rgb(s, 0) = T(dcol[std::size_t(i)].x);
                up.d_rgb(s, 1) = T(dcol[std::size_t(i)].y);
                up.d_rgb(s, 2) = T(dcol[std::size_t(i)].z);
            }
        }
        if (cfg.lambda != 0.0) {
            up.d_sigma_aniso.assign(s_total, T(0));
            up.d_e_aniso.resize(s_total, std::size_t(cfg.field.latent_dim));
            const double scale = 2.0 * cfg.lambda / double(s_total);
            for (std::size_t s = 0; s < s_total; ++s)
                up.d_sigma_aniso[s] = T(scale * double(fw.sigma_aniso[s]));
            for (std::size_t k = 0; k < up.d_e_aniso.cols(); ++k)
                for (std::size_t s = 0; s < s_total; ++s)
                    up.d_e_aniso(s, k) = T(scale * double(fw.e_aniso(s, k)));
        } else {
            up.d_sigma_aniso.clear();
            up.d_e_aniso.resize(0, 0);
        }

        grads.zero();
        field.backward_batch(fw, up, grads);
        try {
            adam_step(blocks, adam, lr_at(cfg, it), cfg.adam);
        } catch (const UsageError& e) {
            out.diverged = true;
            out.note = "iteration " + std::to_string(it) + ": " + e.what();
            break;
        }
    }
    return out;
}

inline std::string format_shortest(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trace_to_csv(const std::vector<LossTerms>& trace) {
    std::string s = "iteration,recon,aniso,total,psnr_train\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        s += std::to_string(i);
        s += ',';
        s += format_shortest(trace[i].recon);
        s += ',';
        s += format_shortest(trace[i].aniso);
        s += ',';
        s += format_shortest(trace[i].total);
        s += ',';
        s += format_shortest(trace[i].psnr);
        s += '\n';
    }
    return s;
}

}  // namespace arf

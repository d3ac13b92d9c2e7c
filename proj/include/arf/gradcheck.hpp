#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "arf/errors.hpp"
#include "arf/field.hpp"
#include "arf/losses.hpp"
#include "arf/renderer.hpp"
#include "arf/rng.hpp"

namespace arf {

struct GradCheckReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::string worst_block;
    std::size_t worst_index = 0;
    int checked = 0;
};

// Central-difference probe of analytic gradients. The caller computes the
// analytic gradients into the blocks beforehand; loss_fn re-evaluates the
// objective at the current parameter values. Probed parameters are drawn
// uniformly over the full parameter vector. The relative-error denominator is
// floored so near-zero gradient pairs compare absolutely.
inline GradCheckReport gradient_check(const std::vector<ParamBlock<double>>& blocks,
                                      const std::function<double()>& loss_fn, int n_probes,
                                      std::uint64_t seed, double step = 1e-5,
                                      double denom_guard = 1e-6) {
    if (n_probes < 1) throw ConfigError("gradient_check: need at least one probe");
    std::size_t total = 0;
    for (const auto& b : blocks) total += b.size;
    if (total == 0) throw UsageError("gradient_check: empty parameter set");

    Rng rng(seed);
    GradCheckReport rep;
    for (int p = 0; p < n_probes; ++p) {
        std::size_t idx = std::size_t(rng.uniform_index(total));
        std::size_t bi = 0;
        while (idx >= blocks[bi].size) {
            idx -= blocks[bi].size;
            ++bi;
        }
        double* value = blocks[bi].values + idx;
        const double p0 = *value;
        const double h = step * std::max(1.0, std::abs(p0));
        *value = p0 + h;
        const double lp = loss_fn();
        *value = p0 - h;
        const double lm = loss_fn();
        *value = p0;
        const double fd = (lp - lm) / (2.0 * h);
        const double an = blocks[bi].grads[idx];
        const double abs_err = std::abs(fd - an);
        const double rel =
            abs_err / std::max(denom_guard, std::max(std::abs(fd), std::abs(an)));
        if (rel > rep.max_rel_error) {
            rep.max_rel_error = rel;
            rep.max_abs_error = abs_err;
            rep.worst_block = blocks[bi].name;
            rep.worst_index = idx;
        }
        ++rep.checked;
    }
    return rep;
}

struct PipelineGradCheckConfig {
    FieldConfig field{/*degree_sigma=*/2, /*degree_e=*/2, /*latent_dim=*/4,
                      /*pos_enc=*/{4, true}, /*dir_enc=*/{2, true},
                      /*geometry_hidden=*/{24, 24}, /*color_hidden=*/{16}};
    int n_rays = 4;
    int n_samples = 8;
    double lambda = 1e-4;
    std::uint64_t seed = 7;
    int probes = 100;
    double step = 1e-5;
};

// End-to-end check: random rays toward the origin, deterministic bin-center
// sampling, loss = ray reconstruction + lambda * anisotropy penalty. Analytic
// gradients come from the production backward path; the probe recomputes the
// whole pipeline in double.
inline GradCheckReport pipeline_gradient_check(const PipelineGradCheckConfig& cfg) {
    Field<double> field = Field<double>::create(cfg.field, cfg.seed);
    Rng rng(cfg.seed + 1);

    std::vector<Ray> rays;
    std::vector<Vec3> targets;
    for (int r = 0; r < cfg.n_rays; ++r) {
        const Vec3 origin = rng.unit_vector() * 3.0;
        const Vec3 toward =
            (Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)) -
             origin)
                .normalized();
        rays.push_back({origin, toward, 1.0, 5.0});
        targets.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    }
    std::vector<SampleSet> samples;
    std::vector<Vec3> positions, dirs;
    for (const Ray& ray : rays) {
        samples.push_back(sample_stratified(ray.t_near, ray.t_far, cfg.n_samples, nullptr));
        for (double t : samples.back().t) {
            positions.push_back(ray.at(t));
            dirs.push_back(ray.direction);
        }
    }
    const std::size_t s_total = positions.size();
    const Vec3 background(1, 1, 1);

    struct Pass {
        std::vector<Vec3> pred;
        std::vector<std::vector<double>> alpha, trans;
        double recon = 0.0, aniso = 0.0, total = 0.0;
    };
    FieldForward<double> fw;
    auto run_forward = [&](Pass& pass) {
        field.forward_batch(positions, dirs, fw);
        pass.pred.resize(rays.size());
        pass.alpha.resize(rays.size());
        pass.trans.resize(rays.size());
        std::vector<double> sig(std::size_t(cfg.n_samples));
        std::vector<Vec3> col(std::size_t(cfg.n_samples));
        for (std::size_t r = 0; r < rays.size(); ++r) {
            for (int i = 0; i < cfg.n_samples; ++i) {
                const std::size_t s = r * std::size_t(cfg.n_samples) + std::size_t(i);
                sig[std::size_t(i)] = fw.sigma[s];
                col[std::size_t(i)] = Vec3(fw.rgb(s, 0), fw.rgb(s, 1), fw.rgb(s, 2));
            }
            const CompositeResult res = composite(sig, col, samples[r].delta, background,
                                                  &pass.alpha[r], &pass.trans[r]);
            pass.pred[r] = res.rgb;
        }
        pass.recon = recon_loss(pass.pred, targets);
        pass.aniso = anisotropy_penalty<double>(fw.sigma_aniso, fw.e_aniso);
        pass.total = total_loss(pass.recon, pass.aniso, cfg.lambda);
    };

    // analytic gradients at the initial parameters
    FieldGradients<double> grads = field.make_gradients();
    const std::vector<ParamBlock<double>> blocks = field.param_blocks(grads);
    Pass pass;
    run_forward(pass);
    FieldUpstream<double> up;
    up.d_sigma.assign(s_total, 0.0);
    up.d_rgb.resize(s_total, 3);
    std::vector<double> sig(std::size_t(cfg.n_samples)), dsig(std::size_t(cfg.n_samples));
    std::vector<Vec3> col(std::size_t(cfg.n_samples)), dcol(std::size_t(cfg.n_samples));
    for (std::size_t r = 0; r < rays.size(); ++r) {
        for (int i = 0; i < cfg.n_samples; ++i) {
            const std::size_t s = r * std::size_t(cfg.n_samples) + std::size_t(i);
            sig[std::size_t(i)] = fw.sigma[s];
            col[std::size_t(i)] = Vec3(fw.rgb(s, 0), fw.rgb(s, 1), fw.rgb(s, 2));
        }
        const Vec3 d_rgb = (pass.pred[r] - targets[r]) * (2.0 / double(rays.size()));
        composite_backward(sig, col, samples[r].delta, pass.alpha[r], pass.trans[r],
                           background, d_rgb, 0.0, dsig, dcol);
        for (int i = 0; i < cfg.n_samples; ++i) {
            const std::size_t s = r * std::size_t(cfg.n_samples) + std::size_t(i);
            up.d_sigma[s] = dsig[std::size_t(i)];
            up.d_rgb(s, 0) = dcol[std::size_t(i)].x;
            up.d_rgb(s, 1) = dcol[std::size_t(i)].y;
            up.d_rgb(s, 2) = dcol[std::size_t(i)].z;
        }
    }
    up.d_sigma_aniso.assign(s_total, 0.0);
    up.d_e_aniso.resize(s_total, std::size_t(cfg.field.latent_dim));
    const double scale = 2.0 * cfg.lambda / double(s_total);
    for (std::size_t s = 0; s < s_total; ++s)
        up.d_sigma_aniso[s] = scale * fw.sigma_aniso[s];
    for (std::size_t k = 0; k < up.d_e_aniso.cols(); ++k)
        for (std::size_t s = 0; s < s_total; ++s)
            up.d_e_aniso(s, k) = scale * fw.e_aniso(s, k);
    grads.zero();
    field.backward_batch(fw, up, grads);

    auto loss_fn = [&]() {
        Pass probe;
        run_forward(probe);
        return probe.total;
    };
    return gradient_check(blocks, loss_fn, cfg.probes, cfg.seed + 2, cfg.step);
}

}  // namespace arf

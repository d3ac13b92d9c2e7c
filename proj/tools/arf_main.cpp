#include <cstdio>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "arf/runs.hpp"

namespace {

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw arf::IoError("cannot read: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw arf::ParseError(path + ": " + e.what());
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic radiance field toolkit"};
    app.require_subcommand(1);

    // gen-scene
    auto* gen = app.add_subcommand("gen-scene", "render a synthetic scene dataset");
    arf::GenSceneOptions gen_opts;
    std::string gen_params_path;
    std::vector<double> gen_background{1.0, 1.0, 1.0};
    gen->add_option("--out", gen_opts.out_dir, "output directory")->required();
    gen->add_option("--kind", gen_opts.manifest.kind,
                    "isotropic_blob | thin_shell | anisotropic_slats");
    gen->add_option("--width", gen_opts.manifest.width, "image width");
    gen->add_option("--height", gen_opts.manifest.height, "image height");
    gen->add_option("--train-views", gen_opts.manifest.train_views, "training views");
    gen->add_option("--test-views", gen_opts.manifest.test_views, "test views");
    gen->add_option("--fine-n", gen_opts.manifest.fine_n, "reference integrator steps");
    gen->add_option("--seed", gen_opts.manifest.seed, "camera placement seed");
    gen->add_option("--radius", gen_opts.manifest.camera_radius, "camera orbit radius");
    gen->add_option("--angle-x", gen_opts.manifest.camera_angle_x, "horizontal fov (radians)");
    gen->add_option("--near", gen_opts.manifest.t_near, "ray start distance");
    gen->add_option("--far", gen_opts.manifest.t_far, "ray end distance");
    gen->add_option("--background", gen_background, "background color r,g,b")
        ->delimiter(',')
        ->expected(3);
    gen->add_option("--params", gen_params_path, "scene parameter overrides (json file)");

    // train
    auto* train = app.add_subcommand("train", "fit a field to a generated scene");
    std::string train_config_path;
    std::string t_data, t_out, t_precision;
    int t_degree = -1, t_samples = 0, t_iters = 0, t_batch = 0, t_log = -1;
    double t_lambda = -1.0, t_lr = 0.0, t_lr_final = 0.0;
    std::uint64_t t_seed = 0;
    bool t_seed_set = false, t_det = false;
    train->add_option("--config", train_config_path, "json config file");
    train->add_option("--data", t_data, "scene directory");
    train->add_option("--out", t_out, "run output directory");
    train->add_option("--seed", t_seed, "training seed")->each([&](const std::string&) {
        t_seed_set = true;
    });
    train->add_option("--degree", t_degree, "directional basis degree for density and latent");
    train->add_option("--lambda", t_lambda, "anisotropy penalty weight");
    train->add_option("--samples", t_samples, "samples per ray");
    train->add_option("--iters", t_iters, "training iterations");
    train->add_option("--batch", t_batch, "rays per batch");
    train->add_option("--lr", t_lr, "initial learning rate");
    train->add_option("--lr-final", t_lr_final, "final learning rate");
    train->add_option("--precision", t_precision, "float32 | float64");
    train->add_option("--log-every", t_log, "print every N iterations");
    train->add_flag("--deterministic-sampling", t_det, "bin-center ray sampling");

    // render
    auto* render = app.add_subcommand("render", "render a split from a checkpoint");
    arf::RenderRunOptions render_opts;
    bool render_stochastic = false;
    render->add_option("--checkpoint", render_opts.checkpoint_path, "checkpoint.json")
        ->required();
    render->add_option("--data", render_opts.data_dir, "scene directory")->required();
    render->add_option("--out", render_opts.out_dir, "output directory")->required();
    render->add_option("--split", render_opts.split, "train | test");
    render->add_option("--samples", render_opts.n_samples, "samples per ray");
    render->add_option("--seed", render_opts.seed, "sampling seed");
    render->add_flag("--stochastic-sampling", render_stochastic,
                     "jitter samples instead of bin centers");

    // eval
    auto* eval = app.add_subcommand("eval", "render and score a split");
    arf::EvalRunOptions eval_opts;
    bool eval_stochastic = false;
    eval->add_option("--checkpoint", eval_opts.checkpoint_path, "checkpoint.json")->required();
    eval->add_option("--data", eval_opts.data_dir, "scene directory")->required();
    eval->add_option("--out", eval_opts.out_dir, "output directory")->required();
    eval->add_option("--split", eval_opts.split, "train | test");
    eval->add_option("--samples", eval_opts.n_samples, "samples per ray");
    eval->add_option("--seed", eval_opts.seed, "sampling seed");
    eval->add_flag("--stochastic-sampling", eval_stochastic,
                   "jitter samples instead of bin centers");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "train/eval across one axis");
    std::string sweep_config_path, sweep_axis = "lambda";
    std::vector<double> sweep_values;
    int sweep_eval_samples = 64;
    sweep->add_option("--config", sweep_config_path, "base train json config")->required();
    sweep->add_option("--axis", sweep_axis, "lambda | degree");
    sweep->add_option("--values", sweep_values, "comma-separated values")
        ->delimiter(',')
        ->required();
    sweep->add_option("--eval-samples", sweep_eval_samples, "samples per ray for scoring");

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient probe");
    arf::PipelineGradCheckConfig gc;
    gradcheck->add_option("--probes", gc.probes, "parameters to probe");
    gradcheck->add_option("--seed", gc.seed, "probe seed");
    gradcheck->add_option("--rays", gc.n_rays, "rays in the probe batch");
    gradcheck->add_option("--samples", gc.n_samples, "samples per ray");
    gradcheck->add_option("--lambda", gc.lambda, "anisotropy penalty weight");
    gradcheck->add_option("--step", gc.step, "finite-difference step scale");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            gen_opts.manifest.background =
                arf::Vec3(gen_background[0], gen_background[1], gen_background[2]);
            if (!gen_params_path.empty())
                gen_opts.manifest.params = read_json(gen_params_path).get<arf::SceneParams>();
            arf::run_gen_scene(gen_opts);
            std::printf("scene written to %s\n", gen_opts.out_dir.c_str());
        } else if (train->parsed()) {
            arf::TrainRunOptions opts;
            if (!train_config_path.empty())
                opts = arf::train_options_from_json(read_json(train_config_path));
            if (!t_data.empty()) opts.data_dir = t_data;
            if (!t_out.empty()) opts.out_dir = t_out;
            if (!t_precision.empty()) opts.precision = t_precision;
            if (t_seed_set) opts.config.seed = t_seed;
            if (t_degree >= 0) {
                opts.config.field.degree_sigma = t_degree;
                opts.config.field.degree_e = t_degree;
            }
            if (t_lambda >= 0.0) opts.config.lambda = t_lambda;
            if (t_samples > 0) opts.config.samples_per_ray = t_samples;
            if (t_iters > 0) opts.config.iterations = t_iters;
            if (t_batch > 0) opts.config.batch_rays = t_batch;
            if (t_lr > 0.0) opts.config.learning_rate = t_lr;
            if (t_lr_final > 0.0) opts.config.lr_final = t_lr_final;
            if (t_log >= 0) opts.log_every = t_log;
            if (t_det) opts.config.deterministic_sampling = true;
            if (opts.data_dir.empty() || opts.out_dir.empty())
                throw arf::ConfigError("train: --data and --out are required");
            const arf::TrainRunSummary s = arf::run_train(opts);
            std::printf("%s after %d iterations (%.1fs): total %.6g, psnr %.2f\n",
                        s.diverged ? "DIVERGED" : "finished", s.iterations_run, s.seconds,
                        s.final_loss.total, s.final_loss.psnr);
            std::printf("checkpoint: %s\n", s.checkpoint_path.c_str());
        } else if (render->parsed()) {
            render_opts.deterministic = !render_stochastic;
            arf::run_render(render_opts);
            std::printf("renders written to %s\n", render_opts.out_dir.c_str());
        } else if (eval->parsed()) {
            eval_opts.deterministic = !eval_stochastic;
            const arf::EvalReport rep = arf::run_eval(eval_opts);
            std::printf("mean psnr %.3f  mean ssim %.4f  mean avg_err %.5f\n", rep.mean_psnr,
                        rep.mean_ssim, rep.mean_avg);
        } else if (sweep->parsed()) {
            arf::SweepRunOptions opts;
            opts.base = arf::train_options_from_json(read_json(sweep_config_path));
            opts.axis = sweep_axis;
            opts.values = sweep_values;
            opts.eval_samples = sweep_eval_samples;
            if (opts.base.data_dir.empty() || opts.base.out_dir.empty())
                throw arf::ConfigError("sweep: config must set data and out");
            const auto rows = arf::run_sweep(opts);
            for (const auto& row : rows)
                std::printf("%s=%g  psnr %.3f  ssim %.4f  avg_err %.5f%s\n", opts.axis.c_str(),
                            row.value, row.mean_psnr, row.mean_ssim, row.mean_avg,
                            row.diverged ? "  [diverged]" : "");
        } else if (gradcheck->parsed()) {
            const arf::GradCheckReport rep = arf::run_gradcheck(gc);
            std::printf("checked %d parameters: max rel error %.3g (block %s index %zu)\n",
                        rep.checked, rep.max_rel_error, rep.worst_block.c_str(),
                        rep.worst_index);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

#include "arf/runs.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "arf/checkpoint.hpp"
#include "arf/render_image.hpp"

namespace arf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

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

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string git_describe() {
    std::FILE* pipe = popen("git describe --always --dirty 2>/dev/null", "r");
    if (!pipe) return "unknown";
    char buf[128] = {0};
    std::string out;
    while (std::fgets(buf, sizeof buf, pipe)) out += buf;
    pclose(pipe);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
    return out.empty() ? "unknown" : out;
}

void run_gen_scene(const GenSceneOptions& opts) {
    const SceneManifest& m = opts.manifest;
    const AnalyticScene scene = make_scene(scene_kind_from_string(m.kind), m.params);
    fs::create_directories(opts.out_dir);

    const auto train_cams = make_orbit_cameras(m.train_views, m.camera_radius,
                                               m.camera_angle_x, m.width, m.height, m.seed);
    const auto test_cams =
        make_orbit_cameras(m.test_views, m.camera_radius, m.camera_angle_x, m.width, m.height,
                           m.seed + 1);
    const Dataset train = render_reference_dataset(scene, train_cams, m.fine_n, m.t_near,
                                                   m.t_far, m.camera_angle_x, m.background);
    const Dataset test = render_reference_dataset(scene, test_cams, m.fine_n, m.t_near,
                                                  m.t_far, m.camera_angle_x, m.background);
    save_dataset(opts.out_dir, "train", train);
    save_dataset(opts.out_dir, "test", test);
    write_scene_manifest(opts.out_dir, m);
}

namespace {

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
    return {{"lambda", cfg.lambda},
            {"learning_rate", cfg.learning_rate},
            {"lr_final", cfg.lr_final},
            {"batch_rays", cfg.batch_rays},
            {"samples_per_ray", cfg.samples_per_ray},
            {"iterations", cfg.iterations},
            {"seed", cfg.seed},
            {"background", {cfg.background.x, cfg.background.y, cfg.background.z}},
            {"deterministic_sampling", cfg.deterministic_sampling}};
}

void train_config_from_json(const json& j, TrainConfig& cfg) {
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.lr_final = j.value("lr_final", cfg.lr_final);
    cfg.batch_rays = j.value("batch_rays", cfg.batch_rays);
    cfg.samples_per_ray = j.value("samples_per_ray", cfg.samples_per_ray);
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("background")) {
        const auto& b = j["background"];
        cfg.background =
            Vec3(b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>());
    }
    cfg.deterministic_sampling = j.value("deterministic_sampling", cfg.deterministic_sampling);
}

template <typename T>
TrainRunSummary run_train_impl(const TrainRunOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const SceneManifest manifest = read_scene_manifest(opts.data_dir);
    TrainConfig cfg = opts.config;
    cfg.background = manifest.background;
    const Dataset data = load_dataset(opts.data_dir, "train", manifest.background,
                                      manifest.t_near, manifest.t_far);
    const TrainRays rays = dataset_to_rays(data);

    Field<T> field = Field<T>::create(cfg.field, cfg.seed);
    std::function<void(int, const LossTerms&)> logger;
    if (opts.log_every > 0) {
        const int every = opts.log_every;
        const int last = cfg.iterations - 1;
        logger = [every, last](int it, const LossTerms& row) {
            if (it % every == 0 || it == last)
                std::printf("iter %6d  recon %.6g  aniso %.6g  total %.6g  psnr %.2f\n", it,
                            row.recon, row.aniso, row.total, row.psnr);
        };
    }
    const TrainResult result = train(cfg, rays, field, logger);

    fs::create_directories(opts.out_dir);
    TrainRunSummary summary;
    summary.checkpoint_path = (fs::path(opts.out_dir) / "checkpoint.json").string();
    summary.trace_path = (fs::path(opts.out_dir) / "loss_trace.csv").string();
    save_checkpoint(summary.checkpoint_path, field);
    write_text_file(summary.trace_path, trace_to_csv(result.trace));

    summary.diverged = result.diverged;
    summary.iterations_run = int(result.trace.size());
    if (!result.trace.empty()) summary.final_loss = result.trace.back();
    summary.seconds = seconds_since(t0);

    json rj;
    rj["kind"] = "train";
    rj["data"] = opts.data_dir;
    rj["precision"] = opts.precision;
    rj["field"] = field_config_to_json(cfg.field);
    rj["train"] = train_config_to_json(cfg);
    rj["git"] = git_describe();
    rj["duration_seconds"] = summary.seconds;
    rj["iterations_run"] = summary.iterations_run;
    rj["diverged"] = result.diverged;
    if (!result.note.empty()) rj["note"] = result.note;
    write_text_file((fs::path(opts.out_dir) / "run_manifest.json").string(), rj.dump(2) + "\n");
    return summary;
}

template <typename T>
std::vector<Image> render_views(const Field<T>& field, const Dataset& data,
                                const RenderRunOptions& opts, RenderImageStats* stats) {
    std::vector<Image> out;
    out.reserve(data.views.size());
    for (std::size_t i = 0; i < data.views.size(); ++i)
        out.push_back(render_field_image(field, data.views[i].camera, opts.n_samples,
                                         data.t_near, data.t_far, data.background,
                                         opts.deterministic, opts.seed + i, 4096, stats));
    return out;
}

struct LoadedCheckpoint {
    std::string precision;
    json j;
};

LoadedCheckpoint load_checkpoint_json(const std::string& path) {
    LoadedCheckpoint lc;
    lc.j = load_json_file(path);
    lc.precision = lc.j.value("precision", "float32");
    if (lc.precision != "float32" && lc.precision != "float64")
        throw ParseError("checkpoint: unknown precision " + lc.precision);
    return lc;
}

template <typename T>
std::vector<Image> render_split_with(const json& ckpt, const Dataset& data,
                                     const RenderRunOptions& opts, RenderImageStats* stats) {
    const Field<T> field = checkpoint_from_json<T>(ckpt);
    return render_views(field, data, opts, stats);
}

std::vector<Image> render_split(const RenderRunOptions& opts, Dataset& data,
                                RenderImageStats* stats) {
    const SceneManifest manifest = read_scene_manifest(opts.data_dir);
    data = load_dataset(opts.data_dir, opts.split, manifest.background, manifest.t_near,
                        manifest.t_far);
    const LoadedCheckpoint lc = load_checkpoint_json(opts.checkpoint_path);
    return lc.precision == "float64" ? render_split_with<double>(lc.j, data, opts, stats)
                                     : render_split_with<float>(lc.j, data, opts, stats);
}

}  // namespace

TrainRunSummary run_train(const TrainRunOptions& opts) {
    if (opts.precision == "float32") return run_train_impl<float>(opts);
    if (opts.precision == "float64") return run_train_impl<double>(opts);
    throw ConfigError("train: precision must be float32 or float64");
}

void run_render(const RenderRunOptions& opts) {
    Dataset data;
    RenderImageStats stats;
    const std::vector<Image> images = render_split(opts, data, &stats);
    fs::create_directories(opts.out_dir);
    for (std::size_t i = 0; i < images.size(); ++i)
        write_png_rgb8((fs::path(opts.out_dir) / (data.views[i].name + ".png")).string(),
                       images[i]);
    json rj;
    rj["kind"] = "render";
    rj["checkpoint"] = opts.checkpoint_path;
    rj["data"] = opts.data_dir;
    rj["split"] = opts.split;
    rj["n_samples"] = opts.n_samples;
    rj["deterministic"] = opts.deterministic;
    rj["seed"] = opts.seed;
    rj["git"] = git_describe();
    rj["rays"] = stats.rays;
    rj["max_conservation_error"] = stats.max_conservation_error;
    write_text_file((fs::path(opts.out_dir) / "render_manifest.json").string(),
                    rj.dump(2) + "\n");
}

EvalReport run_eval(const EvalRunOptions& opts) {
    Dataset data;
    RenderImageStats stats;
    const std::vector<Image> images = render_split(opts, data, &stats);
    std::vector<std::string> names;
    std::vector<Image> refs;
    for (const auto& view : data.views) {
        names.push_back(view.name);
        refs.push_back(view.image);
    }
    const EvalReport report = evaluate_images(names, images, refs);
    fs::create_directories(opts.out_dir);
    for (std::size_t i = 0; i < images.size(); ++i)
        write_png_rgb8((fs::path(opts.out_dir) / (data.views[i].name + ".png")).string(),
                       images[i]);
    write_text_file((fs::path(opts.out_dir) / "eval.csv").string(),
                    eval_report_to_csv(report));
    json rj;
    rj["kind"] = "eval";
    rj["checkpoint"] = opts.checkpoint_path;
    rj["data"] = opts.data_dir;
    rj["split"] = opts.split;
    rj["n_samples"] = opts.n_samples;
    rj["deterministic"] = opts.deterministic;
    rj["seed"] = opts.seed;
    rj["git"] = git_describe();
    rj["mean_psnr"] = report.mean_psnr;
    rj["mean_ssim"] = report.mean_ssim;
    rj["mean_avg_err"] = report.mean_avg;
    write_text_file((fs::path(opts.out_dir) / "eval_manifest.json").string(),
                    rj.dump(2) + "\n");
    return report;
}

std::vector<SweepRow> run_sweep(const SweepRunOptions& opts) {
    if (opts.values.empty()) throw ConfigError("sweep: no values given");
    if (opts.axis != "lambda" && opts.axis != "degree")
        throw ConfigError("sweep: axis must be lambda or degree");
    std::vector<SweepRow> rows;
    std::string csv = "axis,value,mean_psnr,mean_ssim,mean_avg_err,diverged\n";
    for (double value : opts.values) {
        TrainRunOptions t = opts.base;
        if (opts.axis == "lambda") {
            t.config.lambda = value;
        } else {
            t.config.field.degree_sigma = int(value);
            t.config.field.degree_e = int(value);
        }
        char tag[64];
        std::snprintf(tag, sizeof tag, "%s_%g", opts.axis.c_str(), value);
        t.out_dir = (fs::path(opts.base.out_dir) / tag).string();
        const TrainRunSummary summary = run_train(t);

        SweepRow row;
        row.value = value;
        row.diverged = summary.diverged;
        if (!summary.diverged) {
            EvalRunOptions e;
            e.checkpoint_path = summary.checkpoint_path;
            e.data_dir = t.data_dir;
            e.split = "test";
            e.out_dir = (fs::path(t.out_dir) / "eval").string();
            e.n_samples = opts.eval_samples;
            e.deterministic = true;
            const EvalReport rep = run_eval(e);
            row.mean_psnr = rep.mean_psnr;
            row.mean_ssim = rep.mean_ssim;
            row.mean_avg = rep.mean_avg;
        }
        rows.push_back(row);
        csv += opts.axis + ',' + format_shortest(value) + ',' + format_shortest(row.mean_psnr) +
               ',' + format_shortest(row.mean_ssim) + ',' + format_shortest(row.mean_avg) +
               ',' + (row.diverged ? "true" : "false") + '\n';
    }
    fs::create_directories(opts.base.out_dir);
    write_text_file((fs::path(opts.base.out_dir) / "sweep.csv").string(), csv);
    return rows;
}

GradCheckReport run_gradcheck(const PipelineGradCheckConfig& cfg) {
    return pipeline_gradient_check(cfg);
}

TrainRunOptions train_options_from_json(const json& j) {
    TrainRunOptions opts;
    try {
        opts.data_dir = j.value("data", opts.data_dir);
        opts.out_dir = j.value("out", opts.out_dir);
        opts.precision = j.value("precision", opts.precision);
        opts.log_every = j.value("log_every", opts.log_every);
        if (j.contains("field")) opts.config.field = field_config_from_json(j["field"]);
        if (j.contains("train")) train_config_from_json(j["train"], opts.config);
    } catch (const json::exception& e) {
        throw ParseError(std::string("train config: ") + e.what());
    }
    return opts;
}

json train_options_to_json(const TrainRunOptions& opts) {
    return {{"data", opts.data_dir},
            {"out", opts.out_dir},
            {"precision", opts.precision},
            {"log_every", opts.log_every},
            {"field", field_config_to_json(opts.config.field)},
            {"train", train_config_to_json(opts.config)}};
}

}  // namespace arf

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "arf/dataset.hpp"
#include "arf/gradcheck.hpp"
#include "arf/metrics.hpp"
#include "arf/train.hpp"

namespace arf {

// Orchestration entry points shared by the command-line tool and the test
// suites. Each run writes its outputs plus a manifest into its out_dir.

struct GenSceneOptions {
    std::string out_dir;
    SceneManifest manifest;
};

void run_gen_scene(const GenSceneOptions& opts);

struct TrainRunOptions {
    std::string data_dir;
    std::string out_dir;
    TrainConfig config;
    std::string precision = "float32";  // float32 | float64
    int log_every = 0;                  // 0 keeps the run silent
};

struct TrainRunSummary {
    LossTerms final_loss;
    bool diverged = false;
    int iterations_run = 0;
    double seconds = 0.0;
    std::string checkpoint_path;
    std::string trace_path;
};

TrainRunSummary run_train(const TrainRunOptions& opts);

struct RenderRunOptions {
    std::string checkpoint_path;
    std::string data_dir;
    std::string split = "test";
    std::string out_dir;
    int n_samples = 64;
    bool deterministic = true;
    std::uint64_t seed = 0;
};

void run_render(const RenderRunOptions& opts);

using EvalRunOptions = RenderRunOptions;

// Renders the split and scores it against the reference images; writes
// eval.csv and the rendered images.
EvalReport run_eval(const EvalRunOptions& opts);

struct SweepRow {
    double value = 0.0;
    double mean_psnr = 0.0, mean_ssim = 0.0, mean_avg = 0.0;
    bool diverged = false;
};

struct SweepRunOptions {
    TrainRunOptions base;
    std::string axis = "lambda";  // lambda | degree
    std::vector<double> values;
    int eval_samples = 64;
};

std::vector<SweepRow> run_sweep(const SweepRunOptions& opts);

GradCheckReport run_gradcheck(const PipelineGradCheckConfig& cfg);

// Config-file schema: {"data": ..., "out": ..., "precision": ...,
// "field": {...}, "train": {...}}. Missing keys keep their defaults.
TrainRunOptions train_options_from_json(const nlohmann::json& j);
nlohmann::json train_options_to_json(const TrainRunOptions& opts);

std::string git_describe();

}  // namespace arf

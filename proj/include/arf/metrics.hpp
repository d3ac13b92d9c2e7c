#pragma once

#include <string>
#include <vector>

#include "arf/image.hpp"

namespace arf {

// Mean squared error over all pixels and channels.
double image_mse(const Image& a, const Image& b);

// PSNR in dB for [0, 1] images, capped at 99.
double psnr(const Image& a, const Image& b);

// Single-scale SSIM on the channel-mean grayscale image, 11x11 Gaussian
// window (sigma 1.5), valid-region convolution. Images must be at least
// 11 pixels on each side.
double ssim(const Image& a, const Image& b);

// Combined image-error score: sqrt(10^(-psnr/10) * sqrt(1 - ssim)).
// Lower is better.
double avg_err(double psnr_db, double ssim_value);

struct EvalRow {
    std::string name;
    double psnr = 0.0, ssim = 0.0, avg = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    double mean_psnr = 0.0, mean_ssim = 0.0, mean_avg = 0.0;
};

EvalReport evaluate_images(const std::vector<std::string>& names,
                           const std::vector<Image>& renders,
                           const std::vector<Image>& references);

std::string eval_report_to_csv(const EvalReport& report);

}  // namespace arf

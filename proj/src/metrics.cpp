#include "arf/metrics.hpp"

#include <cmath>

#include "arf/errors.hpp"
#include "arf/losses.hpp"
#include "arf/train.hpp"

namespace arf {

namespace {

void check_same_shape(const Image& a, const Image& b, const char* what) {
    if (a.width != b.width || a.height != b.height || a.width == 0)
        throw UsageError(std::string(what) + ": image shapes differ or are empty");
}

constexpr int kWin = 11;

// 11-tap Gaussian, sigma 1.5, normalized to sum 1.
std::vector<double> gaussian_window() {
    std::vector<double> w(kWin);
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double d = double(i - kWin / 2);
        w[std::size_t(i)] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
        sum += w[std::size_t(i)];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Separable valid-region filter: output is (w - 10) x (h - 10).
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h,
                                 const std::vector<double>& win, int& ow, int& oh) {
    ow = w - kWin + 1;
    oh = h - kWin + 1;
    std::vector<double> rows(std::size_t(ow) * std::size_t(h), 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k)
                acc += win[std::size_t(k)] * img[std::size_t(y) * std::size_t(w) + std::size_t(x + k)];
            rows[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = acc;
        }
    std::vector<double> out(std::size_t(ow) * std::size_t(oh), 0.0);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k)
                acc += win[std::size_t(k)] *
                       rows[std::size_t(y + k) * std::size_t(ow) + std::size_t(x)];
            out[std::size_t(y) * std::size_t(ow) + std::size_t(x)] = acc;
        }
    return out;
}

std::vector<double> to_gray(const Image& img) {
    std::vector<double> g(img.pixel_count());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            g[std::size_t(y) * std::size_t(img.width) + std::size_t(x)] =
                (double(img.at(x, y, 0)) + double(img.at(x, y, 1)) + double(img.at(x, y, 2))) /
                3.0;
    return g;
}

}  // namespace

double image_mse(const Image& a, const Image& b) {
    check_same_shape(a, b, "image_mse");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rgb.size(); ++i) {
        const double d = double(a.rgb[i]) - double(b.rgb[i]);
        acc += d * d;
    }
    return acc / double(a.rgb.size());
}

double psnr(const Image& a, const Image& b) { return psnr_from_mse(image_mse(a, b)); }

double ssim(const Image& a, const Image& b) {
    check_same_shape(a, b, "ssim");
    if (a.width < kWin || a.height < kWin)
        throw InputError("ssim: images must be at least 11x11");
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const std::vector<double> win = gaussian_window();
    const std::vector<double> ga = to_gray(a), gb = to_gray(b);
    std::vector<double> ga2(ga.size()), gb2(ga.size()), gab(ga.size());
    for (std::size_t i = 0; i < ga.size(); ++i) {
        ga2[i] = ga[i] * ga[i];
        gb2[i] = gb[i] * gb[i];
        gab[i] = ga[i] * gb[i];
    }
    int ow = 0, oh = 0;
    const auto mu_a = filter_valid(ga, a.width, a.height, win, ow, oh);
    const auto mu_b = filter_valid(gb, a.width, a.height, win, ow, oh);
    const auto e_a2 = filter_valid(ga2, a.width, a.height, win, ow, oh);
    const auto e_b2 = filter_valid(gb2, a.width, a.height, win, ow, oh);
    const auto e_ab = filter_valid(gab, a.width, a.height, win, ow, oh);
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double va = e_a2[i] - mu_a[i] * mu_a[i];
        const double vb = e_b2[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        acc += ((2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2)) /
               ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    return acc / double(mu_a.size());
}

double avg_err(double psnr_db, double ssim_value) {
    const double mse_term = std::pow(10.0, -psnr_db / 10.0);
    const double dssim = ssim_value > 1.0 ? 0.0 : 1.0 - ssim_value;
    return std::sqrt(mse_term * std::sqrt(dssim));
}

EvalReport evaluate_images(const std::vector<std::string>& names,
                           const std::vector<Image>& renders,
                           const std::vector<Image>& references) {
    if (renders.size() != references.size() || names.size() != renders.size() ||
        renders.empty())
        throw UsageError("evaluate_images: list sizes differ or are empty");
    EvalReport rep;
    for (std::size_t i = 0; i < renders.size(); ++i) {
        EvalRow row;
        row.name = names[i];
        row.psnr = psnr(renders[i], references[i]);
        row.ssim = ssim(renders[i], references[i]);
        row.avg = avg_err(row.psnr, row.ssim);
        rep.mean_psnr += row.psnr;
        rep.mean_ssim += row.ssim;
        rep.mean_avg += row.avg;
        rep.rows.push_back(std::move(row));
    }
    const double n = double(rep.rows.size());
    rep.mean_psnr /= n;
    rep.mean_ssim /= n;
    rep.mean_avg /= n;
    return rep;
}

std::string eval_report_to_csv(const EvalReport& report) {
    std::string s = "name,psnr,ssim,avg_err\n";
    for (const auto& row : report.rows) {
        s += row.name;
        s += ',';
        s += format_shortest(row.psnr);
        s += ',';
        s += format_shortest(row.ssim);
        s += ',';
        s += format_shortest(row.avg);
        s += '\n';
    }
    s += "mean," + format_shortest(report.mean_psnr) + ',' + format_shortest(report.mean_ssim) +
         ',' + format_shortest(report.mean_avg) + '\n';
    return s;
}

}  // namespace arf

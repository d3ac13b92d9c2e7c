#pragma once

#include <cmath>
#include <span>

#include "arf/errors.hpp"
#include "arf/matrix.hpp"
#include "arf/vec.hpp"

namespace arf {

// Mean over rays of the squared RGB error (summed across channels).
inline double recon_loss(std::span<const Vec3> pred, std::span<const Vec3> gt) {
    if (pred.size() != gt.size() || pred.empty())
        throw UsageError("recon_loss: prediction/target size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const Vec3 d = pred[i] - gt[i];
        acc += d.dot(d);
    }
    return acc / double(pred.size());
}

// Mean over samples of sigma_aniso^2 + |e_aniso|^2.
template <typename T>
double anisotropy_penalty(std::span<const T> sigma_aniso, const Matrix<T>& e_aniso) {
    const std::size_t n = sigma_aniso.size();
    if (e_aniso.rows() != n || n == 0)
        throw UsageError("anisotropy_penalty: sample count mismatch");
    double acc = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        double term = double(sigma_aniso[s]) * double(sigma_aniso[s]);
        for (std::size_t k = 0; k < e_aniso.cols(); ++k) {
            const double v = double(e_aniso(s, k));
            term += v * v;
        }
        acc += term;
    }
    return acc / double(n);
}

inline double total_loss(double recon, double aniso, double lambda) {
    return recon + lambda * aniso;
}

inline constexpr double kPsnrCap = 99.0;

// PSNR for signals in [0, 1]; exact matches report the cap.
inline double psnr_from_mse(double mse) {
    if (mse < 0.0) throw UsageError("psnr_from_mse: negative mse");
    if (mse == 0.0) return kPsnrCap;
    const double v = 10.0 * std::log10(1.0 / mse);
    return v > kPsnrCap ? kPsnrCap : v;
}

struct LossTerms {
    double recon = 0.0;
    double aniso = 0.0;
    double total = 0.0;
    double psnr = 0.0;
};

}  // namespace arf

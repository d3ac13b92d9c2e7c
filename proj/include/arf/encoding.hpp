#pragma once

#include <cmath>

#include "arf/matrix.hpp"
#include "arf/vec.hpp"

namespace arf {

// Sinusoidal input encoding at frequencies 2^0 .. 2^(F-1).
// Layout per sample: [x y z] (when include_input), then per frequency a
// sin block and a cos block over the three components.
struct PositionalEncodingConfig {
    int num_frequencies = 10;
    bool include_input = true;

    int width() const { return 3 * ((include_input ? 1 : 0) + 2 * num_frequencies); }
};

template <typename T>
void encode_into(const Vec3& v, const PositionalEncodingConfig& cfg, T* out) {
    int j = 0;
    if (cfg.include_input) {
        out[j++] = T(v.x);
        out[j++] = T(v.y);
        out[j++] = T(v.z);
    }
    double freq = 1.0;
    for (int f = 0; f < cfg.num_frequencies; ++f) {
        const T sx = std::sin(T(freq * v.x)), sy = std::sin(T(freq * v.y)),
                sz = std::sin(T(freq * v.z));
        const T cx = std::cos(T(freq * v.x)), cy = std::cos(T(freq * v.y)),
                cz = std::cos(T(freq * v.z));
        out[j++] = sx;
        out[j++] = sy;
        out[j++] = sz;
        out[j++] = cx;
        out[j++] = cy;
        out[j++] = cz;
        freq *= 2.0;
    }
}

template <typename T>
Matrix<T> encode_batch(const std::vector<Vec3>& points, const PositionalEncodingConfig& cfg) {
    const std::size_t s_count = points.size();
    const int width = cfg.width();
    Matrix<T> enc(s_count, std::size_t(width));
    std::vector<T> row(static_cast<std::size_t>(width));
    for (std::size_t s = 0; s < s_count; ++s) {
        encode_into(points[s], cfg, row.data());
        for (int c = 0; c < width; ++c) enc(s, std::size_t(c)) = row[std::size_t(c)];
    }
    return enc;
}

}  // namespace arf

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "arf/errors.hpp"
#include "arf/vec.hpp"

namespace arf {

// Linear-light RGB image, row-major, three floats per pixel.
struct Image {
    int width = 0, height = 0;
    std::vector<float> rgb;

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgb(std::size_t(w) * std::size_t(h) * 3, 0.0f) {
        if (w <= 0 || h <= 0) throw ConfigError("image: dimensions must be positive");
    }

    std::size_t index(int x, int y, int c) const {
        return (std::size_t(y) * std::size_t(width) + std::size_t(x)) * 3 + std::size_t(c);
    }
    float at(int x, int y, int c) const { return rgb[index(x, y, c)]; }
    float& at(int x, int y, int c) { return rgb[index(x, y, c)]; }

    Vec3 pixel(int x, int y) const {
        return {double(at(x, y, 0)), double(at(x, y, 1)), double(at(x, y, 2))};
    }
    void set_pixel(int x, int y, const Vec3& v) {
        at(x, y, 0) = float(v.x);
        at(x, y, 1) = float(v.y);
        at(x, y, 2) = float(v.z);
    }

    std::size_t pixel_count() const { return std::size_t(width) * std::size_t(height); }
};

// Piecewise sRGB transfer.
inline double srgb_encode(double linear) {
    const double v = linear < 0.0 ? 0.0 : (linear > 1.0 ? 1.0 : linear);
    return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

inline double srgb_decode(double encoded) {
    const double v = encoded < 0.0 ? 0.0 : (encoded > 1.0 ? 1.0 : encoded);
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

inline std::uint8_t linear_to_srgb8(double linear) {
    return std::uint8_t(std::lround(255.0 * srgb_encode(linear)));
}

double srgb8_to_linear(std::uint8_t v);  // table-driven

// 8-bit sRGB PNG io. Reading composites any alpha over the given background
// in linear light.
void write_png_rgb8(const std::string& path, const Image& image);
Image read_png_to_linear(const std::string& path, const Vec3& background);

}  // namespace arf

#include "arf/image.hpp"

#include <png.h>

#include <array>
#include <cstdio>
#include <memory>

namespace arf {

double srgb8_to_linear(std::uint8_t v) {
    static const std::array<double, 256> table = [] {
        std::array<double, 256> t{};
        for (int i = 0; i < 256; ++i) t[std::size_t(i)] = srgb_decode(double(i) / 255.0);
        return t;
    }();
    return table[v];
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png_rgb8(const std::string& path, const Image& image) {
    if (image.width <= 0 || image.height <= 0)
        throw UsageError("write_png_rgb8: empty image");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    std::vector<std::uint8_t> bytes(std::size_t(image.width) * std::size_t(image.height) * 3);
    std::vector<png_bytep> rows(std::size_t(image.height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png write failed: " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, png_uint_32(image.width), png_uint_32(image.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x)
            for (int c = 0; c < 3; ++c)
                bytes[(std::size_t(y) * std::size_t(image.width) + std::size_t(x)) * 3 +
                      std::size_t(c)] = linear_to_srgb8(double(image.at(x, y, c)));
        rows[std::size_t(y)] = bytes.data() + std::size_t(y) * std::size_t(image.width) * 3;
    }
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image read_png_to_linear(const std::string& path, const Vec3& background) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open for reading: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    std::vector<std::uint8_t> bytes;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError("png read failed: " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    // Normalize to 8-bit RGBA so one decode path handles every color type.
    png_set_expand(png);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    const png_byte color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_set_add_alpha(png, 0xFF, PNG_FILLER_AFTER);
    png_read_update_info(png, info);

    const int w = int(png_get_image_width(png, info));
    const int h = int(png_get_image_height(png, info));
    bytes.resize(std::size_t(w) * std::size_t(h) * 4);
    rows.resize(std::size_t(h));
    for (int y = 0; y < h; ++y)
        rows[std::size_t(y)] = bytes.data() + std::size_t(y) * std::size_t(w) * 4;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* px =
                bytes.data() + (std::size_t(y) * std::size_t(w) + std::size_t(x)) * 4;
            const double a = double(px[3]) / 255.0;
            const Vec3 rgb{srgb8_to_linear(px[0]), srgb8_to_linear(px[1]),
                           srgb8_to_linear(px[2])};
            img.set_pixel(x, y, rgb * a + background * (1.0 - a));
        }
    }
    return img;
}

}  // namespace arf

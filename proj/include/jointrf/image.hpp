#pragma once

#include <png.h>

#include <cstdio>
#include <string>
#include <vector>

#include "jointrf/core.hpp"

namespace jointrf {

/// 8-bit RGB image, row-major. Linear-to-display conversion everywhere in
/// this project is plain clamping to [0,1]; no gamma is applied.
struct Image {
    int width = 0, height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t& at(int x, int y, int c) {
        return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + c];
    }

    static std::uint8_t to_byte(Real v) {
        v = std::min<Real>(std::max<Real>(v, 0), 1);
        return static_cast<std::uint8_t>(round_half_away(v * 255));
    }

    void set_pixel(int x, int y, const std::array<Real, 3>& c) {
        for (int k = 0; k < 3; ++k) at(x, y, k) = to_byte(c[k]);
    }
};

inline void write_png(const Image& img, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("libpng failure writing " + path);
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.rgb.data() +
                                                 static_cast<std::size_t>(y) * img.width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

inline Image read_png(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info || setjmp(png_jmpbuf(png))) {
        if (png) png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw std::runtime_error("libpng failure reading " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    // Normalize anything reasonable down to 8-bit RGB.
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    Image img(static_cast<int>(png_get_image_width(png, info)),
              static_cast<int>(png_get_image_height(png, info)));
    for (int y = 0; y < img.height; ++y)
        png_read_row(png, img.rgb.data() + static_cast<std::size_t>(y) * img.width * 3, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

/// Binary PPM (P6), lossless byte-for-byte.
inline void write_ppm(const Image& img, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot write " + path);
    std::fprintf(fp, "P6\n%d %d\n255\n", img.width, img.height);
    std::fwrite(img.rgb.data(), 1, img.rgb.size(), fp);
    std::fclose(fp);
}

inline Image read_ppm(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("cannot open " + path);
    int w = 0, h = 0, maxv = 0;
    if (std::fscanf(fp, "P6 %d %d %d", &w, &h, &maxv) != 3 || maxv != 255) {
        std::fclose(fp);
        throw std::runtime_error("unsupported PPM: " + path);
    }
    std::fgetc(fp);  // single whitespace after header
    Image img(w, h);
    if (std::fread(img.rgb.data(), 1, img.rgb.size(), fp) != img.rgb.size()) {
        std::fclose(fp);
        throw std::runtime_error("truncated PPM: " + path);
    }
    std::fclose(fp);
    return img;
}

}  // namespace jointrf

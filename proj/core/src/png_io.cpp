#include <png.h>

#include <algorithm>
#include <cstdio>
#include <vector>

#include "deer/raster_io.hpp"

namespace deer {

void write_png_gray(const std::string& path, const Image& img, double lo, double hi) {
    check(lo < hi, "png: window must satisfy lo < hi, got [", lo, ", ", hi, "]");
    FILE* fp = std::fopen(path.c_str(), "wb");
    require(fp != nullptr, "png: cannot write '", path, "'");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("png: libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw std::runtime_error("png: libpng write failed for '" + path + "'");
    }

    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.n), static_cast<png_uint_32>(img.n), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(static_cast<size_t>(img.n));
    const double scale = 255.0 / (hi - lo);
    for (int y = 0; y < img.n; ++y) {
        for (int x = 0; x < img.n; ++x) {
            const double v = (static_cast<double>(img.at(y, x)) - lo) * scale;
            row[static_cast<size_t>(x)] =
                static_cast<png_byte>(std::clamp(v, 0.0, 255.0) + 0.5);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace deer

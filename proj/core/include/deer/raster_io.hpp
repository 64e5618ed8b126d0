#pragma once

#include <map>
#include <string>

#include "deer/image.hpp"

namespace deer {

using MetaMap = std::map<std::string, std::string>;

/// Raster files carry a textual header (magic, kind, dtype, shape and
/// geometry metadata) followed by the raw little-endian f32 payload.
/// Round-trips are bitwise.
void save_image(const std::string& path, const Image& img, const MetaMap& meta = {});
Image load_image(const std::string& path, MetaMap* meta = nullptr);

void save_sinogram(const std::string& path, const Sinogram& sino, const MetaMap& meta = {});
Sinogram load_sinogram(const std::string& path, MetaMap* meta = nullptr);

/// 8-bit grayscale PNG windowed to [lo, hi].
void write_png_gray(const std::string& path, const Image& img, double lo, double hi);

}  // namespace deer

#include "deer/raster_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace deer {

namespace {

constexpr const char* kMagic = "DEER-RASTER 1";

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void ensure_little_endian() {
    const uint32_t probe = 1;
    unsigned char b;
    std::memcpy(&b, &probe, 1);
    require(b == 1, "raster: f32le payloads require a little-endian host");
}

void write_payload(std::ostream& os, const std::vector<float>& data) {
    ensure_little_endian();
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(float)));
}

struct Header {
    std::string kind;
    int64_t rows = 0, cols = 0;
    double pixel_size = 1.0, det_spacing = 1.0;
    std::vector<double> angles;
    MetaMap meta;
};

Header read_header(std::istream& is, const std::string& path) {
    Header h;
    std::string line;
    require(std::getline(is, line) && line == kMagic, "raster: '", path,
            "' has bad magic (expected '", kMagic, "')");
    bool saw_end = false;
    while (std::getline(is, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "kind") {
            ls >> h.kind;
        } else if (key == "dtype") {
            std::string dt;
            ls >> dt;
            require(dt == "f32le", "raster: '", path, "' has unsupported dtype '", dt, "'");
        } else if (key == "shape") {
            ls >> h.rows >> h.cols;
        } else if (key == "pixel_size") {
            ls >> h.pixel_size;
        } else if (key == "det_spacing") {
            ls >> h.det_spacing;
        } else if (key == "angles") {
            size_t count = 0;
            ls >> count;
            h.angles.resize(count);
            for (size_t i = 0; i < count; ++i) ls >> h.angles[i];
            require(!ls.fail(), "raster: '", path, "' has truncated angle list");
        } else if (key == "meta") {
            std::string k;
            ls >> k;
            std::string v;
            std::getline(ls, v);
            if (!v.empty() && v[0] == ' ') v.erase(0, 1);
            h.meta[k] = v;
        } else {
            require(false, "raster: '", path, "' has unknown header field '", key, "'");
        }
        require(!ls.fail(), "raster: '", path, "' has malformed header line '", line, "'");
    }
    require(saw_end, "raster: '", path, "' header not terminated by 'end'");
    require(h.rows > 0 && h.cols > 0, "raster: '", path, "' missing shape");
    return h;
}

std::vector<float> read_payload(std::istream& is, const std::string& path, int64_t count) {
    ensure_little_endian();
    std::vector<float> data(static_cast<size_t>(count));
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
    require(is.gcount() == static_cast<std::streamsize>(data.size() * sizeof(float)),
            "raster: '", path, "' payload shorter than header shape");
    is.peek();
    require(is.eof(), "raster: '", path, "' has trailing bytes after payload");
    return data;
}

}  // namespace

void save_image(const std::string& path, const Image& img, const MetaMap& meta) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "raster: cannot write '", path, "'");
    os << kMagic << "\n";
    os << "kind image\n";
    os << "dtype f32le\n";
    os << "shape " << img.n << " " << img.n << "\n";
    os << "pixel_size " << fmt17(img.pixel_size) << "\n";
    for (const auto& [k, v] : meta) os << "meta " << k << " " << v << "\n";
    os << "end\n";
    write_payload(os, img.data);
    require(os.good(), "raster: short write to '", path, "'");
}

Image load_image(const std::string& path, MetaMap* meta) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "raster: cannot open '", path, "'");
    Header h = read_header(is, path);
    require(h.kind == "image", "raster: '", path, "' is a ", h.kind, ", expected image");
    require(h.rows == h.cols, "raster: image '", path, "' is not square");
    Image img(static_cast<int>(h.rows), h.pixel_size);
    img.data = read_payload(is, path, h.rows * h.cols);
    if (meta) *meta = h.meta;
    return img;
}

void save_sinogram(const std::string& path, const Sinogram& sino, const MetaMap& meta) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "raster: cannot write '", path, "'");
    os << kMagic << "\n";
    os << "kind sinogram\n";
    os << "dtype f32le\n";
    os << "shape " << sino.n_views() << " " << sino.n_det << "\n";
    os << "det_spacing " << fmt17(sino.det_spacing) << "\n";
    os << "angles " << sino.angles.size();
    for (double a : sino.angles) os << " " << fmt17(a);
    os << "\n";
    for (const auto& [k, v] : meta) os << "meta " << k << " " << v << "\n";
    os << "end\n";
    write_payload(os, sino.data);
    require(os.good(), "raster: short write to '", path, "'");
}

Sinogram load_sinogram(const std::string& path, MetaMap* meta) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "raster: cannot open '", path, "'");
    Header h = read_header(is, path);
    require(h.kind == "sinogram", "raster: '", path, "' is a ", h.kind, ", expected sinogram");
    require(static_cast<int64_t>(h.angles.size()) == h.rows, "raster: '", path, "' has ",
            h.angles.size(), " angles for ", h.rows, " views");
    Sinogram sino(h.angles, static_cast<int>(h.cols), h.det_spacing);
    sino.data = read_payload(is, path, h.rows * h.cols);
    if (meta) *meta = h.meta;
    return sino;
}

}  // namespace deer

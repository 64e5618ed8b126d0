#pragma once

#include <vector>

#include "deer/common.hpp"

namespace deer {

/// Square attenuation image, row-major [y][x]. Training data is
/// normalized to [0, 1]; intermediate reconstructions may exceed that
/// range.
struct Image {
    int n = 0;
    double pixel_size = 1.0;
    std::vector<float> data;

    Image() = default;
    Image(int n_, double pixel_size_ = 1.0)
        : n(n_), pixel_size(pixel_size_), data(static_cast<size_t>(n_) * n_, 0.0f) {
        check(n_ >= 8, "image: side length must be >= 8, got ", n_);
        check(pixel_size_ > 0, "image: pixel_size must be positive");
    }

    float& at(int y, int x) { return data[static_cast<size_t>(y) * n + x]; }
    float at(int y, int x) const { return data[static_cast<size_t>(y) * n + x]; }
    size_t size() const { return data.size(); }
};

/// Parallel-beam sinogram, row-major [view][detector].
struct Sinogram {
    std::vector<double> angles;  // radians, strictly increasing in [0, pi)
    int n_det = 0;
    double det_spacing = 1.0;
    std::vector<float> data;

    Sinogram() = default;
    Sinogram(std::vector<double> angles_, int n_det_, double det_spacing_ = 1.0)
        : angles(std::move(angles_)),
          n_det(n_det_),
          det_spacing(det_spacing_),
          data(angles.size() * static_cast<size_t>(n_det_), 0.0f) {
        check(n_det_ >= 1, "sinogram: n_det must be >= 1, got ", n_det_);
        check(det_spacing_ > 0, "sinogram: det_spacing must be positive");
        validate_angles();
    }

    int n_views() const { return static_cast<int>(angles.size()); }
    float& at(int v, int d) { return data[static_cast<size_t>(v) * n_det + d]; }
    float at(int v, int d) const { return data[static_cast<size_t>(v) * n_det + d]; }

    void validate_angles() const {
        for (size_t i = 0; i < angles.size(); ++i) {
            check(angles[i] >= 0.0 && angles[i] < M_PI, "sinogram: angle ", angles[i],
                  " outside [0, pi)");
            if (i > 0)
                check(angles[i] > angles[i - 1], "sinogram: angles not strictly increasing");
        }
    }
};

/// Nv equispaced view angles over [0, pi).
inline std::vector<double> equispaced_angles(int nv) {
    check(nv >= 1, "angles: nv must be >= 1, got ", nv);
    std::vector<double> a(static_cast<size_t>(nv));
    for (int i = 0; i < nv; ++i) a[static_cast<size_t>(i)] = M_PI * i / nv;
    return a;
}

}  // namespace deer

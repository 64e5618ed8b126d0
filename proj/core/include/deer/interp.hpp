#pragma once

#include <cmath>
#include <cstdint>

namespace deer {

/// Bilinear sample of an n x n grid at (x, y) in pixel index coordinates.
/// Taps outside the grid read as zero.
template <typename T>
inline double bilinear_at(const T* img, int n, double x, double y) {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0;
    double fy = y - y0;
    auto tap = [&](int yy, int xx) -> double {
        if (xx < 0 || xx >= n || yy < 0 || yy >= n) return 0.0;
        return static_cast<double>(img[static_cast<int64_t>(yy) * n + xx]);
    };
    double top = (1.0 - fx) * tap(y0, x0) + fx * tap(y0, x0 + 1);
    double bot = (1.0 - fx) * tap(y0 + 1, x0) + fx * tap(y0 + 1, x0 + 1);
    return (1.0 - fy) * top + fy * bot;
}

/// Rotate an n x n image by `angle` about the grid center using inverse
/// mapping: each destination pixel samples the source at the back-rotated
/// coordinate. Out-of-grid samples read as zero. This is the single
/// rotation kernel shared by the analytic FBP and the learned
/// back-projection layer; both therefore interpolate identically.
template <typename T>
inline void rotate_bilinear_raw(const T* src, T* dst, int n, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double mid = 0.5 * (n - 1);
    for (int y = 0; y < n; ++y) {
        const double yc = y - mid;
        for (int x = 0; x < n; ++x) {
            const double xc = x - mid;
            // inverse rotation of the destination coordinate
            const double sx = xc * c + yc * s + mid;
            const double sy = -xc * s + yc * c + mid;
            dst[static_cast<int64_t>(y) * n + x] = static_cast<T>(bilinear_at(src, n, sx, sy));
        }
    }
}

/// Transpose of rotate_bilinear_raw: scatter each destination gradient
/// into its four source taps with the same bilinear weights.
template <typename T>
inline void rotate_bilinear_raw_adjoint(const T* dst_grad, T* src_grad, int n, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double mid = 0.5 * (n - 1);
    for (int y = 0; y < n; ++y) {
        const double yc = y - mid;
        for (int x = 0; x < n; ++x) {
            const double xc = x - mid;
            const double sx = xc * c + yc * s + mid;
            const double sy = -xc * s + yc * c + mid;
            const double g = static_cast<double>(dst_grad[static_cast<int64_t>(y) * n + x]);
            if (g == 0.0) continue;
            int x0 = static_cast<int>(std::floor(sx));
            int y0 = static_cast<int>(std::floor(sy));
            double fx = sx - x0;
            double fy = sy - y0;
            auto put = [&](int yy, int xx, double w) {
                if (xx < 0 || xx >= n || yy < 0 || yy >= n) return;
                src_grad[static_cast<int64_t>(yy) * n + xx] += static_cast<T>(g * w);
            };
            put(y0, x0, (1.0 - fx) * (1.0 - fy));
            put(y0, x0 + 1, fx * (1.0 - fy));
            put(y0 + 1, x0, (1.0 - fx) * fy);
            put(y0 + 1, x0 + 1, fx * fy);
        }
    }
}

/// Inscribed-circle field of view. Pixel centers live at 0..n-1; the grid
/// center is (n-1)/2 and the FOV radius is n/2 pixels.
inline bool inside_fov(int n, int x, int y) {
    const double mid = 0.5 * (n - 1);
    const double dx = x - mid;
    const double dy = y - mid;
    const double r = 0.5 * n;
    return dx * dx + dy * dy <= r * r;
}

template <typename T>
inline void apply_fov_mask_raw(T* img, int n) {
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (!inside_fov(n, x, y)) img[static_cast<int64_t>(y) * n + x] = T(0);
}

}  // namespace deer

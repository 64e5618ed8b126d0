#include "deer/radon.hpp"

#include <cmath>

#include "deer/interp.hpp"

namespace deer {

Sinogram radon(const Image& img, const std::vector<double>& angles, int n_det,
               double det_spacing, double step_px) {
    check(n_det >= 1, "radon: n_det must be >= 1, got ", n_det);
    check(!angles.empty(), "radon: empty angle list");
    check(step_px > 0 && step_px <= 1.0, "radon: step must be in (0,1] pixels, got ", step_px);
    const double ds = det_spacing > 0 ? det_spacing : img.pixel_size;

    Sinogram sino(angles, n_det, ds);
    const int n = img.n;
    const double px = img.pixel_size;
    const double mid = 0.5 * (n - 1);
    const double fov_r = 0.5 * n * px;
    const double det_mid = 0.5 * (n_det - 1);
    const int nv = sino.n_views();

#pragma omp parallel for schedule(static)
    for (int v = 0; v < nv; ++v) {
        const double c = std::cos(angles[static_cast<size_t>(v)]);
        const double s = std::sin(angles[static_cast<size_t>(v)]);
        for (int d = 0; d < n_det; ++d) {
            const double sd = (d - det_mid) * ds;
            const double under = fov_r * fov_r - sd * sd;
            if (under <= 0.0) {
                sino.at(v, d) = 0.0f;
                continue;
            }
            const double half_chord = std::sqrt(under);
            const int nsteps = std::max(1, static_cast<int>(std::ceil(2.0 * half_chord / (step_px * px))));
            const double dt = 2.0 * half_chord / nsteps;
            double acc = 0.0;
            for (int k = 0; k < nsteps; ++k) {
                const double t = -half_chord + (k + 0.5) * dt;
                const double x = sd * c - t * s;
                const double y = sd * s + t * c;
                acc += bilinear_at(img.data.data(), n, x / px + mid, y / px + mid);
            }
            sino.at(v, d) = static_cast<float>(acc * dt);
        }
    }
    return sino;
}

Image backproject(const Sinogram& sino, int n, double pixel_size) {
    check(sino.n_views() >= 1, "backproject: empty sinogram");
    Image out(n, pixel_size);
    const int nv = sino.n_views();
    const int nd = sino.n_det;

    if (nd == n && sino.det_spacing == pixel_size) {
        // rotation path, shared interpolation with the learned layer
        std::vector<float> view(static_cast<size_t>(n) * n);
        std::vector<float> rotated(static_cast<size_t>(n) * n);
        for (int v = 0; v < nv; ++v) {
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x)
                    view[static_cast<size_t>(y) * n + x] = sino.at(v, x);
            rotate_bilinear_raw(view.data(), rotated.data(), n, sino.angles[static_cast<size_t>(v)]);
            if (v == 0)
                out.data = rotated;
            else
                for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += rotated[i];
        }
    } else {
        const double mid = 0.5 * (n - 1);
        const double det_mid = 0.5 * (nd - 1);
        for (int v = 0; v < nv; ++v) {
            const double c = std::cos(sino.angles[static_cast<size_t>(v)]);
            const double s = std::sin(sino.angles[static_cast<size_t>(v)]);
            for (int y = 0; y < n; ++y) {
                const double yc = (y - mid) * pixel_size;
                for (int x = 0; x < n; ++x) {
                    const double xc = (x - mid) * pixel_size;
                    const double sd = (xc * c + yc * s) / sino.det_spacing + det_mid;
                    const int d0 = static_cast<int>(std::floor(sd));
                    const double f = sd - d0;
                    double val = 0.0;
                    if (d0 >= 0 && d0 < nd) val += (1.0 - f) * sino.at(v, d0);
                    if (d0 + 1 >= 0 && d0 + 1 < nd) val += f * sino.at(v, d0 + 1);
                    out.at(y, x) += static_cast<float>(val);
                }
            }
        }
    }
    apply_fov_mask_raw(out.data.data(), n);
    return out;
}

double adjoint_check(const Image& x, const Sinogram& y, double step_px) {
    Sinogram rx = radon(x, y.angles, y.n_det, y.det_spacing, step_px);
    Image bty = backproject(y, x.n, x.pixel_size);
    double ip_sino = 0.0;
    for (size_t i = 0; i < rx.data.size(); ++i)
        ip_sino += static_cast<double>(rx.data[i]) * static_cast<double>(y.data[i]);
    double ip_img = 0.0;
    for (size_t i = 0; i < bty.data.size(); ++i)
        ip_img += static_cast<double>(x.data[i]) * static_cast<double>(bty.data[i]);
    return std::fabs(ip_sino - ip_img) / std::max(std::fabs(ip_sino), 1e-12);
}

}  // namespace deer

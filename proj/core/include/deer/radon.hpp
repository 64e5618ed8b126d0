#pragma once

#include "deer/image.hpp"

namespace deer {

/// Parallel-beam forward projection by Joseph-style ray tracing:
/// bilinear samples along each ray at `step_px` pixel widths (default 0.5,
/// two samples per pixel), scaled by the physical step length. Rays are
/// integrated over the inscribed-circle field of view only.
/// det_spacing <= 0 means "use img.pixel_size".
Sinogram radon(const Image& img, const std::vector<double>& angles, int n_det,
               double det_spacing = 0.0, double step_px = 0.5);

/// Unfiltered back-projection summed over views (no angular weighting).
/// Shares the bilinear rotation kernel with the learned back-projection
/// layer whenever the sinogram geometry matches the image grid
/// (n_det == n, det_spacing == pixel_size); otherwise falls back to
/// pixel-driven profile interpolation. Pixels outside the FOV are zero.
Image backproject(const Sinogram& sino, int n, double pixel_size = 1.0);

/// Relative discrepancy |<Rx,y> - <x,R^T y>| / max(|<Rx,y>|, eps) between
/// the ray-traced projector and the rotation-based back-projector.
double adjoint_check(const Image& x, const Sinogram& y, double step_px = 0.5);

}  // namespace deer

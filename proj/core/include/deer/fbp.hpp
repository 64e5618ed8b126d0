#pragma once

#include "deer/filter.hpp"
#include "deer/image.hpp"

namespace deer {

/// Filter every view row independently in the Fourier domain.
Sinogram filter_sinogram(const Sinogram& sino, const FilterKernel& kernel);

/// Filtered back-projection: per-view Fourier filtering, back-projection
/// of the filtered profiles, pi/Nv angular weighting, FOV masking.
Image fbp(const Sinogram& sino, const FilterKernel& kernel, int n, double pixel_size = 1.0);

}  // namespace deer

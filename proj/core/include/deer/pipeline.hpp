#pragma once

#include "deer/fbp.hpp"
#include "deer/radon.hpp"

namespace deer {

/// Inputs for the learned stage, derived from a few-view acquisition:
/// an intermediate few-view FBP image, its denser reprojection, and the
/// filtered reprojection the back-projection layer consumes.
struct PipelineProducts {
    Image fbp_image;
    Sinogram dense_sino;
    Sinogram filtered_dense_sino;
};

/// nv_dense == 0 selects the default 2x view expansion; n_det == 0 uses n.
PipelineProducts prepare_inputs(const Sinogram& fewview, int n, int nv_dense = 0,
                                int n_det = 0, FilterKind kind = FilterKind::SheppLogan,
                                double pixel_size = 1.0, double step_px = 0.5);

}  // namespace deer

#include "deer/pipeline.hpp"

namespace deer {

PipelineProducts prepare_inputs(const Sinogram& fewview, int n, int nv_dense, int n_det,
                                FilterKind kind, double pixel_size, double step_px) {
    check(fewview.n_views() >= 1, "prepare_inputs: empty few-view sinogram");
    if (nv_dense == 0) nv_dense = 2 * fewview.n_views();
    if (n_det == 0) n_det = n;
    check(nv_dense >= 1, "prepare_inputs: nv_dense must be >= 1");

    PipelineProducts p;
    FilterKernel few_kernel = FilterKernel::make(kind, fewview.n_det, fewview.det_spacing);
    p.fbp_image = fbp(fewview, few_kernel, n, pixel_size);
    p.dense_sino = radon(p.fbp_image, equispaced_angles(nv_dense), n_det, 0.0, step_px);
    FilterKernel dense_kernel = FilterKernel::make(kind, n_det, p.dense_sino.det_spacing);
    p.filtered_dense_sino = filter_sinogram(p.dense_sino, dense_kernel);
    return p;
}

}  // namespace deer

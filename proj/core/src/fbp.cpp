#include "deer/fbp.hpp"

#include <cmath>

#include "deer/radon.hpp"

namespace deer {

Sinogram filter_sinogram(const Sinogram& sino, const FilterKernel& kernel) {
    check(sino.n_views() >= 1, "filter_sinogram: empty sinogram");
    Sinogram out = sino;
    const size_t total = sino.data.size();
    std::vector<double> in(total), filtered(total);
    for (size_t i = 0; i < total; ++i) in[i] = static_cast<double>(sino.data[i]);
    filter_rows(kernel, in.data(), filtered.data(), sino.n_views(), sino.n_det);
    for (size_t i = 0; i < total; ++i) out.data[i] = static_cast<float>(filtered[i]);
    return out;
}

Image fbp(const Sinogram& sino, const FilterKernel& kernel, int n, double pixel_size) {
    check(sino.n_views() >= 1, "fbp: empty sinogram");
    Sinogram filtered = filter_sinogram(sino, kernel);
    Image img = backproject(filtered, n, pixel_size);
    const float w = static_cast<float>(M_PI / sino.n_views());
    for (float& v : img.data) v *= w;
    return img;
}

}  // namespace deer

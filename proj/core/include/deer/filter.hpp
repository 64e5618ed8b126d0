#pragma once

#include <string>
#include <vector>

#include "deer/common.hpp"

namespace deer {

enum class FilterKind { SheppLogan, Ramp, None };

std::string to_string(FilterKind k);
FilterKind filter_kind_from_string(const std::string& s);

/// Frequency-domain reconstruction filter. The response is built by
/// sampling the closed-form spatial kernel on the padded circular domain
/// and taking its DFT, then forcing the DC bin to zero to cancel
/// truncation leakage. The detector-spacing quadrature factor is folded
/// into the response, so applying the filter is a plain per-bin multiply.
struct FilterKernel {
    FilterKind kind = FilterKind::SheppLogan;
    int length = 0;                 // padded FFT size, power of two >= 2*nd
    double det_spacing = 1.0;
    std::vector<double> response;   // full-length, real and even

    static FilterKernel make(FilterKind kind, int nd, double det_spacing = 1.0);
};

/// Filter nrows independent rows of nd samples each. Rows are zero-padded
/// to kernel.length, multiplied bin-wise in the Fourier domain and cropped
/// back. in/out may alias row-wise storage of size nrows*nd.
void filter_rows(const FilterKernel& kernel, const double* in, double* out, int nrows, int nd);

}  // namespace deer

#include "deer/filter.hpp"

#include <cmath>

#include "fft.hpp"

namespace deer {

std::string to_string(FilterKind k) {
    switch (k) {
        case FilterKind::SheppLogan: return "shepp-logan";
        case FilterKind::Ramp: return "ramp";
        case FilterKind::None: return "none";
    }
    return "?";
}

FilterKind filter_kind_from_string(const std::string& s) {
    if (s == "shepp-logan") return FilterKind::SheppLogan;
    if (s == "ramp") return FilterKind::Ramp;
    if (s == "none") return FilterKind::None;
    throw std::invalid_argument("unknown filter kind '" + s + "'");
}

namespace {

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Band-limited spatial impulse responses sampled at detector pitch ds
// (lag m in samples). Shepp-Logan kernel: -2 / (pi^2 ds^2 (4 m^2 - 1));
// Ram-Lak ramp: 1/(4 ds^2) at m=0, -1/(pi^2 m^2 ds^2) for odd m, 0 else.
double kernel_sample(FilterKind kind, int m, double ds) {
    const double pi2 = M_PI * M_PI;
    switch (kind) {
        case FilterKind::SheppLogan:
            return -2.0 / (pi2 * ds * ds * (4.0 * m * m - 1.0));
        case FilterKind::Ramp:
            if (m == 0) return 1.0 / (4.0 * ds * ds);
            if (m % 2 == 0) return 0.0;
            return -1.0 / (pi2 * static_cast<double>(m) * m * ds * ds);
        case FilterKind::None:
            return m == 0 ? 1.0 / ds : 0.0;
    }
    return 0.0;
}

}  // namespace

FilterKernel FilterKernel::make(FilterKind kind, int nd, double det_spacing) {
    check(nd >= 1, "filter: nd must be >= 1, got ", nd);
    check(det_spacing > 0, "filter: det_spacing must be positive");
    FilterKernel k;
    k.kind = kind;
    k.det_spacing = det_spacing;
    k.length = next_pow2(2 * nd);

    // sample the spatial kernel on the circular domain (wrapped lags)
    std::vector<double> h(static_cast<size_t>(k.length));
    for (int i = 0; i < k.length; ++i) {
        const int m = i <= k.length / 2 ? i : i - k.length;
        h[static_cast<size_t>(i)] = kernel_sample(kind, m, det_spacing);
    }

    std::vector<double> re, im;
    fft::real_dft(h.data(), k.length, re, im);

    // Even real kernel -> real even response; fold the convolution
    // quadrature factor ds in and cancel the truncation DC leak.
    k.response.assign(static_cast<size_t>(k.length), 0.0);
    for (int b = 0; b <= k.length / 2; ++b) {
        double v = re[static_cast<size_t>(b)] * det_spacing;
        k.response[static_cast<size_t>(b)] = v;
        if (b != 0 && b != k.length / 2) k.response[static_cast<size_t>(k.length - b)] = v;
    }
    if (kind != FilterKind::None) k.response[0] = 0.0;
    return k;
}

void filter_rows(const FilterKernel& kernel, const double* in, double* out, int nrows, int nd) {
    check(kernel.length >= 2 * nd, "filter: kernel length ", kernel.length,
          " shorter than required 2*nd = ", 2 * nd);
    check(nrows >= 0 && nd >= 1, "filter: bad row block ", nrows, "x", nd);
    fft::filter_rows_fft(kernel.response, kernel.length, in, out, nrows, nd);
}

}  // namespace deer

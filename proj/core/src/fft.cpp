#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

#include "deer/common.hpp"

namespace deer::fft {

namespace {

// FFTW plan creation is not thread-safe; execution via the new-array API
// is. Plans are cached per transform length and reused with fftw_malloc'd
// buffers so alignment matches the planning buffers.
struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

PlanPair get_plans(int n) {
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    double* in = fftw_alloc_real(static_cast<size_t>(n));
    fftw_complex* spec = fftw_alloc_complex(static_cast<size_t>(n / 2 + 1));
    PlanPair p;
    p.fwd = fftw_plan_dft_r2c_1d(n, in, spec, FFTW_ESTIMATE);
    p.inv = fftw_plan_dft_c2r_1d(n, spec, in, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(spec);
    require(p.fwd && p.inv, "fft: fftw plan creation failed for length ", n);
    cache[n] = p;
    return p;
}

struct FftBuffers {
    explicit FftBuffers(int n)
        : real(fftw_alloc_real(static_cast<size_t>(n))),
          spec(fftw_alloc_complex(static_cast<size_t>(n / 2 + 1))) {}
    ~FftBuffers() {
        fftw_free(real);
        fftw_free(spec);
    }
    FftBuffers(const FftBuffers&) = delete;
    FftBuffers& operator=(const FftBuffers&) = delete;
    double* real;
    fftw_complex* spec;
};

}  // namespace

void real_dft(const double* in, int n, std::vector<double>& re, std::vector<double>& im) {
    PlanPair plans = get_plans(n);
    FftBuffers buf(n);
    std::memcpy(buf.real, in, sizeof(double) * static_cast<size_t>(n));
    fftw_execute_dft_r2c(plans.fwd, buf.real, buf.spec);
    re.resize(static_cast<size_t>(n / 2 + 1));
    im.resize(static_cast<size_t>(n / 2 + 1));
    for (int k = 0; k <= n / 2; ++k) {
        re[static_cast<size_t>(k)] = buf.spec[k][0];
        im[static_cast<size_t>(k)] = buf.spec[k][1];
    }
}

void filter_rows_fft(const std::vector<double>& multipliers, int length, const double* in,
                     double* out, int nrows, int nd) {
    PlanPair plans = get_plans(length);
    FftBuffers buf(length);
    const double norm = 1.0 / static_cast<double>(length);
    for (int r = 0; r < nrows; ++r) {
        std::memcpy(buf.real, in + static_cast<size_t>(r) * nd,
                    sizeof(double) * static_cast<size_t>(nd));
        std::memset(buf.real + nd, 0, sizeof(double) * static_cast<size_t>(length - nd));
        fftw_execute_dft_r2c(plans.fwd, buf.real, buf.spec);
        for (int k = 0; k <= length / 2; ++k) {
            const double m = multipliers[static_cast<size_t>(k)] * norm;
            buf.spec[k][0] *= m;
            buf.spec[k][1] *= m;
        }
        fftw_execute_dft_c2r(plans.inv, buf.spec, buf.real);
        std::memcpy(out + static_cast<size_t>(r) * nd, buf.real,
                    sizeof(double) * static_cast<size_t>(nd));
    }
}

}  // namespace deer::fft

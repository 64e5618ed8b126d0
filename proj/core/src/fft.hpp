#pragma once

#include <vector>

namespace deer::fft {

/// Real FFT of a length-n buffer (n power of two). Returns the half
/// spectrum re/im pairs, bins 0..n/2.
void real_dft(const double* in, int n, std::vector<double>& re, std::vector<double>& im);

/// Filter nrows rows of nd samples: zero-pad each row to length,
/// multiply the spectrum bin-wise with the real multipliers (length/2+1
/// entries used), inverse transform and crop. multipliers must already
/// include any quadrature scaling; the 1/length FFT normalization is
/// applied here.
void filter_rows_fft(const std::vector<double>& multipliers, int length, const double* in,
                     double* out, int nrows, int nd);

}  // namespace deer::fft

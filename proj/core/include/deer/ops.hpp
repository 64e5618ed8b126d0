#pragma once

#include "deer/filter.hpp"
#include "deer/tensor.hpp"

namespace deer::ops {

enum class Padding { Same, Valid };

// ---- elementwise ----
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& a, T c);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& a, T c);
template <typename T> Tensor<T> abs(const Tensor<T>& a);
template <typename T> Tensor<T> relu(const Tensor<T>& a);
template <typename T> Tensor<T> leaky_relu(const Tensor<T>& a, T slope);

// ---- reductions ----
template <typename T> Tensor<T> sum(const Tensor<T>& a);
template <typename T> Tensor<T> mean(const Tensor<T>& a);

// ---- structure ----

/// Concatenate two NHWC tensors along the channel axis.
template <typename T> Tensor<T> concat_ch(const Tensor<T>& a, const Tensor<T>& b);

template <typename T> Tensor<T> reshape(const Tensor<T>& a, Shape shape);

/// Select index i along axis 0 / axis 1, dropping that axis.
template <typename T> Tensor<T> select0(const Tensor<T>& a, int64_t i);
template <typename T> Tensor<T> select1(const Tensor<T>& a, int64_t i);

/// Copy that blocks gradient flow.
template <typename T> Tensor<T> detach(const Tensor<T>& a);

// ---- dense / conv ----

/// x: [B,K] @ w: [K,M] (+ optional bias [M]) -> [B,M].
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w);

/// x: [B,H,W,Ci], w: [KH,KW,Ci,Co], optional bias [Co]. Same padding is
/// symmetric (K-1)/2; odd kernels only.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                 int stride = 1, Padding pad = Padding::Same);
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w,
                 int stride = 1, Padding pad = Padding::Same);

/// Stride-1 transpose convolution. w: [KH,KW,Co,Ci] (input channels last,
/// mirroring the forward conv whose transpose this is). Same padding keeps
/// H,W; valid padding grows each spatial dim by K-1.
template <typename T>
Tensor<T> conv2d_transpose(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           Padding pad = Padding::Same);
template <typename T>
Tensor<T> conv2d_transpose(const Tensor<T>& x, const Tensor<T>& w,
                           Padding pad = Padding::Same);

// ---- imaging ----

/// Point-wise back-projection lines for one view. s: [B,Nd] detector
/// samples; w is either [Nd,N] (view-dependent slice, one length-N vector
/// per detector) or [N] (shared vector). Output [B,N,Nd,1] with
/// out[b,y,d,0] = s[b,d] * w(d,y).
template <typename T>
Tensor<T> line_spread(const Tensor<T>& w, const Tensor<T>& s, int64_t n);

/// Rotate square images about their center with bilinear interpolation.
/// Accepts [H,W] or [B,H,W,C] with H == W; out-of-grid samples are zero.
template <typename T>
Tensor<T> rotate_bilinear(const Tensor<T>& img, double angle);

/// Per-row Fourier-domain filtering of [Nv,Nd] or [B,Nv,Nd] sinogram data.
template <typename T>
Tensor<T> fourier_filter(const Tensor<T>& sino, const FilterKernel& kernel);

/// Zero pixels outside the inscribed circle of [H,W] / [B,H,W,C] images.
template <typename T>
Tensor<T> fov_mask(const Tensor<T>& img);

}  // namespace deer::ops

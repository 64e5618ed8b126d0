#include <algorithm>
#include <vector>

#include "op_common.hpp"

namespace deer::ops {

using detail::has_out_grad;
using detail::make_output;
using detail::record_if;

namespace {

struct ConvDims {
    int64_t B, H, W, Ci, KH, KW, Co, stride, pad, Ho, Wo;
};

// Direct NHWC convolution. Weights are [KH,KW,Ci,Co] so the innermost
// loop runs over contiguous output channels (one fused multiply-add per
// lane). Threads write disjoint output rows; accumulation order per
// element is fixed, so results are bitwise reproducible at any thread
// count.
template <typename T>
void conv_forward_raw(const T* x, const T* w, const T* bias, T* out, const ConvDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t b = 0; b < d.B; ++b) {
        for (int64_t oy = 0; oy < d.Ho; ++oy) {
            std::vector<T> acc(static_cast<size_t>(d.Co));
            for (int64_t ox = 0; ox < d.Wo; ++ox) {
                if (bias)
                    std::copy(bias, bias + d.Co, acc.begin());
                else
                    std::fill(acc.begin(), acc.end(), T(0));
                for (int64_t ky = 0; ky < d.KH; ++ky) {
                    const int64_t iy = oy * d.stride + ky - d.pad;
                    if (iy < 0 || iy >= d.H) continue;
                    for (int64_t kx = 0; kx < d.KW; ++kx) {
                        const int64_t ix = ox * d.stride + kx - d.pad;
                        if (ix < 0 || ix >= d.W) continue;
                        const T* xrow = x + ((b * d.H + iy) * d.W + ix) * d.Ci;
                        const T* wrow = w + (ky * d.KW + kx) * d.Ci * d.Co;
                        for (int64_t ci = 0; ci < d.Ci; ++ci) {
                            const T xv = xrow[ci];
                            const T* wv = wrow + ci * d.Co;
                            T* pa = acc.data();
                            for (int64_t co = 0; co < d.Co; ++co) pa[co] += xv * wv[co];
                        }
                    }
                }
                std::copy(acc.begin(), acc.end(),
                          out + ((b * d.Ho + oy) * d.Wo + ox) * d.Co);
            }
        }
    }
}

// Gradient w.r.t. the input: gather formulation, one writer per input
// pixel. Weights are pre-transposed to [KH,KW,Co,Ci] so the innermost
// loop is a broadcast multiply-add over contiguous input channels.
template <typename T>
void conv_dx_raw(const T* g, const T* w, T* dx, const ConvDims& d) {
    std::vector<T> wt(static_cast<size_t>(d.KH * d.KW * d.Ci * d.Co));
    for (int64_t k = 0; k < d.KH * d.KW; ++k)
        for (int64_t ci = 0; ci < d.Ci; ++ci)
            for (int64_t co = 0; co < d.Co; ++co)
                wt[(k * d.Co + co) * d.Ci + ci] = w[(k * d.Ci + ci) * d.Co + co];
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t b = 0; b < d.B; ++b) {
        for (int64_t iy = 0; iy < d.H; ++iy) {
            for (int64_t ix = 0; ix < d.W; ++ix) {
                T* dxrow = dx + ((b * d.H + iy) * d.W + ix) * d.Ci;
                for (int64_t ky = 0; ky < d.KH; ++ky) {
                    const int64_t oy_num = iy + d.pad - ky;
                    if (oy_num < 0 || oy_num % d.stride) continue;
                    const int64_t oy = oy_num / d.stride;
                    if (oy >= d.Ho) continue;
                    for (int64_t kx = 0; kx < d.KW; ++kx) {
                        const int64_t ox_num = ix + d.pad - kx;
                        if (ox_num < 0 || ox_num % d.stride) continue;
                        const int64_t ox = ox_num / d.stride;
                        if (ox >= d.Wo) continue;
                        const T* grow = g + ((b * d.Ho + oy) * d.Wo + ox) * d.Co;
                        const T* wk = wt.data() + (ky * d.KW + kx) * d.Co * d.Ci;
                        for (int64_t co = 0; co < d.Co; ++co) {
                            const T gv = grow[co];
                            const T* wv = wk + co * d.Ci;
                            for (int64_t ci = 0; ci < d.Ci; ++ci) dxrow[ci] += gv * wv[ci];
                        }
                    }
                }
            }
        }
    }
}

// Gradient w.r.t. the weights: each (ky,kx) tap owns a disjoint slice of
// dw, so taps parallelize without races.
template <typename T>
void conv_dw_raw(const T* x, const T* g, T* dw, const ConvDims& d) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t ky = 0; ky < d.KH; ++ky) {
        for (int64_t kx = 0; kx < d.KW; ++kx) {
            T* dwk = dw + (ky * d.KW + kx) * d.Ci * d.Co;
            for (int64_t b = 0; b < d.B; ++b) {
                for (int64_t oy = 0; oy < d.Ho; ++oy) {
                    const int64_t iy = oy * d.stride + ky - d.pad;
                    if (iy < 0 || iy >= d.H) continue;
                    for (int64_t ox = 0; ox < d.Wo; ++ox) {
                        const int64_t ix = ox * d.stride + kx - d.pad;
                        if (ix < 0 || ix >= d.W) continue;
                        const T* xrow = x + ((b * d.H + iy) * d.W + ix) * d.Ci;
                        const T* grow = g + ((b * d.Ho + oy) * d.Wo + ox) * d.Co;
                        for (int64_t ci = 0; ci < d.Ci; ++ci) {
                            const T xv = xrow[ci];
                            if (xv == T(0)) continue;
                            T* dwrow = dwk + ci * d.Co;
                            for (int64_t co = 0; co < d.Co; ++co) dwrow[co] += xv * grow[co];
                        }
                    }
                }
            }
        }
    }
}

template <typename T>
void conv_db_raw(const T* g, T* db, int64_t pixels, int64_t Co) {
    for (int64_t p = 0; p < pixels; ++p) {
        const T* grow = g + p * Co;
        for (int64_t co = 0; co < Co; ++co) db[co] += grow[co];
    }
}

template <typename T>
ConvDims make_dims(const char* op, const Tensor<T>& x, int64_t KH, int64_t KW, int64_t Ci,
                   int64_t Co, int stride, Padding pad) {
    check(x.rank() == 4, op, ": input must be NHWC, got ", shape_str(x.shape()));
    check(x.dim(3) == Ci, op, ": input channels ", x.dim(3), " do not match kernel channels ",
          Ci);
    check(stride >= 1, op, ": stride must be >= 1");
    check(KH % 2 == 1 && KW % 2 == 1, op, ": kernel dims must be odd, got ", KH, "x", KW);
    ConvDims d;
    d.B = x.dim(0);
    d.H = x.dim(1);
    d.W = x.dim(2);
    d.Ci = Ci;
    d.KH = KH;
    d.KW = KW;
    d.Co = Co;
    d.stride = stride;
    d.pad = pad == Padding::Same ? (KH - 1) / 2 : 0;
    d.Ho = (d.H + 2 * d.pad - KH) / stride + 1;
    d.Wo = (d.W + 2 * d.pad - KW) / stride + 1;
    check(d.Ho >= 1 && d.Wo >= 1, op, ": kernel ", KH, "x", KW, " too large for input ",
          shape_str(x.shape()));
    return d;
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                 Padding pad) {
    check(w.rank() == 4, "conv2d: weights must be [KH,KW,Ci,Co], got ", shape_str(w.shape()));
    ConvDims d = make_dims("conv2d", x, w.dim(0), w.dim(1), w.dim(2), w.dim(3), stride, pad);
    if (b.defined())
        check(b.rank() == 1 && b.dim(0) == d.Co, "conv2d: bias shape ", shape_str(b.shape()),
              " does not match ", d.Co, " filters");
    Tensor<T> out = b.defined() ? make_output<T>({d.B, d.Ho, d.Wo, d.Co}, {x, w, b})
                                : make_output<T>({d.B, d.Ho, d.Wo, d.Co}, {x, w});
    conv_forward_raw(x.data(), w.data(), b.defined() ? b.data() : nullptr, out.mutable_data(), d);
    record_if(out, [x, w, b, out, d]() mutable {
        if (!has_out_grad(out)) return;
        const T* g = out.grad();
        if (x.requires_grad()) {
            x.ensure_grad();
            conv_dx_raw(g, w.data(), x.grad_mutable(), d);
        }
        if (w.requires_grad()) {
            w.ensure_grad();
            conv_dw_raw(x.data(), g, w.grad_mutable(), d);
        }
        if (b.defined() && b.requires_grad()) {
            b.ensure_grad();
            conv_db_raw(g, b.grad_mutable(), d.B * d.Ho * d.Wo, d.Co);
        }
    });
    return out;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& w, int stride, Padding pad) {
    return conv2d(x, w, Tensor<T>{}, stride, pad);
}

namespace {

// conv kernel equivalent to a stride-1 transpose convolution: flip the
// taps spatially and swap the channel roles.
template <typename T>
std::vector<T> flip_swap_weights(const T* w, int64_t KH, int64_t KW, int64_t Co, int64_t Ci) {
    std::vector<T> wf(static_cast<size_t>(KH * KW * Ci * Co));
    for (int64_t ky = 0; ky < KH; ++ky)
        for (int64_t kx = 0; kx < KW; ++kx)
            for (int64_t co = 0; co < Co; ++co)
                for (int64_t ci = 0; ci < Ci; ++ci)
                    wf[(((KH - 1 - ky) * KW + (KW - 1 - kx)) * Ci + ci) * Co + co] =
                        w[((ky * KW + kx) * Co + co) * Ci + ci];
    return wf;
}

}  // namespace

template <typename T>
Tensor<T> conv2d_transpose(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                           Padding pad) {
    check(w.rank() == 4, "conv2d_transpose: weights must be [KH,KW,Co,Ci], got ",
          shape_str(w.shape()));
    check(x.rank() == 4, "conv2d_transpose: input must be NHWC, got ", shape_str(x.shape()));
    const int64_t KH = w.dim(0), KW = w.dim(1), Co = w.dim(2), Ci = w.dim(3);
    check(x.dim(3) == Ci, "conv2d_transpose: input channels ", x.dim(3),
          " do not match kernel channels ", Ci);
    check(KH % 2 == 1 && KW % 2 == 1, "conv2d_transpose: kernel dims must be odd");
    // transpose of a P-padded conv pads with K-1-P
    ConvDims d;
    d.B = x.dim(0);
    d.H = x.dim(1);
    d.W = x.dim(2);
    d.Ci = Ci;
    d.KH = KH;
    d.KW = KW;
    d.Co = Co;
    d.stride = 1;
    d.pad = pad == Padding::Same ? (KH - 1) / 2 : KH - 1;
    d.Ho = d.H + 2 * d.pad - KH + 1;
    d.Wo = d.W + 2 * d.pad - KW + 1;
    if (b.defined())
        check(b.rank() == 1 && b.dim(0) == Co, "conv2d_transpose: bias shape ",
              shape_str(b.shape()), " does not match ", Co, " filters");

    std::vector<T> wf = flip_swap_weights(w.data(), KH, KW, Co, Ci);
    Tensor<T> out = b.defined() ? make_output<T>({d.B, d.Ho, d.Wo, d.Co}, {x, w, b})
                                : make_output<T>({d.B, d.Ho, d.Wo, d.Co}, {x, w});
    conv_forward_raw(x.data(), wf.data(), b.defined() ? b.data() : nullptr, out.mutable_data(),
                     d);
    record_if(out, [x, w, b, out, d, wf = std::move(wf)]() mutable {
        if (!has_out_grad(out)) return;
        const T* g = out.grad();
        if (x.requires_grad()) {
            x.ensure_grad();
            conv_dx_raw(g, wf.data(), x.grad_mutable(), d);
        }
        if (w.requires_grad()) {
            w.ensure_grad();
            std::vector<T> dwf(wf.size(), T(0));
            conv_dw_raw(x.data(), g, dwf.data(), d);
            T* gw = w.grad_mutable();
            for (int64_t ky = 0; ky < d.KH; ++ky)
                for (int64_t kx = 0; kx < d.KW; ++kx)
                    for (int64_t co = 0; co < d.Co; ++co)
                        for (int64_t ci = 0; ci < d.Ci; ++ci)
                            gw[((ky * d.KW + kx) * d.Co + co) * d.Ci + ci] +=
                                dwf[(((d.KH - 1 - ky) * d.KW + (d.KW - 1 - kx)) * d.Ci + ci) *
                                        d.Co +
                                    co];
        }
        if (b.defined() && b.requires_grad()) {
            b.ensure_grad();
            conv_db_raw(g, b.grad_mutable(), d.B * d.Ho * d.Wo, d.Co);
        }
    });
    return out;
}

template <typename T>
Tensor<T> conv2d_transpose(const Tensor<T>& x, const Tensor<T>& w, Padding pad) {
    return conv2d_transpose(x, w, Tensor<T>{}, pad);
}

#define DEER_INSTANTIATE(T)                                                                    \
    template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int,   \
                                 Padding);                                                     \
    template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, int, Padding);           \
    template Tensor<T> conv2d_transpose<T>(const Tensor<T>&, const Tensor<T>&,                \
                                           const Tensor<T>&, Padding);                        \
    template Tensor<T> conv2d_transpose<T>(const Tensor<T>&, const Tensor<T>&, Padding);

DEER_INSTANTIATE(float)
DEER_INSTANTIATE(double)
#undef DEER_INSTANTIATE

}  // namespace deer::ops

#include <vector>

#include "deer/interp.hpp"
#include "op_common.hpp"

namespace deer::ops {

using detail::has_out_grad;
using detail::make_output;
using detail::record_if;

template <typename T>
Tensor<T> line_spread(const Tensor<T>& w, const Tensor<T>& s, int64_t n) {
    check(s.rank() == 2, "line_spread: detector samples must be [B,Nd], got ",
          shape_str(s.shape()));
    const int64_t B = s.dim(0), Nd = s.dim(1);
    const bool view_dependent = w.rank() == 2;
    if (view_dependent)
        check(w.dim(0) == Nd && w.dim(1) == n, "line_spread: weight slice ",
              shape_str(w.shape()), " does not match [Nd,N]=[", Nd, ",", n, "]");
    else
        check(w.rank() == 1 && w.dim(0) == n, "line_spread: shared weights ",
              shape_str(w.shape()), " do not match [N]=[", n, "]");

    Tensor<T> out = make_output<T>({B, n, Nd, 1}, {w, s});
    const T* pw = w.data();
    const T* ps = s.data();
    T* po = out.mutable_data();
    for (int64_t b = 0; b < B; ++b)
        for (int64_t y = 0; y < n; ++y) {
            T* orow = po + (b * n + y) * Nd;
            const T* srow = ps + b * Nd;
            if (view_dependent) {
                for (int64_t d = 0; d < Nd; ++d) orow[d] = srow[d] * pw[d * n + y];
            } else {
                const T wy = pw[y];
                for (int64_t d = 0; d < Nd; ++d) orow[d] = srow[d] * wy;
            }
        }
    record_if(out, [w, s, out, B, n, Nd, view_dependent]() mutable {
        if (!has_out_grad(out)) return;
        const T* g = out.grad();
        const T* pw = w.data();
        const T* ps = s.data();
        if (w.requires_grad()) {
            w.ensure_grad();
            T* gw = w.grad_mutable();
            for (int64_t b = 0; b < B; ++b)
                for (int64_t y = 0; y < n; ++y) {
                    const T* grow = g + (b * n + y) * Nd;
                    const T* srow = ps + b * Nd;
                    if (view_dependent) {
                        for (int64_t d = 0; d < Nd; ++d) gw[d * n + y] += grow[d] * srow[d];
                    } else {
                        T acc = T(0);
                        for (int64_t d = 0; d < Nd; ++d) acc += grow[d] * srow[d];
                        gw[y] += acc;
                    }
                }
        }
        if (s.requires_grad()) {
            s.ensure_grad();
            T* gs = s.grad_mutable();
            for (int64_t b = 0; b < B; ++b)
                for (int64_t y = 0; y < n; ++y) {
                    const T* grow = g + (b * n + y) * Nd;
                    T* gsrow = gs + b * Nd;
                    if (view_dependent) {
                        for (int64_t d = 0; d < Nd; ++d) gsrow[d] += grow[d] * pw[d * n + y];
                    } else {
                        const T wy = pw[y];
                        for (int64_t d = 0; d < Nd; ++d) gsrow[d] += grow[d] * wy;
                    }
                }
        }
    });
    return out;
}

namespace {

// [H,W] -> 1 plane; [B,H,W,C] -> B*C planes (strided when C > 1)
struct PlaneLayout {
    int64_t nplanes, n, stride0;  // stride between consecutive planes for C==1
    bool interleaved;
    int64_t B, C;
};

template <typename T>
PlaneLayout plane_layout(const char* op, const Tensor<T>& img) {
    PlaneLayout pl{};
    if (img.rank() == 2) {
        check(img.dim(0) == img.dim(1), op, ": image must be square, got ",
              shape_str(img.shape()));
        pl.nplanes = 1;
        pl.n = img.dim(0);
        pl.stride0 = pl.n * pl.n;
        pl.interleaved = false;
        pl.B = 1;
        pl.C = 1;
        return pl;
    }
    check(img.rank() == 4, op, ": expected [H,W] or [B,H,W,C], got ", shape_str(img.shape()));
    check(img.dim(1) == img.dim(2), op, ": image must be square, got ", shape_str(img.shape()));
    pl.B = img.dim(0);
    pl.C = img.dim(3);
    pl.n = img.dim(1);
    pl.nplanes = pl.B * pl.C;
    pl.stride0 = pl.n * pl.n;
    pl.interleaved = pl.C > 1;
    return pl;
}

template <typename T>
void gather_plane(const T* base, T* plane, const PlaneLayout& pl, int64_t b, int64_t c) {
    const int64_t hw = pl.n * pl.n;
    const T* src = base + b * hw * pl.C;
    for (int64_t i = 0; i < hw; ++i) plane[i] = src[i * pl.C + c];
}

template <typename T>
void scatter_plane_add(T* base, const T* plane, const PlaneLayout& pl, int64_t b, int64_t c) {
    const int64_t hw = pl.n * pl.n;
    T* dst = base + b * hw * pl.C;
    for (int64_t i = 0; i < hw; ++i) dst[i * pl.C + c] += plane[i];
}

}  // namespace

template <typename T>
Tensor<T> rotate_bilinear(const Tensor<T>& img, double angle) {
    PlaneLayout pl = plane_layout("rotate_bilinear", img);
    Tensor<T> out = make_output<T>(img.shape(), {img});
    const T* src = img.data();
    T* dst = out.mutable_data();
    if (!pl.interleaved) {
#pragma omp parallel for schedule(static)
        for (int64_t p = 0; p < pl.nplanes; ++p)
            rotate_bilinear_raw(src + p * pl.stride0, dst + p * pl.stride0,
                                static_cast<int>(pl.n), angle);
    } else {
#pragma omp parallel for collapse(2) schedule(static)
        for (int64_t b = 0; b < pl.B; ++b)
            for (int64_t c = 0; c < pl.C; ++c) {
                std::vector<T> in_plane(static_cast<size_t>(pl.n * pl.n));
                std::vector<T> out_plane(static_cast<size_t>(pl.n * pl.n));
                gather_plane(src, in_plane.data(), pl, b, c);
                rotate_bilinear_raw(in_plane.data(), out_plane.data(), static_cast<int>(pl.n),
                                    angle);
                T* obase = dst + b * pl.n * pl.n * pl.C;
                for (int64_t i = 0; i < pl.n * pl.n; ++i) obase[i * pl.C + c] = out_plane[i];
            }
    }
    record_if(out, [img, out, pl, angle]() mutable {
        if (!has_out_grad(out)) return;
        img.ensure_grad();
        const T* g = out.grad();
        T* gi = img.grad_mutable();
        if (!pl.interleaved) {
#pragma omp parallel for schedule(static)
            for (int64_t p = 0; p < pl.nplanes; ++p)
                rotate_bilinear_raw_adjoint(g + p * pl.stride0, gi + p * pl.stride0,
                                            static_cast<int>(pl.n), angle);
        } else {
            for (int64_t b = 0; b < pl.B; ++b)
                for (int64_t c = 0; c < pl.C; ++c) {
                    std::vector<T> g_plane(static_cast<size_t>(pl.n * pl.n));
                    std::vector<T> gi_plane(static_cast<size_t>(pl.n * pl.n), T(0));
                    gather_plane(g, g_plane.data(), pl, b, c);
                    rotate_bilinear_raw_adjoint(g_plane.data(), gi_plane.data(),
                                                static_cast<int>(pl.n), angle);
                    scatter_plane_add(gi, gi_plane.data(), pl, b, c);
                }
        }
    });
    return out;
}

template <typename T>
Tensor<T> fourier_filter(const Tensor<T>& sino, const FilterKernel& kernel) {
    check(sino.rank() == 2 || sino.rank() == 3,
          "fourier_filter: expected [Nv,Nd] or [B,Nv,Nd], got ", shape_str(sino.shape()));
    const int64_t nd = sino.dim(sino.rank() - 1);
    const int64_t nrows = sino.numel() / nd;
    check(kernel.length >= 2 * nd, "fourier_filter: kernel length ", kernel.length,
          " shorter than required 2*nd = ", 2 * nd);

    Tensor<T> out = make_output<T>(sino.shape(), {sino});
    std::vector<double> buf_in(static_cast<size_t>(sino.numel()));
    std::vector<double> buf_out(static_cast<size_t>(sino.numel()));
    const T* ps = sino.data();
    for (int64_t i = 0; i < sino.numel(); ++i) buf_in[i] = static_cast<double>(ps[i]);
    filter_rows(kernel, buf_in.data(), buf_out.data(), static_cast<int>(nrows),
                static_cast<int>(nd));
    T* po = out.mutable_data();
    for (int64_t i = 0; i < sino.numel(); ++i) po[i] = static_cast<T>(buf_out[i]);

    // The response is real and even and pad/crop share the same offset, so
    // the adjoint of the filtering is the filtering itself.
    record_if(out, [sino, out, kernel, nrows, nd]() mutable {
        if (!has_out_grad(out)) return;
        sino.ensure_grad();
        std::vector<double> gin(static_cast<size_t>(out.numel()));
        std::vector<double> gout(static_cast<size_t>(out.numel()));
        const T* g = out.grad();
        for (int64_t i = 0; i < out.numel(); ++i) gin[i] = static_cast<double>(g[i]);
        filter_rows(kernel, gin.data(), gout.data(), static_cast<int>(nrows),
                    static_cast<int>(nd));
        T* gs = sino.grad_mutable();
        for (int64_t i = 0; i < out.numel(); ++i) gs[i] += static_cast<T>(gout[i]);
    });
    return out;
}

template <typename T>
Tensor<T> fov_mask(const Tensor<T>& img) {
    PlaneLayout pl = plane_layout("fov_mask", img);
    Tensor<T> out = make_output<T>(img.shape(), {img});
    const int n = static_cast<int>(pl.n);
    const T* src = img.data();
    T* dst = out.mutable_data();
    auto mask_pass = [&](const T* in, T* o) {
        for (int64_t b = 0; b < pl.B; ++b)
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    const bool keep = inside_fov(n, x, y);
                    const int64_t off = ((b * n + y) * n + x) * pl.C;
                    for (int64_t c = 0; c < pl.C; ++c) o[off + c] = keep ? in[off + c] : T(0);
                }
    };
    mask_pass(src, dst);
    record_if(out, [img, out, pl, n]() mutable {
        if (!has_out_grad(out)) return;
        img.ensure_grad();
        const T* g = out.grad();
        T* gi = img.grad_mutable();
        for (int64_t b = 0; b < pl.B; ++b)
            for (int y = 0; y < n; ++y)
                for (int x = 0; x < n; ++x) {
                    if (!inside_fov(n, x, y)) continue;
                    const int64_t off = ((b * n + y) * n + x) * pl.C;
                    for (int64_t c = 0; c < pl.C; ++c) gi[off + c] += g[off + c];
                }
    });
    return out;
}

#define DEER_INSTANTIATE(T)                                                               \
    template Tensor<T> line_spread<T>(const Tensor<T>&, const Tensor<T>&, int64_t);      \
    template Tensor<T> rotate_bilinear<T>(const Tensor<T>&, double);                     \
    template Tensor<T> fourier_filter<T>(const Tensor<T>&, const FilterKernel&);         \
    template Tensor<T> fov_mask<T>(const Tensor<T>&);

DEER_INSTANTIATE(float)
DEER_INSTANTIATE(double)
#undef DEER_INSTANTIATE

}  // namespace deer::ops

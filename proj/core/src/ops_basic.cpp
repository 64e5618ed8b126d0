#include <cmath>

#include "op_common.hpp"

namespace deer::ops {

using detail::has_out_grad;
using detail::make_output;
using detail::record_if;

namespace {

template <typename T>
void check_same_shape(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
    check(a.shape() == b.shape(), op, ": shape mismatch ", shape_str(a.shape()), " vs ",
          shape_str(b.shape()));
}

template <typename T>
void axpy(T* dst, const T* src, int64_t n, T alpha) {
    for (int64_t i = 0; i < n; ++i) dst[i] += alpha * src[i];
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("add", a, b);
    Tensor<T> out = make_output<T>(a.shape(), {a, b});
    const int64_t n = a.numel();
    const T* pa = a.data();
    const T* pb = b.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
    record_if(out, [a, b, out]() mutable {
        if (!has_out_grad(out)) return;
        const int64_t n = out.numel();
        if (a.requires_grad()) {
            a.ensure_grad();
            axpy(a.grad_mutable(), out.grad(), n, T(1));
        }
        if (b.requires_grad()) {
            b.ensure_grad();
            axpy(b.grad_mutable(), out.grad(), n, T(1));
        }
    });
    return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("sub", a, b);
    Tensor<T> out = make_output<T>(a.shape(), {a, b});
    const int64_t n = a.numel();
    const T* pa = a.data();
    const T* pb = b.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
    record_if(out, [a, b, out]() mutable {
        if (!has_out_grad(out)) return;
        const int64_t n = out.numel();
        if (a.requires_grad()) {
            a.ensure_grad();
            axpy(a.grad_mutable(), out.grad(), n, T(1));
        }
        if (b.requires_grad()) {
            b.ensure_grad();
            axpy(b.grad_mutable(), out.grad(), n, T(-1));
        }
    });
    return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("mul", a, b);
    Tensor<T> out = make_output<T>(a.shape(), {a, b});
    const int64_t n = a.numel();
    const T* pa = a.data();
    const T* pb = b.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
    record_if(out, [a, b, out]() mutable {
        if (!has_out_grad(out)) return;
        const int64_t n = out.numel();
        const T* g = out.grad();
        if (a.requires_grad()) {
            a.ensure_grad();
            T* ga = a.grad_mutable();
            const T* pb = b.data();
            for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * pb[i];
        }
        if (b.requires_grad()) {
            b.ensure_grad();
            T* gb = b.grad_mutable();
            const T* pa = a.data();
            for (int64_t i = 0; i < n; ++i) gb[i] += g[i] * pa[i];
        }
    });
    return out;
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
    check_same_shape("div", a, b);
    Tensor<T> out = make_output<T>(a.shape(), {a, b});
    const int64_t n = a.numel();
    const T* pa = a.data();
    const T* pb = b.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] / pb[i];
    record_if(out, [a, b, out]() mutable {
        if (!has_out_grad(out)) return;
        const int64_t n = out.numel();
        const T* g = out.grad();
        const T* pa = a.data();
        const T* pb = b.data();
        if (a.requires_grad()) {
            a.ensure_grad();
            T* ga = a.grad_mutable();
            for (int64_t i = 0; i < n; ++i) ga[i] += g[i] / pb[i];
        }
        if (b.requires_grad()) {
            b.ensure_grad();
            T* gb = b.grad_mutable();
            for (int64_t i = 0; i < n; ++i) gb[i] -= g[i] * pa[i] / (pb[i] * pb[i]);
        }
    });
    return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T c) {
    Tensor<T> out = make_output<T>(a.shape(), {a});
    const int64_t n = a.numel();
    const T* pa = a.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) po[i] = c * pa[i];
    record_if(out, [a, out, c]() mutable {
        if (!has_out_grad(out)) return;
        a.ensure_grad();
        axpy(a.grad_mutable(), out.grad(), out.numel(), c);
    });
    return out;
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T c) {
    Tensor<T> out = make_output<T>(a.shape(), {a});
    const int64_t n = a.numel();
    const T* pa = a.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] + c;
    record_if(out, [a, out]() mutable {
        if (!has_out_grad(out)) return;
        a.ensure_grad();
        axpy(a.grad_mutable(), out.grad(), out.numel(), T(1));
    });
    return out;
}

// abs and relu take subgradient 0 at the kink; finite-difference trials
// exclude kink-adjacent points.
template <typename T>
Tensor<T> abs(const Tensor<T>& a) {
    Tensor<T> out = make_output<T>(a.shape(), {a});
    const int64_t n = a.numel();
    const T* pa = a.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) po[i] = std::fabs(pa[i]);
    record_if(out, [a, out]() mutable {
        if (!has_out_grad(out)) return;
        a.ensure_grad();
        const int64_t n = out.numel();
        const T* g = out.grad();
        const T* pa = a.data();
        T* ga = a.grad_mutable();
        for (int64_t i = 0; i < n; ++i)
            ga[i] += pa[i] > T(0) ? g[i] : (pa[i] < T(0) ? -g[i] : T(0));
    });
    return out;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
    Tensor<T> out = make_output<T>(a.shape(), {a});
    const int64_t n = a.numel();
    const T* pa = a.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] > T(0) ? pa[i] : T(0);
    record_if(out, [a, out]() mutable {
        if (!has_out_grad(out)) return;
        a.ensure_grad();
        const int64_t n = out.numel();
        const T* g = out.grad();
        const T* pa = a.data();
        T* ga = a.grad_mutable();
        for (int64_t i = 0; i < n; ++i)
            if (pa[i] > T(0)) ga[i] += g[i];
    });
    return out;
}

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& a, T slope) {
    Tensor<T> out = make_output<T>(a.shape(), {a});
    const int64_t n = a.numel();
    const T* pa = a.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) po[i] = pa[i] > T(0) ? pa[i] : slope * pa[i];
    record_if(out, [a, out, slope]() mutable {
        if (!has_out_grad(out)) return;
        a.ensure_grad();
        const int64_t n = out.numel();
        const T* g = out.grad();
        const T* pa = a.data();
        T* ga = a.grad_mutable();
        for (int64_t i = 0; i < n; ++i) ga[i] += pa[i] > T(0) ? g[i] : slope * g[i];
    });
    return out;
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
    Tensor<T> out = make_output<T>({1}, {a});
    const int64_t n = a.numel();
    const T* pa = a.data();
    T acc = T(0);
    for (int64_t i = 0; i < n; ++i) acc += pa[i];
    out.mutable_data()[0] = acc;
    record_if(out, [a, out]() mutable {
        if (!has_out_grad(out)) return;
        a.ensure_grad();
        const T g = out.grad()[0];
        T* ga = a.grad_mutable();
        const int64_t n = a.numel();
        for (int64_t i = 0; i < n; ++i) ga[i] += g;
    });
    return out;
}

template <typename T>
Tensor<T> mean(const Tensor<T>& a) {
    check(a.numel() > 0, "mean: empty tensor");
    Tensor<T> out = make_output<T>({1}, {a});
    const int64_t n = a.numel();
    const T* pa = a.data();
    T acc = T(0);
    for (int64_t i = 0; i < n; ++i) acc += pa[i];
    out.mutable_data()[0] = acc / static_cast<T>(n);
    record_if(out, [a, out]() mutable {
        if (!has_out_grad(out)) return;
        a.ensure_grad();
        const T g = out.grad()[0] / static_cast<T>(a.numel());
        T* ga = a.grad_mutable();
        const int64_t n = a.numel();
        for (int64_t i = 0; i < n; ++i) ga[i] += g;
    });
    return out;
}

template <typename T>
Tensor<T> concat_ch(const Tensor<T>& a, const Tensor<T>& b) {
    check(a.rank() == 4 && b.rank() == 4, "concat: expected NHWC tensors, got ",
          shape_str(a.shape()), " and ", shape_str(b.shape()));
    check(a.dim(0) == b.dim(0) && a.dim(1) == b.dim(1) && a.dim(2) == b.dim(2),
          "concat: leading dims differ, ", shape_str(a.shape()), " vs ", shape_str(b.shape()));
    const int64_t ca = a.dim(3), cb = b.dim(3);
    const int64_t pixels = a.dim(0) * a.dim(1) * a.dim(2);
    Tensor<T> out = make_output<T>({a.dim(0), a.dim(1), a.dim(2), ca + cb}, {a, b});
    const T* pa = a.data();
    const T* pb = b.data();
    T* po = out.mutable_data();
    for (int64_t p = 0; p < pixels; ++p) {
        for (int64_t c = 0; c < ca; ++c) po[p * (ca + cb) + c] = pa[p * ca + c];
        for (int64_t c = 0; c < cb; ++c) po[p * (ca + cb) + ca + c] = pb[p * cb + c];
    }
    record_if(out, [a, b, out, ca, cb, pixels]() mutable {
        if (!has_out_grad(out)) return;
        const T* g = out.grad();
        if (a.requires_grad()) {
            a.ensure_grad();
            T* ga = a.grad_mutable();
            for (int64_t p = 0; p < pixels; ++p)
                for (int64_t c = 0; c < ca; ++c) ga[p * ca + c] += g[p * (ca + cb) + c];
        }
        if (b.requires_grad()) {
            b.ensure_grad();
            T* gb = b.grad_mutable();
            for (int64_t p = 0; p < pixels; ++p)
                for (int64_t c = 0; c < cb; ++c) gb[p * cb + c] += g[p * (ca + cb) + ca + c];
        }
    });
    return out;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Shape shape) {
    check(shape_numel(shape) == a.numel(), "reshape: ", shape_str(a.shape()), " to ",
          shape_str(shape), " changes element count");
    Tensor<T> out = make_output<T>(std::move(shape), {a});
    std::copy(a.data(), a.data() + a.numel(), out.mutable_data());
    record_if(out, [a, out]() mutable {
        if (!has_out_grad(out)) return;
        a.ensure_grad();
        axpy(a.grad_mutable(), out.grad(), out.numel(), T(1));
    });
    return out;
}

namespace {

template <typename T>
Tensor<T> select_impl(const char* name, const Tensor<T>& a, int axis, int64_t index) {
    check(a.rank() > axis, name, ": tensor rank ", a.rank(), " too small");
    check(index >= 0 && index < a.dim(axis), name, ": index ", index, " out of range [0,",
          a.dim(axis), ")");
    Shape out_shape;
    int64_t outer = 1, inner = 1;
    for (int i = 0; i < a.rank(); ++i) {
        if (i < axis) outer *= a.dim(i);
        if (i > axis) inner *= a.dim(i);
        if (i != axis) out_shape.push_back(a.dim(i));
    }
    const int64_t axis_n = a.dim(axis);
    Tensor<T> out = make_output<T>(out_shape, {a});
    const T* pa = a.data();
    T* po = out.mutable_data();
    for (int64_t o = 0; o < outer; ++o)
        std::copy(pa + (o * axis_n + index) * inner, pa + (o * axis_n + index + 1) * inner,
                  po + o * inner);
    record_if(out, [a, out, outer, inner, axis_n, index]() mutable {
        if (!has_out_grad(out)) return;
        a.ensure_grad();
        const T* g = out.grad();
        T* ga = a.grad_mutable();
        for (int64_t o = 0; o < outer; ++o) {
            T* dst = ga + (o * axis_n + index) * inner;
            const T* src = g + o * inner;
            for (int64_t i = 0; i < inner; ++i) dst[i] += src[i];
        }
    });
    return out;
}

}  // namespace

template <typename T>
Tensor<T> select0(const Tensor<T>& a, int64_t i) {
    return select_impl("select0", a, 0, i);
}

template <typename T>
Tensor<T> select1(const Tensor<T>& a, int64_t i) {
    return select_impl("select1", a, 1, i);
}

template <typename T>
Tensor<T> detach(const Tensor<T>& a) {
    Tensor<T> out = Tensor<T>::from(a.shape(), a.values(), false);
    return out;
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
    check(x.rank() == 2 && w.rank() == 2, "linear: expected [B,K] and [K,M], got ",
          shape_str(x.shape()), " and ", shape_str(w.shape()));
    check(x.dim(1) == w.dim(0), "linear: inner dims differ, ", shape_str(x.shape()), " vs ",
          shape_str(w.shape()));
    const int64_t B = x.dim(0), K = x.dim(1), M = w.dim(1);
    if (b.defined())
        check(b.rank() == 1 && b.dim(0) == M, "linear: bias shape ", shape_str(b.shape()),
              " does not match output size ", M);
    Tensor<T> out = b.defined() ? make_output<T>({B, M}, {x, w, b}) : make_output<T>({B, M}, {x, w});
    const T* px = x.data();
    const T* pw = w.data();
    T* po = out.mutable_data();
    for (int64_t i = 0; i < B; ++i) {
        T* orow = po + i * M;
        if (b.defined())
            std::copy(b.data(), b.data() + M, orow);
        for (int64_t k = 0; k < K; ++k) {
            const T xv = px[i * K + k];
            if (xv == T(0)) continue;
            const T* wrow = pw + k * M;
            for (int64_t m = 0; m < M; ++m) orow[m] += xv * wrow[m];
        }
    }
    record_if(out, [x, w, b, out, B, K, M]() mutable {
        if (!has_out_grad(out)) return;
        const T* g = out.grad();
        if (x.requires_grad()) {
            x.ensure_grad();
            T* gx = x.grad_mutable();
            const T* pw = w.data();
            for (int64_t i = 0; i < B; ++i)
                for (int64_t k = 0; k < K; ++k) {
                    const T* wrow = pw + k * M;
                    const T* grow = g + i * M;
                    T acc = T(0);
                    for (int64_t m = 0; m < M; ++m) acc += wrow[m] * grow[m];
                    gx[i * K + k] += acc;
                }
        }
        if (w.requires_grad()) {
            w.ensure_grad();
            T* gw = w.grad_mutable();
            const T* px = x.data();
            for (int64_t i = 0; i < B; ++i)
                for (int64_t k = 0; k < K; ++k) {
                    const T xv = px[i * K + k];
                    if (xv == T(0)) continue;
                    const T* grow = g + i * M;
                    T* gwrow = gw + k * M;
                    for (int64_t m = 0; m < M; ++m) gwrow[m] += xv * grow[m];
                }
        }
        if (b.defined() && b.requires_grad()) {
            b.ensure_grad();
            T* gb = b.grad_mutable();
            for (int64_t i = 0; i < B; ++i)
                for (int64_t m = 0; m < M; ++m) gb[m] += g[i * M + m];
        }
    });
    return out;
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w) {
    return linear(x, w, Tensor<T>{});
}

#define DEER_INSTANTIATE(T)                                                        \
    template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                 \
    template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                 \
    template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                 \
    template Tensor<T> div<T>(const Tensor<T>&, const Tensor<T>&);                 \
    template Tensor<T> scale<T>(const Tensor<T>&, T);                              \
    template Tensor<T> add_scalar<T>(const Tensor<T>&, T);                         \
    template Tensor<T> abs<T>(const Tensor<T>&);                                   \
    template Tensor<T> relu<T>(const Tensor<T>&);                                  \
    template Tensor<T> leaky_relu<T>(const Tensor<T>&, T);                         \
    template Tensor<T> sum<T>(const Tensor<T>&);                                   \
    template Tensor<T> mean<T>(const Tensor<T>&);                                  \
    template Tensor<T> concat_ch<T>(const Tensor<T>&, const Tensor<T>&);           \
    template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                        \
    template Tensor<T> select0<T>(const Tensor<T>&, int64_t);                      \
    template Tensor<T> select1<T>(const Tensor<T>&, int64_t);                      \
    template Tensor<T> detach<T>(const Tensor<T>&);                                \
    template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&); \
    template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&);

DEER_INSTANTIATE(float)
DEER_INSTANTIATE(double)
#undef DEER_INSTANTIATE

}  // namespace deer::ops

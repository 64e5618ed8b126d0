#include "deer/losses.hpp"

#include <cmath>

#include "deer/ops.hpp"

namespace deer {

namespace op = deer::ops;

template <typename T>
Tensor<T> loss_mae(const Tensor<T>& x, const Tensor<T>& y) {
    check(x.shape() == y.shape(), "loss_mae: shape mismatch ", shape_str(x.shape()), " vs ",
          shape_str(y.shape()));
    check(x.numel() > 0, "loss_mae: empty batch");
    return op::mean(op::abs(op::sub(y, x)));
}

namespace {

template <typename T>
Tensor<T> ssim_window_kernel(const SsimParams& p) {
    const int w = p.window;
    Tensor<T> k = Tensor<T>::zeros({w, w, 1, 1});
    T* d = k.mutable_data();
    if (!p.gaussian) {
        const T v = static_cast<T>(1.0 / (w * w));
        for (int64_t i = 0; i < k.numel(); ++i) d[i] = v;
    } else {
        const double sigma = 1.5;
        const double mid = 0.5 * (w - 1);
        double total = 0.0;
        for (int y = 0; y < w; ++y)
            for (int x = 0; x < w; ++x) {
                const double dy = y - mid, dx = x - mid;
                const double g = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                d[y * w + x] = static_cast<T>(g);
                total += g;
            }
        for (int64_t i = 0; i < k.numel(); ++i) d[i] = static_cast<T>(d[i] / total);
    }
    return k;
}

}  // namespace

template <typename T>
Tensor<T> ssim_graph(const Tensor<T>& x, const Tensor<T>& y, const SsimParams& p) {
    check(x.shape() == y.shape(), "ssim: shape mismatch ", shape_str(x.shape()), " vs ",
          shape_str(y.shape()));
    check(x.rank() == 4 && x.dim(3) == 1, "ssim: expected [B,H,W,1], got ",
          shape_str(x.shape()));
    check(x.dim(1) >= p.window && x.dim(2) >= p.window, "ssim: image ", x.dim(1), "x", x.dim(2),
          " smaller than ", p.window, "x", p.window, " window");
    check(p.r > 0, "ssim: dynamic range must be positive");

    Tensor<T> k = ssim_window_kernel<T>(p);
    const T c1 = static_cast<T>(p.k1 * p.r * p.k1 * p.r);
    const T c2 = static_cast<T>(p.k2 * p.r * p.k2 * p.r);

    auto window_mean = [&](const Tensor<T>& t) {
        return op::conv2d(t, k, 1, op::Padding::Valid);
    };
    Tensor<T> mu_x = window_mean(x);
    Tensor<T> mu_y = window_mean(y);
    Tensor<T> var_x = op::sub(window_mean(op::mul(x, x)), op::mul(mu_x, mu_x));
    Tensor<T> var_y = op::sub(window_mean(op::mul(y, y)), op::mul(mu_y, mu_y));
    Tensor<T> cov = op::sub(window_mean(op::mul(x, y)), op::mul(mu_x, mu_y));

    Tensor<T> num = op::mul(op::add_scalar(op::scale(op::mul(mu_x, mu_y), T(2)), c1),
                            op::add_scalar(op::scale(cov, T(2)), c2));
    Tensor<T> den = op::mul(op::add_scalar(op::add(op::mul(mu_x, mu_x), op::mul(mu_y, mu_y)), c1),
                            op::add_scalar(op::add(var_x, var_y), c2));
    return op::mean(op::div(num, den));
}

template <typename T>
Tensor<T> loss_structural(const Tensor<T>& x, const Tensor<T>& y, const SsimParams& p) {
    return op::add_scalar(op::scale(ssim_graph(x, y, p), T(-1)), T(1));
}

template <typename T>
Tensor<T> loss_adversarial(const Tensor<T>& d_scores_fake) {
    return op::scale(op::mean(d_scores_fake), T(-1));
}

template <typename T>
Tensor<T> loss_discriminator(const Tensor<T>& d_scores_fake, const Tensor<T>& d_scores_real) {
    return op::sub(op::mean(d_scores_fake), op::mean(d_scores_real));
}

template <typename T>
Tensor<T> loss_generator_total(const Tensor<T>& l_al, const Tensor<T>& l_sl,
                               const Tensor<T>& l1, const Tensor<T>& l1_bp, T lambda_al,
                               T lambda_sl) {
    check(l1.defined(), "loss_generator_total: L1 term is required");
    check(lambda_al >= 0 && lambda_sl >= 0, "loss_generator_total: weights must be >= 0");
    Tensor<T> total;
    auto accumulate = [&total](Tensor<T> term) {
        total = total.defined() ? op::add(total, term) : term;
    };
    if (lambda_al > 0) {
        check(l_al.defined(), "loss_generator_total: lambda_al > 0 but no adversarial term");
        accumulate(op::scale(l_al, lambda_al));
    }
    if (lambda_sl > 0) {
        check(l_sl.defined(), "loss_generator_total: lambda_sl > 0 but no structural term");
        accumulate(op::scale(l_sl, lambda_sl));
    }
    accumulate(l1);
    if (l1_bp.defined()) accumulate(l1_bp);
    return total;
}

#define DEER_INSTANTIATE(T)                                                                  \
    template Tensor<T> loss_mae<T>(const Tensor<T>&, const Tensor<T>&);                      \
    template Tensor<T> ssim_graph<T>(const Tensor<T>&, const Tensor<T>&, const SsimParams&); \
    template Tensor<T> loss_structural<T>(const Tensor<T>&, const Tensor<T>&,                \
                                          const SsimParams&);                                \
    template Tensor<T> loss_adversarial<T>(const Tensor<T>&);                                \
    template Tensor<T> loss_discriminator<T>(const Tensor<T>&, const Tensor<T>&);            \
    template Tensor<T> loss_generator_total<T>(const Tensor<T>&, const Tensor<T>&,           \
                                               const Tensor<T>&, const Tensor<T>&, T, T);

DEER_INSTANTIATE(float)
DEER_INSTANTIATE(double)
#undef DEER_INSTANTIATE

}  // namespace deer

#include "deer/optimizer.hpp"

#include <cmath>

namespace deer {

template <typename T>
void Adam<T>::step(T lr) {
    check(lr > 0, "adam: lr must be positive");
    ++t_;
    const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta1_), t_));
    const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta2_), t_));
    for (auto& s : slots_) {
        const T step_lr = lr * s.lr_scale;
        T* p = s.param.mutable_data();
        const bool has_g = s.param.has_grad();
        const T* g = has_g ? s.param.grad() : nullptr;
        const int64_t count = s.param.numel();
        for (int64_t i = 0; i < count; ++i) {
            const T gi = has_g ? g[i] : T(0);
            require(std::isfinite(static_cast<double>(gi)), "adam: non-finite gradient in '",
                    s.name, "' at index ", i);
            s.m[static_cast<size_t>(i)] = beta1_ * s.m[static_cast<size_t>(i)] + (T(1) - beta1_) * gi;
            s.v[static_cast<size_t>(i)] =
                beta2_ * s.v[static_cast<size_t>(i)] + (T(1) - beta2_) * gi * gi;
            const T mhat = s.m[static_cast<size_t>(i)] / bc1;
            const T vhat = s.v[static_cast<size_t>(i)] / bc2;
            p[i] -= step_lr * mhat / (static_cast<T>(std::sqrt(static_cast<double>(vhat))) + eps_);
        }
    }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace deer

#pragma once

#include <vector>

#include "deer/model.hpp"

namespace deer {

/// Adam with bias correction. Parameters register once with a per-group
/// learning-rate scale (the back-projection part trains at base/10 in the
/// joint phase). Missing gradients count as zero; non-finite gradients
/// abort with the parameter name.
template <typename T>
class Adam {
public:
    struct Slot {
        std::string name;
        Tensor<T> param;
        T lr_scale = T(1);
        std::vector<T> m, v;
    };

    explicit Adam(T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8))
        : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void add_param(const std::string& name, Tensor<T> param, T lr_scale = T(1)) {
        Slot s;
        s.name = name;
        s.param = std::move(param);
        s.lr_scale = lr_scale;
        s.m.assign(static_cast<size_t>(s.param.numel()), T(0));
        s.v.assign(static_cast<size_t>(s.param.numel()), T(0));
        slots_.push_back(std::move(s));
    }

    void add_params(const std::vector<NamedParam<T>>& params, T lr_scale = T(1)) {
        for (const auto& p : params) add_param(p.name, p.tensor, lr_scale);
    }

    void zero_grad() {
        for (auto& s : slots_) s.param.zero_grad();
    }

    void step(T lr);

    int64_t t() const { return t_; }
    T beta1() const { return beta1_; }
    T beta2() const { return beta2_; }
    std::vector<Slot>& slots() { return slots_; }
    const std::vector<Slot>& slots() const { return slots_; }
    void set_t(int64_t t) { t_ = t; }

private:
    T beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::vector<Slot> slots_;
};

}  // namespace deer

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "deer/common.hpp"

namespace deer {

using Shape = std::vector<int64_t>;

inline int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string r = "[";
    for (size_t i = 0; i < s.size(); ++i) r += (i ? "x" : "") + std::to_string(s[i]);
    return r + "]";
}

template <typename T>
struct TensorImpl {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until first accumulation
    bool requires_grad = false;
};

/// Value-semantic handle to a shared tensor buffer. Tensors are immutable
/// after creation except for gradient accumulation; parameter updates go
/// through mutable_data() between training steps.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        Tensor t;
        t.p_ = std::make_shared<TensorImpl<T>>();
        t.p_->shape = std::move(shape);
        t.p_->data.assign(static_cast<size_t>(shape_numel(t.p_->shape)), T(0));
        t.p_->requires_grad = requires_grad;
        return t;
    }

    static Tensor full(Shape shape, T value, bool requires_grad = false) {
        Tensor t = zeros(std::move(shape), requires_grad);
        std::fill(t.p_->data.begin(), t.p_->data.end(), value);
        return t;
    }

    static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false) {
        check(shape_numel(shape) == static_cast<int64_t>(values.size()),
              "tensor: shape ", shape_str(shape), " does not match data length ", values.size());
        Tensor t;
        t.p_ = std::make_shared<TensorImpl<T>>();
        t.p_->shape = std::move(shape);
        t.p_->data = std::move(values);
        t.p_->requires_grad = requires_grad;
        return t;
    }

    static Tensor scalar(T value, bool requires_grad = false) {
        return from({1}, {value}, requires_grad);
    }

    bool defined() const { return static_cast<bool>(p_); }
    const Shape& shape() const { return p_->shape; }
    int64_t numel() const { return static_cast<int64_t>(p_->data.size()); }
    int64_t dim(int i) const { return p_->shape[static_cast<size_t>(i)]; }
    int rank() const { return static_cast<int>(p_->shape.size()); }

    // The handle is value-semantic; the methods below mutate the shared
    // buffer, not the handle, and are therefore const.
    const T* data() const { return p_->data.data(); }
    T* mutable_data() const { return p_->data.data(); }
    const std::vector<T>& values() const { return p_->data; }

    bool requires_grad() const { return p_->requires_grad; }
    void set_requires_grad(bool rg) const { p_->requires_grad = rg; }

    bool has_grad() const { return !p_->grad.empty(); }
    void ensure_grad() const {
        if (p_->grad.empty()) p_->grad.assign(p_->data.size(), T(0));
    }
    void zero_grad() const { p_->grad.clear(); }
    const T* grad() const { return p_->grad.data(); }
    T* grad_mutable() const { return p_->grad.data(); }
    const std::vector<T>& grad_values() const { return p_->grad; }

    T item() const {
        check(numel() == 1, "tensor: item() on non-scalar tensor of shape ", shape_str(shape()));
        return p_->data[0];
    }

    bool same_impl(const Tensor& other) const { return p_ == other.p_; }

private:
    std::shared_ptr<TensorImpl<T>> p_;
};

/// Per-step tape of executed operations. Rebuilt every training iteration;
/// backward replays recorded closures in exact reverse execution order.
template <typename T>
class Tape {
public:
    static Tape*& current() {
        thread_local Tape* cur = nullptr;
        return cur;
    }

    /// RAII activation of a tape on the current thread.
    struct Scope {
        explicit Scope(Tape& t) : prev_(current()) { current() = &t; }
        ~Scope() { current() = prev_; }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

    private:
        Tape* prev_;
    };

    /// RAII suppression of recording (inference / metric evaluation).
    struct NoGrad {
        NoGrad() : prev_(current()) { current() = nullptr; }
        ~NoGrad() { current() = prev_; }
        NoGrad(const NoGrad&) = delete;
        NoGrad& operator=(const NoGrad&) = delete;

    private:
        Tape* prev_;
    };

    static bool recording() { return current() != nullptr; }

    void record(std::function<void()> backward_fn) { nodes_.push_back(std::move(backward_fn)); }

    size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    /// Reverse-mode sweep. loss must be scalar; gradients accumulate into
    /// every requires_grad tensor reachable from it.
    void backward(Tensor<T> loss) {
        check(loss.defined() && loss.numel() == 1, "backward: loss must be a scalar tensor");
        check(!nodes_.empty(), "backward: tape is empty");
        loss.ensure_grad();
        loss.grad_mutable()[0] += T(1);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
    }

private:
    std::vector<std::function<void()>> nodes_;
};

}  // namespace deer

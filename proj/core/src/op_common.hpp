#pragma once

#include "deer/ops.hpp"

namespace deer::ops::detail {

template <typename T>
bool any_requires_grad(std::initializer_list<Tensor<T>> ins) {
    for (const auto& t : ins)
        if (t.requires_grad()) return true;
    return false;
}

/// Allocate an op output: requires_grad iff recording is active and any
/// input carries gradient. The op is recorded on the tape only in that
/// case, so inference builds no graph.
template <typename T>
Tensor<T> make_output(Shape shape, std::initializer_list<Tensor<T>> ins) {
    bool rg = Tape<T>::recording() && any_requires_grad<T>(ins);
    return Tensor<T>::zeros(std::move(shape), rg);
}

template <typename T, typename Fn>
void record_if(const Tensor<T>& out, Fn&& backward_fn) {
    if (out.requires_grad()) Tape<T>::current()->record(std::forward<Fn>(backward_fn));
}

/// Guard used at the top of every recorded backward closure: an output the
/// loss never touched has no gradient buffer and contributes nothing.
template <typename T>
bool has_out_grad(const Tensor<T>& out) {
    return out.has_grad();
}

}  // namespace deer::ops::detail

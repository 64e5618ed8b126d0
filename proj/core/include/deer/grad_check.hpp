#pragma once

#include <functional>
#include <string>
#include <vector>

#include "deer/tensor.hpp"

namespace deer {

/// Compare reverse-mode gradients against central finite differences.
/// `build` must construct a scalar loss from the current data of
/// `inputs`; it is re-invoked for every probe. Returns
/// ||g_ad - g_fd|| / max(||g_fd||, eps) over all inputs of one trial.
template <typename T>
double grad_check_fn(const std::function<Tensor<T>(const std::vector<Tensor<T>>&)>& build,
                     std::vector<Tensor<T>>& inputs, T fd_step);

struct GradCheckResult {
    std::string op;
    double max_rel_err = 0.0;
    int trials = 0;
};

/// Named-operator certification in f64: `trials` random trials per
/// operator, finite-difference step 1e-5, kink-adjacent samples excluded.
std::vector<GradCheckResult> run_grad_certification(int trials, uint64_t seed);

/// Single named operator from the certification set.
double grad_check_named(const std::string& op, int trials, uint64_t seed);

}  // namespace deer

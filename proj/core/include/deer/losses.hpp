#pragma once

#include "deer/tensor.hpp"

namespace deer {

/// SSIM constants: C1 = (K1*R)^2, C2 = (K2*R)^2 with R the dynamic range
/// (1.0 for normalized images). The sliding window is 11x11, uniform by
/// default with an optional Gaussian (sigma 1.5).
struct SsimParams {
    double k1 = 0.01;
    double k2 = 0.03;
    double r = 1.0;
    int window = 11;
    bool gaussian = false;
};

/// Mean absolute error over every element of the batch.
template <typename T>
Tensor<T> loss_mae(const Tensor<T>& x, const Tensor<T>& y);

/// Mean SSIM over all valid sliding windows of a [B,H,W,1] batch.
template <typename T>
Tensor<T> ssim_graph(const Tensor<T>& x, const Tensor<T>& y, const SsimParams& p = {});

/// 1 - SSIM.
template <typename T>
Tensor<T> loss_structural(const Tensor<T>& x, const Tensor<T>& y, const SsimParams& p = {});

/// -E[D(G(s))] from the discriminator scores of generated images.
template <typename T>
Tensor<T> loss_adversarial(const Tensor<T>& d_scores_fake);

/// E[D(fake)] - E[D(real)]; the discriminator minimizes this under weight
/// clipping.
template <typename T>
Tensor<T> loss_discriminator(const Tensor<T>& d_scores_fake, const Tensor<T>& d_scores_real);

/// lambda_al * L_al + lambda_sl * L_sl + L1 + L1_bp. Undefined optional
/// terms require a zero weight / are skipped.
template <typename T>
Tensor<T> loss_generator_total(const Tensor<T>& l_al, const Tensor<T>& l_sl,
                               const Tensor<T>& l1, const Tensor<T>& l1_bp, T lambda_al,
                               T lambda_sl);

}  // namespace deer

#pragma once

#include <optional>
#include <vector>

#include "deer/config.hpp"
#include "deer/image.hpp"
#include "deer/ops.hpp"

namespace deer {

template <typename T>
struct NamedParam {
    std::string name;
    Tensor<T> tensor;
};

/// Point-wise back-projection layer. View-dependent weights hold one
/// length-N vector per sinogram point ([Nv,Nd,N]), the lite variant one
/// shared vector ([N]). There is no bias term. With all weights equal to
/// one the layer reproduces classical FBP exactly (same rotation kernel,
/// same pi/Nv weighting, same FOV mask).
template <typename T>
struct BpLayer {
    bool lite = false;
    int nv = 0, nd = 0, n = 0;
    Tensor<T> weights;

    static BpLayer init(bool lite, int nv, int nd, int n, Rng& rng);
    static BpLayer with_uniform_weights(bool lite, int nv, int nd, int n, T value);

    int64_t param_count() const { return weights.numel(); }

    /// filtered_sino: [B,Nv,Nd] -> X_bp [B,N,N,1]. Differentiable w.r.t.
    /// weights and input.
    Tensor<T> forward(const Tensor<T>& filtered_sino, const std::vector<double>& angles) const;
};

/// 9-layer refinement U-net: 4 encoder convolutions, 1 bottleneck, 4
/// transpose-convolution decoder layers with conveying paths from the
/// encoder. 32 filters of 5x5, stride 1, ReLU after every layer except
/// (by default) the single-filter output layer. Same padding keeps N x N
/// throughout; valid mode pre-pads the input by the net 4-pixel shrink
/// and center-crops skip tensors.
template <typename T>
struct UNet {
    static constexpr int kDepth = 9;
    int filters = 32;
    int ksize = 5;
    ops::Padding padding = ops::Padding::Same;
    bool relu_head = false;
    std::vector<Tensor<T>> w;  // conv weights per layer
    std::vector<Tensor<T>> b;  // biases per layer

    static UNet init(int in_channels, Rng& rng, ops::Padding padding, bool relu_head);

    /// x: [B,N,N,2] -> [B,N,N,1]
    Tensor<T> forward(const Tensor<T>& x) const;
};

/// Six 3x3 convolutions (64,64,128,128,256,256 filters, zero padding,
/// stride 1 on odd layers and 2 on even layers) followed by 1024- and
/// 1-neuron dense layers; leaky-ReLU slope 0.2 after every layer except
/// the scalar head.
template <typename T>
struct Discriminator {
    int n = 0;
    std::vector<Tensor<T>> conv_w, conv_b;
    Tensor<T> fc1_w, fc1_b, fc2_w, fc2_b;

    static Discriminator init(int n, Rng& rng);

    /// img: [B,N,N,1] -> scores [B,1]
    Tensor<T> forward(const Tensor<T>& img) const;

    std::vector<NamedParam<T>> params();
    void clip_weights(T c);
};

/// The generator: back-projection part (absent for deer-fbp) plus the
/// refinement U-net, with the per-variant input wiring.
template <typename T>
struct Generator {
    Variant variant = Variant::DeerNoWgan;
    int n = 0;
    std::optional<BpLayer<T>> bp;
    UNet<T> unet;

    static Generator init(const ExperimentConfig& cfg, Rng& rng);

    struct Out {
        Tensor<T> x;     // final reconstruction [B,N,N,1]
        Tensor<T> x_bp;  // intermediate back-projection output (undefined for deer-fbp)
    };

    /// filtered_dense: [B,Nv',Nd]; fbp_img: [B,N,N,1]
    Out forward(const Tensor<T>& filtered_dense, const Tensor<T>& fbp_img,
                const std::vector<double>& dense_angles) const;

    std::vector<NamedParam<T>> params();
    std::vector<NamedParam<T>> bp_params();
    std::vector<NamedParam<T>> refine_params();
};

/// Refinement alone: concatenate the two N x N inputs on the channel axis
/// and run the U-net.
template <typename T>
Tensor<T> refine(const UNet<T>& unet, const Tensor<T>& bp_image, const Tensor<T>& fbp_image);

/// Magnitude hook for evaluating a lite layer at a view count different
/// from training. With the pi/Nv' weighting inside the layer the factor
/// is exactly 1; legacy mode (no internal weighting) rescales by
/// nv_train/nv_test.
Image lite_rescale(const Image& bp_image, int nv_train, int nv_test,
                   bool internal_scaling = true);

// ---- tensor/image bridging ----

Tensor<float> stack_images(const std::vector<const Image*>& imgs);
Tensor<float> stack_sinograms(const std::vector<const Sinogram*>& sinos);
Image image_from_batch(const Tensor<float>& t, int64_t b, double pixel_size = 1.0);

}  // namespace deer

#include "deer/model.hpp"

#include <cmath>

namespace deer {

namespace op = deer::ops;

namespace {

template <typename T>
Tensor<T> he_uniform(Shape shape, int64_t fan_in, Rng& rng) {
    Tensor<T> t = Tensor<T>::zeros(std::move(shape), true);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    T* p = t.mutable_data();
    for (int64_t i = 0; i < t.numel(); ++i) p[i] = static_cast<T>(rng.uniform(-limit, limit));
    return t;
}

template <typename T>
Tensor<T> glorot_uniform(Shape shape, int64_t fan_in, int64_t fan_out, Rng& rng) {
    Tensor<T> t = Tensor<T>::zeros(std::move(shape), true);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    T* p = t.mutable_data();
    for (int64_t i = 0; i < t.numel(); ++i) p[i] = static_cast<T>(rng.uniform(-limit, limit));
    return t;
}

}  // namespace

// ---- BpLayer ----

template <typename T>
BpLayer<T> BpLayer<T>::init(bool lite, int nv, int nd, int n, Rng& rng) {
    check(nv >= 1 && nd >= 1 && n >= 8, "bp_layer: bad dims nv=", nv, " nd=", nd, " n=", n);
    BpLayer l;
    l.lite = lite;
    l.nv = nv;
    l.nd = nd;
    l.n = n;
    Shape shape = lite ? Shape{n} : Shape{nv, nd, n};
    l.weights = Tensor<T>::zeros(shape, true);
    // start at (approximately) classical FBP: ones plus small noise
    T* p = l.weights.mutable_data();
    for (int64_t i = 0; i < l.weights.numel(); ++i)
        p[i] = static_cast<T>(1.0 + rng.uniform(-0.01, 0.01));
    return l;
}

template <typename T>
BpLayer<T> BpLayer<T>::with_uniform_weights(bool lite, int nv, int nd, int n, T value) {
    BpLayer l;
    l.lite = lite;
    l.nv = nv;
    l.nd = nd;
    l.n = n;
    l.weights = Tensor<T>::full(lite ? Shape{n} : Shape{nv, nd, n}, value, true);
    return l;
}

template <typename T>
Tensor<T> BpLayer<T>::forward(const Tensor<T>& filtered_sino,
                              const std::vector<double>& angles) const {
    check(filtered_sino.rank() == 3, "bp_forward: sinogram batch must be [B,Nv,Nd], got ",
          shape_str(filtered_sino.shape()));
    check(filtered_sino.dim(1) == nv && filtered_sino.dim(2) == nd,
          "bp_forward: sinogram views x detectors ", filtered_sino.dim(1), "x",
          filtered_sino.dim(2), " do not match layer ", nv, "x", nd);
    check(static_cast<int>(angles.size()) == nv, "bp_forward: ", angles.size(),
          " angles for ", nv, " views");
    check(nd == n, "bp_forward: requires n_det == n (got ", nd, " vs ", n, ")");

    Tensor<T> acc;
    for (int v = 0; v < nv; ++v) {
        Tensor<T> row = op::select1(filtered_sino, v);  // [B,Nd]
        Tensor<T> wv = lite ? weights : op::select0(weights, v);
        Tensor<T> lines = op::line_spread(wv, row, n);  // [B,N,Nd,1]
        Tensor<T> rotated = op::rotate_bilinear(lines, angles[static_cast<size_t>(v)]);
        acc = v == 0 ? rotated : op::add(acc, rotated);
    }
    acc = op::scale(acc, static_cast<T>(M_PI / nv));
    return op::fov_mask(acc);
}

// ---- UNet ----

template <typename T>
UNet<T> UNet<T>::init(int in_channels, Rng& rng, ops::Padding padding, bool relu_head) {
    UNet u;
    u.padding = padding;
    u.relu_head = relu_head;
    const int f = u.filters;
    const int k = u.ksize;
    // encoder convs 0..3, bottleneck 4: [KH,KW,Ci,Co]
    // decoder tconvs 5..8: [KH,KW,Co,Ci], inputs are skip concatenations
    for (int l = 0; l < kDepth; ++l) {
        int64_t ci, co;
        Shape shape;
        if (l < 5) {
            ci = l == 0 ? in_channels : f;
            co = f;
            shape = {k, k, ci, co};
        } else {
            ci = 2 * f;
            co = l == kDepth - 1 ? 1 : f;
            shape = {k, k, co, ci};
        }
        const int64_t fan_in = static_cast<int64_t>(k) * k * ci;
        if (l == kDepth - 1)
            u.w.push_back(glorot_uniform<T>(shape, fan_in, k * k * co, rng));
        else
            u.w.push_back(he_uniform<T>(shape, fan_in, rng));
        u.b.push_back(Tensor<T>::zeros({co}, true));
    }
    return u;
}

namespace {

/// Center crop of NHWC spatial dims (valid-padding skip connections).
template <typename T>
Tensor<T> crop_center(const Tensor<T>& t, int64_t h, int64_t w) {
    // expressed through select-free copy: implemented as a narrow special
    // case of concat-style indexing; gradients routed back by offset
    check(t.rank() == 4, "crop_center: expected NHWC");
    const int64_t B = t.dim(0), H = t.dim(1), W = t.dim(2), C = t.dim(3);
    check(h <= H && w <= W && (H - h) % 2 == 0 && (W - w) % 2 == 0,
          "crop_center: cannot crop ", shape_str(t.shape()), " to ", h, "x", w);
    if (h == H && w == W) return t;
    const int64_t oy = (H - h) / 2, ox = (W - w) / 2;
    Tensor<T> out = Tensor<T>::zeros({B, h, w, C},
                                     Tape<T>::recording() && t.requires_grad());
    const T* src = t.data();
    T* dst = out.mutable_data();
    for (int64_t b = 0; b < B; ++b)
        for (int64_t y = 0; y < h; ++y)
            for (int64_t x = 0; x < w; ++x) {
                const T* s = src + (((b * H + y + oy) * W) + x + ox) * C;
                T* d = dst + ((b * h + y) * w + x) * C;
                for (int64_t c = 0; c < C; ++c) d[c] = s[c];
            }
    if (out.requires_grad())
        Tape<T>::current()->record([t, out, B, H, W, C, h, w, oy, ox]() {
            if (!out.has_grad()) return;
            t.ensure_grad();
            const T* g = out.grad();
            T* gt = t.grad_mutable();
            for (int64_t b = 0; b < B; ++b)
                for (int64_t y = 0; y < h; ++y)
                    for (int64_t x = 0; x < w; ++x) {
                        const T* s = g + ((b * h + y) * w + x) * C;
                        T* d = gt + (((b * H + y + oy) * W) + x + ox) * C;
                        for (int64_t c = 0; c < C; ++c) d[c] += s[c];
                    }
        });
    return out;
}

/// Symmetric zero padding of NHWC spatial dims.
template <typename T>
Tensor<T> pad_center(const Tensor<T>& t, int64_t border) {
    check(t.rank() == 4, "pad_center: expected NHWC");
    if (border == 0) return t;
    const int64_t B = t.dim(0), H = t.dim(1), W = t.dim(2), C = t.dim(3);
    const int64_t Hp = H + 2 * border, Wp = W + 2 * border;
    Tensor<T> out = Tensor<T>::zeros({B, Hp, Wp, C},
                                     Tape<T>::recording() && t.requires_grad());
    const T* src = t.data();
    T* dst = out.mutable_data();
    for (int64_t b = 0; b < B; ++b)
        for (int64_t y = 0; y < H; ++y)
            for (int64_t x = 0; x < W; ++x) {
                const T* s = src + ((b * H + y) * W + x) * C;
                T* d = dst + (((b * Hp + y + border) * Wp) + x + border) * C;
                for (int64_t c = 0; c < C; ++c) d[c] = s[c];
            }
    if (out.requires_grad())
        Tape<T>::current()->record([t, out, B, H, W, C, Hp, Wp, border]() {
            if (!out.has_grad()) return;
            t.ensure_grad();
            const T* g = out.grad();
            T* gt = t.grad_mutable();
            for (int64_t b = 0; b < B; ++b)
                for (int64_t y = 0; y < H; ++y)
                    for (int64_t x = 0; x < W; ++x) {
                        const T* s = g + (((b * Hp + y + border) * Wp) + x + border) * C;
                        T* d = gt + ((b * H + y) * W + x) * C;
                        for (int64_t c = 0; c < C; ++c) d[c] += s[c];
                    }
        });
    return out;
}

}  // namespace

template <typename T>
Tensor<T> UNet<T>::forward(const Tensor<T>& x) const {
    check(x.rank() == 4, "unet: input must be NHWC, got ", shape_str(x.shape()));
    check(x.dim(3) == w[0].dim(2), "unet: input channels ", x.dim(3), " do not match first layer ",
          w[0].dim(2));
    const bool valid = padding == ops::Padding::Valid;
    // 5 shrinking convs vs 4 growing tconvs leave a net (k-1) shrink;
    // pre-pad by half of that per side so the output returns to N x N
    Tensor<T> cur = valid ? pad_center(x, (ksize - 1) / 2) : x;

    std::vector<Tensor<T>> skips;
    for (int l = 0; l < 5; ++l) {
        cur = op::conv2d(cur, w[static_cast<size_t>(l)], b[static_cast<size_t>(l)], 1, padding);
        cur = op::relu(cur);
        if (l < 4) skips.push_back(cur);
    }
    for (int l = 5; l < kDepth; ++l) {
        Tensor<T> skip = skips[static_cast<size_t>(kDepth - 1 - l)];  // mirrored encoder layer
        if (valid) skip = crop_center(skip, cur.dim(1), cur.dim(2));
        cur = op::concat_ch(cur, skip);
        cur = op::conv2d_transpose(cur, w[static_cast<size_t>(l)], b[static_cast<size_t>(l)],
                                   padding);
        if (l < kDepth - 1 || relu_head) cur = op::relu(cur);
    }
    check(cur.dim(1) == x.dim(1) && cur.dim(2) == x.dim(2), "unet: internal size error ",
          shape_str(cur.shape()));
    return cur;
}

// ---- Discriminator ----

template <typename T>
Discriminator<T> Discriminator<T>::init(int n, Rng& rng) {
    check(n % 8 == 0, "discriminator: n must be divisible by 8 (three stride-2 layers), got ",
          n);
    Discriminator d;
    d.n = n;
    const int filters[6] = {64, 64, 128, 128, 256, 256};
    int64_t ci = 1;
    for (int l = 0; l < 6; ++l) {
        const int64_t co = filters[l];
        d.conv_w.push_back(he_uniform<T>({3, 3, ci, co}, 9 * ci, rng));
        d.conv_b.push_back(Tensor<T>::zeros({co}, true));
        ci = co;
    }
    const int64_t flat = static_cast<int64_t>(n / 8) * (n / 8) * 256;
    d.fc1_w = he_uniform<T>({flat, 1024}, flat, rng);
    d.fc1_b = Tensor<T>::zeros({1024}, true);
    d.fc2_w = glorot_uniform<T>({1024, 1}, 1024, 1, rng);
    d.fc2_b = Tensor<T>::zeros({1}, true);
    return d;
}

template <typename T>
Tensor<T> Discriminator<T>::forward(const Tensor<T>& img) const {
    check(img.rank() == 4 && img.dim(3) == 1, "discriminator: input must be [B,N,N,1], got ",
          shape_str(img.shape()));
    check(img.dim(1) == n && img.dim(2) == n, "discriminator: expected ", n, "x", n,
          " images, got ", shape_str(img.shape()));
    Tensor<T> cur = img;
    for (int l = 0; l < 6; ++l) {
        const int stride = l % 2 == 0 ? 1 : 2;  // stride 1 on odd layers (1-based), 2 on even
        cur = op::conv2d(cur, conv_w[static_cast<size_t>(l)], conv_b[static_cast<size_t>(l)],
                         stride, op::Padding::Same);
        cur = op::leaky_relu(cur, static_cast<T>(0.2));
    }
    const int64_t flat = cur.dim(1) * cur.dim(2) * cur.dim(3);
    cur = op::reshape(cur, {cur.dim(0), flat});
    cur = op::leaky_relu(op::linear(cur, fc1_w, fc1_b), static_cast<T>(0.2));
    return op::linear(cur, fc2_w, fc2_b);
}

template <typename T>
std::vector<NamedParam<T>> Discriminator<T>::params() {
    std::vector<NamedParam<T>> ps;
    for (size_t l = 0; l < conv_w.size(); ++l) {
        ps.push_back({"disc.conv" + std::to_string(l) + ".w", conv_w[l]});
        ps.push_back({"disc.conv" + std::to_string(l) + ".b", conv_b[l]});
    }
    ps.push_back({"disc.fc1.w", fc1_w});
    ps.push_back({"disc.fc1.b", fc1_b});
    ps.push_back({"disc.fc2.w", fc2_w});
    ps.push_back({"disc.fc2.b", fc2_b});
    return ps;
}

template <typename T>
void Discriminator<T>::clip_weights(T c) {
    check(c > 0, "clip: bound must be positive");
    for (auto& p : params()) {
        T* v = p.tensor.mutable_data();
        for (int64_t i = 0; i < p.tensor.numel(); ++i) v[i] = std::clamp(v[i], -c, c);
    }
}

// ---- Generator ----

template <typename T>
Generator<T> Generator<T>::init(const ExperimentConfig& cfg, Rng& rng) {
    Generator g;
    g.variant = cfg.variant;
    g.n = cfg.n;
    if (cfg.has_bp())
        g.bp = BpLayer<T>::init(cfg.lite(), cfg.resolved_nv_dense(), cfg.resolved_n_det(),
                                cfg.n, rng);
    const ops::Padding pad =
        cfg.padding == "valid" ? ops::Padding::Valid : ops::Padding::Same;
    g.unet = UNet<T>::init(2, rng, pad, cfg.relu_head);
    return g;
}

template <typename T>
typename Generator<T>::Out Generator<T>::forward(const Tensor<T>& filtered_dense,
                                                 const Tensor<T>& fbp_img,
                                                 const std::vector<double>& dense_angles) const {
    Out out;
    switch (variant) {
        case Variant::Deer:
        case Variant::DeerNoWgan:
        case Variant::DeerLite:
            out.x_bp = bp->forward(filtered_dense, dense_angles);
            out.x = unet.forward(op::concat_ch(out.x_bp, fbp_img));
            break;
        case Variant::DeerSino:
            // projection-only input: two copies of the back-projected image
            out.x_bp = bp->forward(filtered_dense, dense_angles);
            out.x = unet.forward(op::concat_ch(out.x_bp, out.x_bp));
            break;
        case Variant::DeerFbp:
            // image-domain baseline: two copies of the few-view FBP image
            out.x = unet.forward(op::concat_ch(fbp_img, fbp_img));
            break;
    }
    return out;
}

template <typename T>
std::vector<NamedParam<T>> Generator<T>::bp_params() {
    std::vector<NamedParam<T>> ps;
    if (bp) ps.push_back({"bp.w", bp->weights});
    return ps;
}

template <typename T>
std::vector<NamedParam<T>> Generator<T>::refine_params() {
    std::vector<NamedParam<T>> ps;
    for (size_t l = 0; l < unet.w.size(); ++l) {
        ps.push_back({"unet.conv" + std::to_string(l) + ".w", unet.w[l]});
        ps.push_back({"unet.conv" + std::to_string(l) + ".b", unet.b[l]});
    }
    return ps;
}

template <typename T>
std::vector<NamedParam<T>> Generator<T>::params() {
    std::vector<NamedParam<T>> ps = bp_params();
    for (auto& p : refine_params()) ps.push_back(p);
    return ps;
}

template <typename T>
Tensor<T> refine(const UNet<T>& unet, const Tensor<T>& bp_image, const Tensor<T>& fbp_image) {
    return unet.forward(op::concat_ch(bp_image, fbp_image));
}

Image lite_rescale(const Image& bp_image, int nv_train, int nv_test, bool internal_scaling) {
    check(nv_train >= 1, "lite_rescale: nv_train must be >= 1, got ", nv_train);
    check(nv_test >= 1, "lite_rescale: nv_test must be >= 1, got ", nv_test);
    // with pi/Nv' folded into the layer the magnitude is already
    // view-count independent
    const double factor =
        internal_scaling ? 1.0 : static_cast<double>(nv_train) / static_cast<double>(nv_test);
    Image out = bp_image;
    for (float& v : out.data) v = static_cast<float>(v * factor);
    return out;
}

// ---- bridging ----

Tensor<float> stack_images(const std::vector<const Image*>& imgs) {
    check(!imgs.empty(), "stack_images: empty batch");
    const int n = imgs[0]->n;
    Tensor<float> t = Tensor<float>::zeros({static_cast<int64_t>(imgs.size()), n, n, 1});
    float* p = t.mutable_data();
    for (size_t b = 0; b < imgs.size(); ++b) {
        check(imgs[b]->n == n, "stack_images: inconsistent image sizes");
        std::copy(imgs[b]->data.begin(), imgs[b]->data.end(),
                  p + b * static_cast<size_t>(n) * n);
    }
    return t;
}

Tensor<float> stack_sinograms(const std::vector<const Sinogram*>& sinos) {
    check(!sinos.empty(), "stack_sinograms: empty batch");
    const int nv = sinos[0]->n_views();
    const int nd = sinos[0]->n_det;
    Tensor<float> t = Tensor<float>::zeros({static_cast<int64_t>(sinos.size()), nv, nd});
    float* p = t.mutable_data();
    for (size_t b = 0; b < sinos.size(); ++b) {
        check(sinos[b]->n_views() == nv && sinos[b]->n_det == nd,
              "stack_sinograms: inconsistent sinogram shapes");
        std::copy(sinos[b]->data.begin(), sinos[b]->data.end(),
                  p + b * static_cast<size_t>(nv) * nd);
    }
    return t;
}

Image image_from_batch(const Tensor<float>& t, int64_t b, double pixel_size) {
    check(t.rank() == 4 && t.dim(3) == 1 && t.dim(1) == t.dim(2),
          "image_from_batch: expected [B,N,N,1], got ", shape_str(t.shape()));
    check(b >= 0 && b < t.dim(0), "image_from_batch: index out of range");
    Image img(static_cast<int>(t.dim(1)), pixel_size);
    const float* p = t.data() + b * t.dim(1) * t.dim(2);
    std::copy(p, p + t.dim(1) * t.dim(2), img.data.begin());
    return img;
}

#define DEER_INSTANTIATE(T)                                                        \
    template struct BpLayer<T>;                                                    \
    template struct UNet<T>;                                                       \
    template struct Discriminator<T>;                                              \
    template struct Generator<T>;                                                  \
    template Tensor<T> refine<T>(const UNet<T>&, const Tensor<T>&, const Tensor<T>&);

DEER_INSTANTIATE(float)
DEER_INSTANTIATE(double)
#undef DEER_INSTANTIATE

}  // namespace deer

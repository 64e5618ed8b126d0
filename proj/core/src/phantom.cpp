#include "deer/phantom.hpp"

#include <algorithm>
#include <cmath>

namespace deer {

std::string to_string(PhantomKind k) {
    return k == PhantomKind::SheppLogan ? "shepp-logan" : "random-ellipses";
}

PhantomKind phantom_kind_from_string(const std::string& s) {
    if (s == "shepp-logan") return PhantomKind::SheppLogan;
    if (s == "random-ellipses") return PhantomKind::RandomEllipses;
    throw std::invalid_argument("unknown phantom kind '" + s + "'");
}

PhantomSpec PhantomSpec::shepp_logan() {
    // Toft's contrast-enhanced variant of the classic head phantom; its
    // values already lie in [0, 1], background 0.
    PhantomSpec s;
    s.kind = PhantomKind::SheppLogan;
    s.ellipses = {
        {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
        {0.22, 0.0, 0.11, 0.31, -18.0 * M_PI / 180.0, -0.2},
        {-0.22, 0.0, 0.16, 0.41, 18.0 * M_PI / 180.0, -0.2},
        {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
        {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
        {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
        {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
        {0.0, -0.605, 0.023, 0.023, 0.0, 0.1},
        {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
    };
    return s;
}

PhantomSpec PhantomSpec::random_ellipses(uint64_t seed) {
    PhantomSpec s;
    s.kind = PhantomKind::RandomEllipses;
    s.seed = seed;
    Rng rng(seed_stream(seed, "phantom"));

    // one large low-intensity background ellipse plus a handful of blobs,
    // some of them negative (cavities); everything kept inside the FOV
    const int extra = static_cast<int>(rng.below(6));  // 2..7 blobs
    Ellipse bg;
    bg.cx = rng.uniform(-0.12, 0.12);
    bg.cy = rng.uniform(-0.12, 0.12);
    bg.ax = rng.uniform(0.55, 0.78);
    bg.ay = rng.uniform(0.55, 0.78);
    bg.angle = rng.uniform(0.0, M_PI);
    bg.intensity = rng.uniform(0.25, 0.45);
    s.ellipses.push_back(bg);

    for (int i = 0; i < 2 + extra; ++i) {
        Ellipse e;
        for (;;) {
            e.cx = rng.uniform(-0.45, 0.45);
            e.cy = rng.uniform(-0.45, 0.45);
            e.ax = rng.uniform(0.06, 0.32);
            e.ay = rng.uniform(0.06, 0.32);
            if (std::hypot(e.cx, e.cy) + std::max(e.ax, e.ay) <= 0.92) break;
        }
        e.angle = rng.uniform(0.0, M_PI);
        e.intensity = rng.uniform(-0.25, 0.55);
        if (std::fabs(e.intensity) < 0.05) e.intensity = 0.05;
        s.ellipses.push_back(e);
    }
    return s;
}

PhantomSpec PhantomSpec::from_ellipses(std::vector<Ellipse> ellipses) {
    PhantomSpec s;
    s.kind = PhantomKind::RandomEllipses;
    s.ellipses = std::move(ellipses);
    return s;
}

namespace {

double sample_ellipses(const std::vector<Ellipse>& es, double u, double v) {
    double acc = 0.0;
    for (const auto& e : es) {
        const double c = std::cos(e.angle);
        const double s = std::sin(e.angle);
        const double du = u - e.cx;
        const double dv = v - e.cy;
        const double ru = (du * c + dv * s) / e.ax;
        const double rv = (-du * s + dv * c) / e.ay;
        if (ru * ru + rv * rv <= 1.0) acc += e.intensity;
    }
    return acc;
}

}  // namespace

Image make_phantom(const PhantomSpec& spec, int n, double pixel_size) {
    check(n >= 8, "make_phantom: n must be >= 8, got ", n);
    for (const auto& e : spec.ellipses)
        check(e.ax > 0 && e.ay > 0, "make_phantom: ellipse axes must be positive, got (", e.ax,
              ", ", e.ay, ")");

    Image img(n, pixel_size);
    const double mid = 0.5 * (n - 1);
    const double inv_r = 1.0 / (0.5 * n);
    // 2x2 subpixel offsets in pixel units
    static const double off[2] = {-0.25, 0.25};
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            double acc = 0.0;
            for (double oy : off)
                for (double ox : off) {
                    const double u = (x + ox - mid) * inv_r;
                    const double v = (y + oy - mid) * inv_r;
                    acc += sample_ellipses(spec.ellipses, u, v);
                }
            img.at(y, x) = static_cast<float>(std::clamp(acc / 4.0, 0.0, 1.0));
        }
    }
    return img;
}

}  // namespace deer

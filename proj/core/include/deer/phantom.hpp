#pragma once

#include <string>
#include <vector>

#include "deer/image.hpp"

namespace deer {

/// Ellipse in normalized field-of-view coordinates: the inscribed circle
/// maps to the unit disk. Intensities are additive.
struct Ellipse {
    double cx = 0, cy = 0;      // center
    double ax = 0, ay = 0;      // semi-axes, must be positive
    double angle = 0;           // CCW rotation, radians
    double intensity = 0;
};

enum class PhantomKind { SheppLogan, RandomEllipses };

std::string to_string(PhantomKind k);
PhantomKind phantom_kind_from_string(const std::string& s);

struct PhantomSpec {
    PhantomKind kind = PhantomKind::RandomEllipses;
    uint64_t seed = 0;
    std::vector<Ellipse> ellipses;

    static PhantomSpec shepp_logan();
    /// Deterministic ellipse set drawn from the seed (pure function).
    static PhantomSpec random_ellipses(uint64_t seed);
    /// Explicit ellipse list (random kind); an empty list renders an
    /// all-zero image.
    static PhantomSpec from_ellipses(std::vector<Ellipse> ellipses);
};

/// Render a phantom at n x n pixels with 2x2 subpixel averaging. Output
/// values are clipped to [0, 1].
Image make_phantom(const PhantomSpec& spec, int n, double pixel_size = 1.0);

}  // namespace deer

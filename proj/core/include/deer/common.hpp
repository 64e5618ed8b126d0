#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace deer {

namespace detail {
inline void format_into(std::ostringstream&) {}
template <typename A, typename... Rest>
void format_into(std::ostringstream& os, const A& a, const Rest&... rest) {
    os << a;
    format_into(os, rest...);
}
}  // namespace detail

template <typename... Args>
std::string strcat_all(const Args&... args) {
    std::ostringstream os;
    detail::format_into(os, args...);
    return os.str();
}

/// Contract check for caller-supplied arguments (shapes, ranges, modes).
template <typename... Args>
void check(bool cond, const Args&... msg) {
    if (!cond) throw std::invalid_argument(strcat_all(msg...));
}

/// Check for runtime conditions (I/O, corrupt files, non-finite values).
template <typename... Args>
void require(bool cond, const Args&... msg) {
    if (!cond) throw std::runtime_error(strcat_all(msg...));
}

/// Deterministic RNG. std::mt19937_64 has a portable bit stream; the
/// distributions below avoid std::uniform_real_distribution and friends,
/// whose output is implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return eng_() % n; }

    /// Box-Muller; consumes two draws per call, no cached spare.
    double normal(double mu = 0.0, double sigma = 1.0) {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mu + sigma * r * std::cos(6.283185307179586476925287 * u2);
    }

    /// Fisher-Yates shuffle with the portable integer draw.
    template <typename Vec>
    void shuffle(Vec& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

/// Mix a label into a seed so sub-streams (init, shuffle, phantom, ...)
/// are independent but reproducible.
inline uint64_t seed_stream(uint64_t seed, const std::string& label) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](uint64_t byte) {
        h ^= byte;
        h *= 1099511628211ull;
    };
    for (int i = 0; i < 8; ++i) mix((seed >> (8 * i)) & 0xff);
    for (unsigned char c : label) mix(c);
    return h;
}

inline uint64_t fnv1a64(const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = 1469598103934665603ull;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace deer

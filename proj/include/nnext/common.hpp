#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace nnext {

/// Bad user input (malformed files, duplicate points, negative data).
struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A convex solve hit its iteration cap without a certificate either way.
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Internal consistency failure of the quadtree decomposition.
struct decomposition_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_finite(double v) { return std::isfinite(v); }

/// Quintic smoothstep w(s) = s^3 (10 - 15 s + 6 s^2) on [0,1].
/// w(0)=w'(0)=w''(0)=0 and w(1)=1, w'(1)=w''(1)=0, so blends built from it
/// keep two continuous derivatives across seam points.
struct SmoothStep {
    double w, dw, ddw;
};

inline SmoothStep smooth_step(double s) {
    if (s <= 0.0) return {0.0, 0.0, 0.0};
    if (s >= 1.0) return {1.0, 0.0, 0.0};
    const double s2 = s * s;
    const double s3 = s2 * s;
    return {s3 * (10.0 - 15.0 * s + 6.0 * s2),
            30.0 * s2 * (1.0 - s) * (1.0 - s),
            60.0 * s * (1.0 - 3.0 * s + 2.0 * s2)};
}

/// Plateau profile in one scalar variable r (usually a radius):
/// identically 1 for r <= r_in, identically 0 for r >= r_out, quintic in
/// between. Returns value and first/second derivative with respect to r.
struct PlateauEval {
    double v, d1, d2;
};

inline PlateauEval plateau(double r, double r_in, double r_out) {
    if (r <= r_in) return {1.0, 0.0, 0.0};
    if (r >= r_out) return {0.0, 0.0, 0.0};
    const double len = r_out - r_in;
    const double s = (r - r_in) / len;
    const SmoothStep ws = smooth_step(s);
    return {1.0 - ws.w, -ws.dw / len, -ws.ddw / (len * len)};
}

/// FNV-1a over raw bytes; used to fingerprint datasets for audit reports.
inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t seed = 1469598103934665603ull) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t hash_double(double v, std::uint64_t seed) {
    return fnv1a(&v, sizeof v, seed);
}

} // namespace nnext

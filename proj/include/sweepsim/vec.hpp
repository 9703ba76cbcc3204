#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sweepsim {

// States and directions are small dense vectors (the worked 1-D scenarios
// dominate; generic operations work for any finite dimension).
using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

inline double dist(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dist: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sub: dimension mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec add(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("add: dimension mismatch");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec scaled(const Vec& a, double c) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

// r += c * a
inline void add_scaled(Vec& r, double c, const Vec& a) {
    if (r.size() != a.size()) throw std::invalid_argument("add_scaled: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += c * a[i];
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

inline Vec normalized(const Vec& a) {
    const double n = norm(a);
    if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
    return scaled(a, 1.0 / n);
}

}  // namespace sweepsim

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fraclab {

template <int N>
using Vec = std::array<double, N>;

template <int N>
inline double dot(const Vec<N>& a, const Vec<N>& b) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <int N>
inline double norm(const Vec<N>& a) {
    return std::sqrt(dot<N>(a, a));
}

template <int N>
inline double dist(const Vec<N>& a, const Vec<N>& b) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Axis-aligned box [lo, hi].
template <int N>
struct Box {
    Vec<N> lo{};
    Vec<N> hi{};

    bool operator==(const Box&) const = default;

    double side(int i) const { return hi[i] - lo[i]; }

    double volume() const {
        double v = 1.0;
        for (int i = 0; i < N; ++i) v *= side(i);
        return v;
    }

    Vec<N> center() const {
        Vec<N> c;
        for (int i = 0; i < N; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }

    double diameter() const {
        double s = 0.0;
        for (int i = 0; i < N; ++i) s += side(i) * side(i);
        return std::sqrt(s);
    }

    bool contains(const Vec<N>& x) const {
        for (int i = 0; i < N; ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }

    bool contains_strict(const Vec<N>& x) const {
        for (int i = 0; i < N; ++i)
            if (x[i] <= lo[i] || x[i] >= hi[i]) return false;
        return true;
    }

    bool contains_box(const Box& b) const {
        for (int i = 0; i < N; ++i)
            if (b.lo[i] < lo[i] || b.hi[i] > hi[i]) return false;
        return true;
    }

    /// Open-interior overlap (positive volume intersection).
    bool overlaps_open(const Box& b) const {
        for (int i = 0; i < N; ++i)
            if (b.lo[i] >= hi[i] || b.hi[i] <= lo[i]) return false;
        return true;
    }

    /// Closed boxes touching (shared faces/edges/corners count).
    bool touches(const Box& b) const {
        for (int i = 0; i < N; ++i)
            if (b.lo[i] > hi[i] || b.hi[i] < lo[i]) return false;
        return true;
    }

    Box intersection(const Box& b) const {
        Box r;
        for (int i = 0; i < N; ++i) {
            r.lo[i] = std::max(lo[i], b.lo[i]);
            r.hi[i] = std::min(hi[i], b.hi[i]);
            if (r.hi[i] < r.lo[i]) r.hi[i] = r.lo[i];
        }
        return r;
    }

    /// Euclidean distance from a point to this box (0 inside).
    double dist_to(const Vec<N>& x) const {
        double s = 0.0;
        for (int i = 0; i < N; ++i) {
            const double g = std::max({0.0, lo[i] - x[i], x[i] - hi[i]});
            s += g * g;
        }
        return std::sqrt(s);
    }

    /// Sup-norm distance from a point to this box (0 inside).
    double supdist_to(const Vec<N>& x) const {
        double s = 0.0;
        for (int i = 0; i < N; ++i)
            s = std::max({s, lo[i] - x[i], x[i] - hi[i]});
        return std::max(s, 0.0);
    }

    /// Euclidean distance between two boxes (0 if they touch or overlap).
    double dist_to_box(const Box& b) const {
        double s = 0.0;
        for (int i = 0; i < N; ++i) {
            const double g = std::max({0.0, b.lo[i] - hi[i], lo[i] - b.hi[i]});
            s += g * g;
        }
        return std::sqrt(s);
    }

    /// Signed distance to the box boundary: > 0 inside, < 0 outside.
    double signed_dist(const Vec<N>& x) const {
        bool in = true;
        double depth = std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i) {
            const double d = std::min(x[i] - lo[i], hi[i] - x[i]);
            if (d < 0) in = false;
            depth = std::min(depth, d);
        }
        if (in) return depth;
        return -dist_to(x);
    }

    /// Dilation about the center by factor r.
    Box dilated(double r) const {
        Box b;
        const Vec<N> c = center();
        for (int i = 0; i < N; ++i) {
            const double half = 0.5 * r * side(i);
            b.lo[i] = c[i] - half;
            b.hi[i] = c[i] + half;
        }
        return b;
    }

    template <typename F>
    void for_each_corner(F&& f) const {
        for (int mask = 0; mask < (1 << N); ++mask) {
            Vec<N> c;
            for (int i = 0; i < N; ++i) c[i] = (mask >> i) & 1 ? hi[i] : lo[i];
            f(c);
        }
    }
};

/// Compensated (Kahan) accumulator; used wherever a fixed summation
/// order is part of the reproducibility contract.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }

    double value() const { return sum; }
};

/// splitmix64; fixtures must be bit-reproducible across platforms, so no
/// std::uniform_* distributions anywhere near them.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, m).
    std::uint64_t next_below(std::uint64_t m) { return next_u64() % m; }

private:
    std::uint64_t state_;
};

inline double sphere_area(int n) {
    // |S^{n-1}|: 2pi for n=2, 4pi for n=3
    if (n == 2) return 2.0 * M_PI;
    if (n == 3) return 4.0 * M_PI;
    throw std::invalid_argument("sphere_area: dimension must be 2 or 3");
}

}  // namespace fraclab

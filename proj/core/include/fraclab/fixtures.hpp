#pragma once

#include "fraclab/grid.hpp"

namespace fraclab {

/// Deterministic test-function families on a domain grid.
///
/// Names: linear, radial_bump, log_bump, two_level, random_smooth.
/// random_smooth draws a seeded low-frequency cosine mixture; every
/// other family ignores the seed. Generation is bit-reproducible.
template <int N>
GridFunction<N> fixture(std::shared_ptr<const Domain<N>> dom, int level, const std::string& name,
                        std::uint64_t seed = 0, int smooth_terms = 4) {
    const Vec<N> c = dom->window.center();
    if (name == "linear") {
        return GridFunction<N>::sample(dom, level, [](const Vec<N>& x) { return x[0]; });
    }
    if (name == "radial_bump") {
        // C^1 bump supported on the ball of radius 0.35·window min-side
        double r0 = std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i) r0 = std::min(r0, dom->window.side(i));
        r0 *= 0.35;
        return GridFunction<N>::sample(dom, level, [c, r0](const Vec<N>& x) {
            const double t = dist<N>(x, c) / r0;
            const double s = std::max(0.0, 1.0 - t * t);
            return s * s;
        });
    }
    if (name == "log_bump") {
        // truncated logarithm of the boundary distance, radii (r, R)
        const double r = 0.125, R = 0.625;
        auto domc = dom;
        return GridFunction<N>::sample(dom, level, [domc, r, R](const Vec<N>& x) {
            const double d = domc->dist_boundary(x);
            if (d <= 0.0) return 0.0;
            return std::clamp(1.0 - std::log(d / r) / std::log(R / r), 0.0, 1.0);
        });
    }
    if (name == "two_level") {
        const double mid = c[0];
        return GridFunction<N>::sample(dom, level, [mid](const Vec<N>& x) { return x[0] < mid ? 1.0 : 0.0; });
    }
    if (name == "random_smooth") {
        SplitMix64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x853c49e6748fea9bULL);
        struct Term {
            std::array<double, N> w;
            double amp, phase;
        };
        std::vector<Term> terms(static_cast<std::size_t>(smooth_terms));
        for (auto& t : terms) {
            double wn = 0.0;
            for (int i = 0; i < N; ++i) {
                t.w[i] = 1.0 + static_cast<double>(rng.next_below(3));
                wn += t.w[i] * t.w[i];
            }
            t.amp = (2.0 * rng.next_double() - 1.0) / (1.0 + std::sqrt(wn));
            t.phase = 2.0 * M_PI * rng.next_double();
        }
        return GridFunction<N>::sample(dom, level, [terms](const Vec<N>& x) {
            double v = 0.0;
            for (const auto& t : terms) {
                double arg = t.phase;
                for (int i = 0; i < N; ++i) arg += 2.0 * M_PI * t.w[i] * x[i];
                v += t.amp * std::cos(arg);
            }
            return v;
        });
    }
    throw std::invalid_argument("fixture: unknown family '" + name + "'");
}

/// A seeded list from one family (random_smooth varies the seed, other
/// families are replicated once).
template <int N>
std::vector<GridFunction<N>> fixture_family(std::shared_ptr<const Domain<N>> dom, int level,
                                            const std::string& name, std::uint64_t seed, std::size_t count) {
    std::vector<GridFunction<N>> out;
    if (name == "random_smooth") {
        for (std::size_t i = 0; i < count; ++i) out.push_back(fixture<N>(dom, level, name, seed + i));
    } else {
        out.push_back(fixture<N>(dom, level, name, seed));
    }
    return out;
}

}  // namespace fraclab

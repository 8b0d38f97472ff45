#pragma once

#include <queue>

#include "fraclab/whitney.hpp"

namespace fraclab {

template <int N>
struct JohnCurveResult {
    bool found = false;
    std::vector<Vec<N>> polyline;  // witness on success
    double length = 0.0;
};

namespace detail {

/// Locates the accepted cube whose closure contains x (walking up the
/// ancestor chain from the finest level); npos when x sits in an
/// unresolved region.
template <int N>
std::size_t locate_cube(const WhitneyFamily<N>& fam, const Vec<N>& x) {
    std::unordered_map<CubeKey<N>, std::size_t, CubeKeyHash<N>> have;
    for (std::size_t i = 0; i < fam.cubes.size(); ++i)
        have[{fam.cubes[i].level, fam.cubes[i].index}] = i;
    const double h = std::ldexp(1.0, -fam.max_level);
    DyadicCube<N> walk;
    walk.level = fam.max_level;
    for (int i = 0; i < N; ++i) walk.index[i] = static_cast<std::int64_t>(std::floor(x[i] / h));
    for (int lev = fam.max_level; lev >= fam.domain->window_level; --lev) {
        if (auto it = have.find({walk.level, walk.index}); it != have.end()) return it->second;
        walk = walk.parent();
    }
    return static_cast<std::size_t>(-1);
}

/// Cigar condition along the arc-length parametrized polyline:
/// dist(gamma(t), ∂D) >= min(t, len - t)/c at dense samples.
template <int N>
bool cigar_ok(const Domain<N>& dom, const std::vector<Vec<N>>& poly, double c, double* out_len = nullptr) {
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) len += dist<N>(poly[i], poly[i + 1]);
    if (out_len) *out_len = len;
    if (len == 0.0) return true;
    double t = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        const double seg = dist<N>(poly[i], poly[i + 1]);
        const int samples = 16;
        for (int s = 0; s <= samples; ++s) {
            const double frac = static_cast<double>(s) / samples;
            Vec<N> p;
            for (int d = 0; d < N; ++d) p[d] = poly[i][d] + frac * (poly[i + 1][d] - poly[i][d]);
            const double tt = t + frac * seg;
            const double need = std::min(tt, len - tt) / c;
            if (dom.dist_boundary(p) < need - 1e-12) return false;
        }
        t += seg;
    }
    return true;
}

}  // namespace detail

/// Searches for a c-John curve between two points as a path through the
/// Whitney adjacency graph, then verifies the cigar condition on the
/// polyline witness. A false answer means "no witness found at this
/// resolution", not a disproof.
template <int N>
JohnCurveResult<N> john_curve_exists(std::shared_ptr<const Domain<N>> dom, const Vec<N>& x1, const Vec<N>& x2,
                                     double c, int max_level = 7) {
    if (c < 1.0) throw std::invalid_argument("john_curve_exists: c must be >= 1");
    if (!dom->inside(x1) || !dom->inside(x2))
        throw std::invalid_argument("john_curve_exists: endpoints must lie inside the domain");
    JohnCurveResult<N> res;
    if (x1 == x2) {
        res.found = true;
        res.polyline = {x1};
        return res;
    }
    const auto fam = whitney_decompose<N>(dom, max_level);
    const std::size_t a = detail::locate_cube<N>(fam, x1);
    const std::size_t b = detail::locate_cube<N>(fam, x2);
    if (a == static_cast<std::size_t>(-1) || b == static_cast<std::size_t>(-1)) return res;
    const auto adj = cube_adjacency(fam, /*face_only=*/true);

    auto dijkstra = [&](const std::function<double(std::size_t, std::size_t)>& weight) {
        constexpr double INF = std::numeric_limits<double>::infinity();
        std::vector<double> d(fam.size(), INF);
        std::vector<std::ptrdiff_t> par(fam.size(), -1);
        using Node = std::pair<double, std::size_t>;
        std::priority_queue<Node, std::vector<Node>, std::greater<>> pq;
        d[a] = 0.0;
        pq.push({0.0, a});
        while (!pq.empty()) {
            const auto [dv, v] = pq.top();
            pq.pop();
            if (dv > d[v]) continue;
            if (v == b) break;
            for (std::size_t w : adj[v]) {
                const double nd = dv + weight(v, w);
                if (nd < d[w]) {
                    d[w] = nd;
                    par[w] = static_cast<std::ptrdiff_t>(v);
                    pq.push({nd, w});
                }
            }
        }
        std::vector<Vec<N>> poly;
        if (d[b] == INF) return poly;
        std::vector<std::size_t> cubes;
        for (std::ptrdiff_t v = static_cast<std::ptrdiff_t>(b); v >= 0; v = par[static_cast<std::size_t>(v)])
            cubes.push_back(static_cast<std::size_t>(v));
        std::reverse(cubes.begin(), cubes.end());
        poly.push_back(x1);
        for (std::size_t id : cubes) poly.push_back(fam.cubes[id].center());
        poly.push_back(x2);
        return poly;
    };

    auto euclid = [&](std::size_t v, std::size_t w) {
        return dist<N>(fam.cubes[v].center(), fam.cubes[w].center());
    };
    auto clearance = [&](std::size_t v, std::size_t w) {
        return euclid(v, w) / std::min(fam.dist[v], fam.dist[w]);
    };

    for (auto& weight : {std::function<double(std::size_t, std::size_t)>(euclid),
                         std::function<double(std::size_t, std::size_t)>(clearance)}) {
        const auto poly = dijkstra(weight);
        if (poly.empty()) continue;
        double len = 0.0;
        if (detail::cigar_ok<N>(*dom, poly, c, &len)) {
            res.found = true;
            res.polyline = poly;
            res.length = len;
            return res;
        }
    }
    return res;
}

}  // namespace fraclab

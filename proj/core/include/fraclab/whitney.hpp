#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fraclab/geometry.hpp"

namespace fraclab {

template <int N>
struct CubeKey {
    int level;
    std::array<std::int64_t, N> index;
    bool operator==(const CubeKey&) const = default;
};

template <int N>
struct CubeKeyHash {
    std::size_t operator()(const CubeKey<N>& k) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(k.level);
        for (int i = 0; i < N; ++i) {
            h ^= static_cast<std::uint64_t>(k.index[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h *= 0xbf58476d1ce4e5b9ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Whitney decomposition of domain ∩ window: pairwise-disjoint dyadic
/// cubes with diam(Q) <= dist(Q, ∂G) <= 4 diam(Q) ([S, VI 1] constants).
/// kappa > 1 marks the refined family with kappa·(9/8)Q ⊂ G per cube.
template <int N>
struct WhitneyFamily {
    std::shared_ptr<const Domain<N>> domain;
    double kappa = 1.0;
    int max_level = 0;
    /// Split depth applied by refine_kappa (0 for the raw decomposition).
    int split_depth_max = 0;

    std::vector<DyadicCube<N>> cubes;
    std::vector<double> dist;  // exact setwise distance per cube
    std::vector<DyadicCube<N>> unresolved;
    std::map<int, std::vector<std::size_t>> by_level;

    std::size_t size() const { return cubes.size(); }

    void rebuild_index() {
        by_level.clear();
        for (std::size_t i = 0; i < cubes.size(); ++i) by_level[cubes[i].level].push_back(i);
    }

    /// Sorts cubes lexicographically by (level, index); call after bulk edits.
    void normalize() {
        std::vector<std::size_t> order(cubes.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::pair(cubes[a].level, cubes[a].index) < std::pair(cubes[b].level, cubes[b].index);
        });
        std::vector<DyadicCube<N>> c2(cubes.size());
        std::vector<double> d2(cubes.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            c2[i] = cubes[order[i]];
            d2[i] = dist[order[i]];
        }
        cubes.swap(c2);
        dist.swap(d2);
        rebuild_index();
    }
};

/// Standard top-down decomposition. Cubes at max_level that still fail
/// the acceptance predicate are reported in `unresolved`, not dropped.
template <int N>
WhitneyFamily<N> whitney_decompose(std::shared_ptr<const Domain<N>> domain, int max_level) {
    if (max_level < domain->window_level)
        throw std::invalid_argument("whitney_decompose: max_level coarser than the window lattice");
    WhitneyFamily<N> fam;
    fam.domain = domain;
    fam.max_level = max_level;

    const int top = domain->window_level;
    const double top_side = std::ldexp(1.0, -top);
    std::array<std::int64_t, N> k0, k1;
    for (int i = 0; i < N; ++i) {
        k0[i] = static_cast<std::int64_t>(std::floor(domain->window.lo[i] / top_side));
        k1[i] = static_cast<std::int64_t>(std::ceil(domain->window.hi[i] / top_side));
    }

    std::vector<DyadicCube<N>> stack;
    std::array<std::int64_t, N> it = k0;
    for (;;) {
        DyadicCube<N> q{top, it};
        stack.push_back(q);
        int axis = 0;
        while (axis < N && ++it[axis] == k1[axis]) {
            it[axis] = k0[axis];
            ++axis;
        }
        if (axis == N) break;
    }

    while (!stack.empty()) {
        const DyadicCube<N> q = stack.back();
        stack.pop_back();
        const Box<N> b = q.box();
        if (!b.overlaps_open(domain->window)) continue;
        if (!domain->cube_intersects(b)) continue;
        const double d = domain->cube_dist(b);
        if (d >= q.diam()) {
            fam.cubes.push_back(q);
            fam.dist.push_back(d);
        } else if (q.level < max_level) {
            for (int m = 0; m < (1 << N); ++m) stack.push_back(q.child(m));
        } else {
            fam.unresolved.push_back(q);
        }
    }
    fam.normalize();
    std::sort(fam.unresolved.begin(), fam.unresolved.end());
    return fam;
}

/// Minimal per-cube split depth so that kappa·(9/8)·diam(child) <=
/// dist(child, ∂G) for every child; the minimum of dist over the 2^{sN}
/// children equals dist(Q), so the condition is resolved on Q itself.
template <int N>
int kappa_split_depth(const DyadicCube<N>& q, double q_dist, double kappa) {
    const double need = kappa * (9.0 / 8.0) * q.diam();
    if (need <= q_dist) return 0;
    return static_cast<int>(std::ceil(std::log2(need / q_dist)));
}

/// Uniform bound on the split depth over any Whitney family (dist >= diam).
inline int kappa_split_depth_bound(double kappa) {
    return std::max(0, static_cast<int>(std::ceil(std::log2(kappa * 9.0 / 8.0))));
}

template <int N>
WhitneyFamily<N> refine_kappa(const WhitneyFamily<N>& fam, double kappa) {
    if (kappa < 1.0) throw std::invalid_argument("refine_kappa: kappa must be >= 1");
    WhitneyFamily<N> out;
    out.domain = fam.domain;
    out.kappa = kappa;
    out.max_level = fam.max_level;
    out.unresolved = fam.unresolved;
    for (std::size_t i = 0; i < fam.cubes.size(); ++i) {
        const int s = kappa_split_depth(fam.cubes[i], fam.dist[i], kappa);
        out.split_depth_max = std::max(out.split_depth_max, s);
        std::vector<DyadicCube<N>> level{fam.cubes[i]};
        for (int step = 0; step < s; ++step) {
            std::vector<DyadicCube<N>> next;
            next.reserve(level.size() << N);
            for (const auto& q : level)
                for (int m = 0; m < (1 << N); ++m) next.push_back(q.child(m));
            level.swap(next);
        }
        for (const auto& q : level) {
            out.cubes.push_back(q);
            out.dist.push_back(fam.domain->cube_dist(q.box()));
        }
        out.max_level = std::max(out.max_level, fam.cubes[i].level + s);
    }
    out.normalize();
    return out;
}

/// Corner-test: kappa·(9/8)Q strictly inside the domain.
template <int N>
bool kappa_star_ok(const Domain<N>& d, const DyadicCube<N>& q, double kappa) {
    return d.cube_dist(q.dilated(kappa * 9.0 / 8.0)) > 0.0;
}

/// kappa·Q strictly inside the domain (the A-functional admissibility).
template <int N>
bool kappa_ok(const Domain<N>& d, const DyadicCube<N>& q, double kappa) {
    return d.cube_dist(q.dilated(kappa)) > 0.0;
}

/// Splits `candidates` (indices into boxes) into maximal pairwise-
/// disjoint families, greedily by descending score with lexicographic
/// tie-break. Every candidate lands in exactly one family; each family
/// is maximal against the candidates remaining when it was formed.
template <int N>
std::vector<std::vector<std::size_t>> greedy_disjoint_partition(const std::vector<Box<N>>& boxes,
                                                                const std::vector<double>& scores) {
    std::vector<std::size_t> order(boxes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return std::lexicographical_compare(boxes[a].lo.begin(), boxes[a].lo.end(), boxes[b].lo.begin(),
                                            boxes[b].lo.end());
    });
    std::vector<std::vector<std::size_t>> families;
    std::vector<bool> used(boxes.size(), false);
    std::size_t remaining = boxes.size();
    while (remaining > 0) {
        std::vector<std::size_t> fam;
        for (std::size_t id : order) {
            if (used[id]) continue;
            bool ok = true;
            for (std::size_t chosen : fam)
                if (boxes[id].overlaps_open(boxes[chosen])) {
                    ok = false;
                    break;
                }
            if (ok) {
                fam.push_back(id);
                used[id] = true;
                --remaining;
            }
        }
        families.push_back(std::move(fam));
    }
    return families;
}

/// Greedy lower-bound families for the A-functional supremum: cubes of
/// the (refined) family with kappa·Q ⊂ G, partitioned into disjoint
/// families by descending score.
template <int N>
std::vector<std::vector<std::size_t>> greedy_disjoint_families(
    const WhitneyFamily<N>& fam, double kappa, const std::function<double(const DyadicCube<N>&)>& score) {
    std::vector<std::size_t> cand;
    for (std::size_t i = 0; i < fam.cubes.size(); ++i)
        if (kappa_ok(*fam.domain, fam.cubes[i], kappa)) cand.push_back(i);
    std::vector<Box<N>> boxes(cand.size());
    std::vector<double> scores(cand.size());
    for (std::size_t j = 0; j < cand.size(); ++j) {
        boxes[j] = fam.cubes[cand[j]].box();
        scores[j] = score(fam.cubes[cand[j]]);
    }
    auto families = greedy_disjoint_partition<N>(boxes, scores);
    for (auto& f : families)
        for (auto& id : f) id = cand[id];
    return families;
}

/// Touching-closure adjacency lists (shared faces, edges or corners).
/// face_only restricts to neighbors sharing an (N-1)-face portion.
template <int N>
std::vector<std::vector<std::size_t>> cube_adjacency(const WhitneyFamily<N>& fam, bool face_only = false) {
    const std::size_t M = fam.size();
    std::vector<std::vector<std::size_t>> adj(M);
    if (M == 0) return adj;
    double max_side = 0.0;
    for (const auto& q : fam.cubes) max_side = std::max(max_side, q.side());
    const double bs = max_side;
    std::unordered_map<CubeKey<N>, std::vector<std::size_t>, CubeKeyHash<N>> buckets;
    auto bucket_of = [&](double v) { return static_cast<std::int64_t>(std::floor(v / bs)); };
    for (std::size_t i = 0; i < M; ++i) {
        const Box<N> b = fam.cubes[i].box();
        std::array<std::int64_t, N> b0, b1;
        for (int d = 0; d < N; ++d) {
            b0[d] = bucket_of(b.lo[d]);
            b1[d] = bucket_of(b.hi[d] - 1e-12 * bs);
        }
        std::array<std::int64_t, N> it = b0;
        for (;;) {
            buckets[{0, it}].push_back(i);
            int axis = 0;
            while (axis < N && ++it[axis] > b1[axis]) {
                it[axis] = b0[axis];
                ++axis;
            }
            if (axis == N) break;
        }
    }
    auto face_touch = [&](const Box<N>& a, const Box<N>& b) {
        int touching_axis = -1;
        for (int d = 0; d < N; ++d) {
            if (a.lo[d] > b.hi[d] || b.lo[d] > a.hi[d]) return false;
            const bool pt_contact = a.lo[d] == b.hi[d] || b.lo[d] == a.hi[d];
            if (pt_contact) {
                if (touching_axis >= 0) return false;  // edge or corner contact
                touching_axis = d;
            }
        }
        if (touching_axis < 0) return false;  // overlapping interiors cannot happen for disjoint cubes
        for (int d = 0; d < N; ++d) {
            if (d == touching_axis) continue;
            // require positive-length overlap transverse to the contact
            if (std::min(a.hi[d], b.hi[d]) - std::max(a.lo[d], b.lo[d]) <= 0) return false;
        }
        return true;
    };
    // Contact through the boundary is not adjacency: the shared contact
    // set must keep positive distance to ∂G (this is what separates the
    // two sides of a slit whose cubes have touching closures).
    auto contact_inside = [&](const Box<N>& a, const Box<N>& b) {
        Box<N> contact;
        for (int d = 0; d < N; ++d) {
            contact.lo[d] = std::max(a.lo[d], b.lo[d]);
            contact.hi[d] = std::min(a.hi[d], b.hi[d]);
        }
        return fam.domain->cube_dist(contact) > 0.0;
    };
    std::vector<std::unordered_set<std::size_t>> seen(M);
    for (auto& [key, ids] : buckets) {
        std::vector<std::size_t> cand;
        std::array<std::int64_t, N> delta{};
        for (int d = 0; d < N; ++d) delta[d] = -1;
        for (;;) {
            CubeKey<N> k2 = key;
            for (int d = 0; d < N; ++d) k2.index[d] += delta[d];
            if (auto it2 = buckets.find(k2); it2 != buckets.end())
                cand.insert(cand.end(), it2->second.begin(), it2->second.end());
            int axis = 0;
            while (axis < N && ++delta[axis] > 1) {
                delta[axis] = -1;
                ++axis;
            }
            if (axis == N) break;
        }
        for (std::size_t i : ids)
            for (std::size_t j : cand) {
                if (j <= i) continue;
                if (seen[i].count(j)) continue;
                const Box<N> a = fam.cubes[i].box();
                const Box<N> b = fam.cubes[j].box();
                const bool adjacentp = (face_only ? face_touch(a, b) : a.touches(b)) && contact_inside(a, b);
                if (adjacentp) {
                    adj[i].push_back(j);
                    adj[j].push_back(i);
                }
                seen[i].insert(j);
            }
    }
    for (auto& v : adj) std::sort(v.begin(), v.end());
    return adj;
}

/// Measure of domain-inside lattice cells (at max_level) not covered by
/// accepted or unresolved cubes; 0 by construction, audited honestly.
template <int N>
double uncovered_measure(const WhitneyFamily<N>& fam) {
    const auto& dom = *fam.domain;
    std::unordered_set<CubeKey<N>, CubeKeyHash<N>> have;
    for (const auto& q : fam.cubes) have.insert({q.level, q.index});
    for (const auto& q : fam.unresolved) have.insert({q.level, q.index});
    const int g = fam.max_level;
    const double h = std::ldexp(1.0, -g);
    std::array<std::int64_t, N> c0, c1;
    for (int i = 0; i < N; ++i) {
        c0[i] = static_cast<std::int64_t>(std::llround(dom.window.lo[i] / h));
        c1[i] = static_cast<std::int64_t>(std::llround(dom.window.hi[i] / h));
    }
    std::size_t uncovered = 0;
    std::array<std::int64_t, N> it = c0;
    for (;;) {
        DyadicCube<N> cell{g, it};
        if (dom.inside(cell.center())) {
            bool covered = false;
            DyadicCube<N> walk = cell;
            for (int lev = g; lev >= fam.domain->window_level; --lev) {
                if (have.count({walk.level, walk.index})) {
                    covered = true;
                    break;
                }
                walk = walk.parent();
            }
            if (!covered) ++uncovered;
        }
        int axis = 0;
        while (axis < N && ++it[axis] == c1[axis]) {
            it[axis] = c0[axis];
            ++axis;
        }
        if (axis == N) break;
    }
    return static_cast<double>(uncovered) * std::pow(h, N);
}

/// Pointwise bound on sum of chi_{Q*} over the family, evaluated at the
/// max_level cell centers.
template <int N>
int star_overlap_max(const WhitneyFamily<N>& fam) {
    const int g = fam.max_level;
    const double h = std::ldexp(1.0, -g);
    const auto& win = fam.domain->window;
    std::array<std::int64_t, N> dims{}, c0{};
    std::size_t total = 1;
    for (int i = 0; i < N; ++i) {
        c0[i] = static_cast<std::int64_t>(std::llround(win.lo[i] / h));
        dims[i] = static_cast<std::int64_t>(std::llround(win.hi[i] / h)) - c0[i];
        total *= static_cast<std::size_t>(dims[i]);
    }
    std::vector<int> count(total, 0);
    auto flat = [&](const std::array<std::int64_t, N>& c) {
        std::size_t f = 0;
        for (int i = N - 1; i >= 0; --i) f = f * dims[i] + static_cast<std::size_t>(c[i] - c0[i]);
        return f;
    };
    for (const auto& q : fam.cubes) {
        const Box<N> s = q.star();
        std::array<std::int64_t, N> a, b;
        bool empty = false;
        for (int i = 0; i < N; ++i) {
            a[i] = std::max<std::int64_t>(c0[i], static_cast<std::int64_t>(std::floor(s.lo[i] / h)));
            b[i] = std::min<std::int64_t>(c0[i] + dims[i] - 1, static_cast<std::int64_t>(std::floor(s.hi[i] / h)));
            if (a[i] > b[i]) empty = true;
        }
        if (empty) continue;
        std::array<std::int64_t, N> it = a;
        for (;;) {
            Vec<N> ctr;
            for (int i = 0; i < N; ++i) ctr[i] = (static_cast<double>(it[i]) + 0.5) * h;
            if (s.contains_strict(ctr)) ++count[flat(it)];
            int axis = 0;
            while (axis < N && ++it[axis] > b[axis]) {
                it[axis] = a[axis];
                ++axis;
            }
            if (axis == N) break;
        }
    }
    int mx = 0;
    for (int c : count) mx = std::max(mx, c);
    return mx;
}

/// JSON-lines dump {level, index, dist, kappa_ok} for visualization.
template <int N>
void write_jsonl(const WhitneyFamily<N>& fam, std::ostream& os) {
    for (std::size_t i = 0; i < fam.cubes.size(); ++i) {
        nlohmann::json j;
        j["level"] = fam.cubes[i].level;
        j["index"] = fam.cubes[i].index;
        j["dist"] = fam.dist[i];
        j["kappa_ok"] = fam.kappa <= 1.0 || kappa_star_ok(*fam.domain, fam.cubes[i], fam.kappa);
        os << j.dump() << "\n";
    }
    for (const auto& q : fam.unresolved) {
        nlohmann::json j;
        j["level"] = q.level;
        j["index"] = q.index;
        j["unresolved"] = true;
        os << j.dump() << "\n";
    }
}

}  // namespace fraclab

#pragma once

#include <cmath>
#include <optional>

#include "fraclab/grid.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/whitney.hpp"

namespace fraclab {

/// np/(n - delta p), the Sobolev-critical exponent.
inline double critical_q(double delta, double p, int n) {
    if (p < 1.0) throw std::invalid_argument("critical_q: p must be >= 1");
    if (delta < 0.0 || delta >= 1.0) throw std::invalid_argument("critical_q: delta must lie in [0,1)");
    if (p >= n / delta) throw std::invalid_argument("critical_q: requires p < n/delta");
    return n * p / (n - delta * p);
}

struct FracParams {
    double delta = 0.5;
    double p = 2.0;
    double tau = 0.5;
    double kappa = 1.0;
    std::optional<double> q_free;  // set for non-critical exponents

    double q(int n) const { return q_free ? *q_free : critical_q(delta, p, n); }

    /// Hardy weight exponent q(delta + n(1/q - 1/p)).
    double hardy_weight(int n) const {
        const double qq = q(n);
        return qq * (delta + n * (1.0 / qq - 1.0 / p));
    }

    void validate() const {
        if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("FracParams: delta must lie in (0,1)");
        if (p < 1.0) throw std::invalid_argument("FracParams: p must be >= 1");
        if (tau <= 0.0 || tau >= 1.0) throw std::invalid_argument("FracParams: tau must lie in (0,1)");
        if (kappa < 1.0) throw std::invalid_argument("FracParams: kappa must be >= 1");
    }
};

/// Seminorm evaluation: `value` is the seminorm |u| (the 1/p power of
/// the pair sum), `integral` the raw double sum, `same_cell_band` the
/// analytic bound on the omitted same-cell contribution.
struct SeminormValue {
    double value = 0.0;
    double integral = 0.0;
    double same_cell_band = 0.0;
};

namespace detail {

inline double pow_abs(double d, double p) {
    if (p == 2.0) return d * d;
    if (p == 1.0) return std::abs(d);
    return std::pow(std::abs(d), p);
}

/// Max discrete difference quotient over face-adjacent inside cells.
template <int N>
double lipschitz_estimate(const GridFunction<N>& u) {
    const auto& g = u.grid;
    const double h = g.h();
    std::array<std::size_t, N> stride;
    stride[0] = 1;
    for (int i = 1; i < N; ++i) stride[i] = stride[i - 1] * static_cast<std::size_t>(g.dims[i - 1]);
    double lip = 0.0;
    for (std::size_t idx = 0; idx < u.values.size(); ++idx) {
        if (!u.in[idx]) continue;
        const auto c = g.unflat(idx);
        for (int d = 0; d < N; ++d) {
            if (c[d] + 1 >= g.dims[d]) continue;
            const std::size_t j = idx + stride[d];
            if (!u.in[j]) continue;
            lip = std::max(lip, std::abs(u.values[idx] - u.values[j]) / h);
        }
    }
    return lip;
}

template <int N>
double same_cell_band(const GridFunction<N>& u, double delta, double p) {
    const double h = u.grid.h();
    const double lip = lipschitz_estimate(u);
    const double expo = p - delta * p;  // positive since delta < 1
    const double per_cell = std::pow(lip, p) * sphere_area(N) * std::pow(h * std::sqrt(double(N)), expo) / expo;
    const double measure = static_cast<double>(u.inside_count()) * std::pow(h, N);
    return per_cell * measure;
}

/// Pair-sum geometry shared by the offset sweep: cell ranges clipped to
/// the valid overlap and to the support envelope (pairs with both cells
/// outside the support contribute nothing).
template <int N>
struct PairSweep {
    std::array<std::size_t, N> stride;
    std::array<std::int64_t, N> bb_lo, bb_hi;  // support bounding cells, half-open
    bool all_inside = false;

    explicit PairSweep(const GridFunction<N>& u) {
        const auto& g = u.grid;
        stride[0] = 1;
        for (int i = 1; i < N; ++i) stride[i] = stride[i - 1] * static_cast<std::size_t>(g.dims[i - 1]);
        for (int i = 0; i < N; ++i) {
            bb_lo[i] = g.dims[i];
            bb_hi[i] = 0;
        }
        std::size_t inside = 0;
        for (std::size_t idx = 0; idx < u.values.size(); ++idx) {
            inside += u.in[idx];
            if (u.in[idx] && u.values[idx] != 0.0) {
                const auto c = g.unflat(idx);
                for (int i = 0; i < N; ++i) {
                    bb_lo[i] = std::min(bb_lo[i], c[i]);
                    bb_hi[i] = std::max(bb_hi[i], c[i] + 1);
                }
            }
        }
        all_inside = inside == u.values.size();
    }
};

/// Sum of |u(x)-u(x+off)|^p over valid x with both cells inside. Rows
/// accumulate in plain doubles and add once per row (fixed order).
template <int N>
double offset_pair_sum(const GridFunction<N>& u, const PairSweep<N>& sw, const std::array<std::int64_t, N>& off,
                       double p_exp) {
    const auto& g = u.grid;
    std::ptrdiff_t shift = 0;
    std::array<std::int64_t, N> a, b;
    for (int i = 0; i < N; ++i) {
        shift += static_cast<std::ptrdiff_t>(off[i]) * static_cast<std::ptrdiff_t>(sw.stride[i]);
        a[i] = std::max<std::int64_t>(0, -off[i]);
        b[i] = std::min<std::int64_t>(g.dims[i], g.dims[i] - off[i]);
        // x or x+off must meet the support box
        a[i] = std::max(a[i], std::min(sw.bb_lo[i], sw.bb_lo[i] - off[i]));
        b[i] = std::min(b[i], std::max(sw.bb_hi[i], sw.bb_hi[i] - off[i]));
        if (a[i] >= b[i]) return 0.0;
    }
    const double* v = u.values.data();
    const std::uint8_t* in = u.in.data();
    double s = 0.0;
    auto row = [&](std::size_t base) {
        const double* va = v + base + a[0];
        const double* vb = va + shift;
        const std::int64_t len = b[0] - a[0];
        double rowsum = 0.0;
        if (sw.all_inside) {
            if (p_exp == 2.0) {
                // eight independent accumulator chains so the compiler can
                // vectorize the reduction without reassociating anything
                double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
                std::int64_t x = 0;
                for (; x + 8 <= len; x += 8) {
                    const double d0 = va[x] - vb[x], d1 = va[x + 1] - vb[x + 1];
                    const double d2 = va[x + 2] - vb[x + 2], d3 = va[x + 3] - vb[x + 3];
                    const double d4 = va[x + 4] - vb[x + 4], d5 = va[x + 5] - vb[x + 5];
                    const double d6 = va[x + 6] - vb[x + 6], d7 = va[x + 7] - vb[x + 7];
                    s0 += d0 * d0;
                    s1 += d1 * d1;
                    s2 += d2 * d2;
                    s3 += d3 * d3;
                    s4 += d4 * d4;
                    s5 += d5 * d5;
                    s6 += d6 * d6;
                    s7 += d7 * d7;
                }
                rowsum = ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
                for (; x < len; ++x) {
                    const double d = va[x] - vb[x];
                    rowsum += d * d;
                }
            } else if (p_exp == 1.0) {
                for (std::int64_t x = 0; x < len; ++x) rowsum += std::abs(va[x] - vb[x]);
            } else {
                for (std::int64_t x = 0; x < len; ++x) rowsum += std::pow(std::abs(va[x] - vb[x]), p_exp);
            }
        } else {
            const std::uint8_t* ma = in + base + a[0];
            const std::uint8_t* mb = ma + shift;
            if (p_exp == 2.0) {
                for (std::int64_t x = 0; x < len; ++x) {
                    const double d = va[x] - vb[x];
                    rowsum += (ma[x] & mb[x]) ? d * d : 0.0;
                }
            } else {
                for (std::int64_t x = 0; x < len; ++x)
                    if (ma[x] & mb[x]) rowsum += pow_abs(va[x] - vb[x], p_exp);
            }
        }
        return rowsum;
    };
    if constexpr (N == 2) {
        for (std::int64_t y = a[1]; y < b[1]; ++y) s += row(static_cast<std::size_t>(y) * sw.stride[1]);
    } else {
        for (std::int64_t z = a[2]; z < b[2]; ++z)
            for (std::int64_t y = a[1]; y < b[1]; ++y)
                s += row(static_cast<std::size_t>(z) * sw.stride[2] + static_cast<std::size_t>(y) * sw.stride[1]);
    }
    return s;
}

}  // namespace detail

/// |u|_{W^{delta,p}} by midpoint cell-pair quadrature over ordered pairs
/// of inside cells. Offsets are swept in a fixed lexicographic order,
/// compensated accumulation per offset block, blocks merged in block
/// order: bit-reproducible for any worker count.
template <int N>
SeminormValue seminorm_full(const GridFunction<N>& u, const FracParams& P) {
    P.validate();
    const auto& g = u.grid;
    const double h = g.h();
    const double beta = N + P.delta * P.p;
    const double scale = std::pow(h, 2.0 * N);

    // blocks over the leading offset coordinate; only lexicographically
    // positive offsets are swept (each stands for itself and its mirror)
    const std::int64_t lead = g.dims[N - 1];
    const std::size_t n_blocks = static_cast<std::size_t>(2 * lead - 1);
    const detail::PairSweep<N> sweep(u);

    auto block_value = [&](std::size_t blk) -> double {
        const std::int64_t dlead = static_cast<std::int64_t>(blk) - (lead - 1);
        KahanSum acc;
        auto visit = [&](std::array<std::int64_t, N> o) {
            bool positive = false;
            for (int i = N - 1; i >= 0; --i) {
                if (o[i] != 0) {
                    positive = o[i] > 0;
                    break;
                }
            }
            if (!positive) return;
            double r2 = 0.0;
            for (int i = 0; i < N; ++i) r2 += static_cast<double>(o[i] * o[i]);
            const double kern = std::pow(h * std::sqrt(r2), -beta);
            const double s = detail::offset_pair_sum<N>(u, sweep, o, P.p);
            acc.add(2.0 * kern * s);
        };
        if constexpr (N == 2) {
            for (std::int64_t d0 = -(g.dims[0] - 1); d0 <= g.dims[0] - 1; ++d0) visit({d0, dlead});
        } else {
            for (std::int64_t d1 = -(g.dims[1] - 1); d1 <= g.dims[1] - 1; ++d1)
                for (std::int64_t d0 = -(g.dims[0] - 1); d0 <= g.dims[0] - 1; ++d0) visit({d0, d1, dlead});
        }
        return acc.value();
    };

    const double integral = parallel_reduce_blocks(n_blocks, block_value) * scale;
    SeminormValue out;
    out.integral = integral;
    out.value = std::pow(integral, 1.0 / P.p);
    out.same_cell_band = detail::same_cell_band(u, P.delta, P.p);
    return out;
}

/// |u|_{W^{delta,p}_tau}: pairs restricted to |x-y| < tau·dist(x, ∂G).
/// The restriction is x-centered exactly as written (not symmetric);
/// every admitted y is automatically inside G since tau < 1.
template <int N>
SeminormValue seminorm_tau(const GridFunction<N>& u, const FracParams& P) {
    P.validate();
    const auto& g = u.grid;
    const double h = g.h();
    const double beta = N + P.delta * P.p;
    const double scale = std::pow(h, 2.0 * N);

    double dmax = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (u.in[i]) dmax = std::max(dmax, u.bdist[i]);
    const std::int64_t K = static_cast<std::int64_t>(std::floor(P.tau * dmax / h)) + 1;
    const std::int64_t tw = 2 * K + 1;

    // kernel lookup over the offset window
    std::vector<double> kern;
    kern.resize(static_cast<std::size_t>(N == 2 ? tw * tw : tw * tw * tw));
    {
        std::size_t pos = 0;
        if constexpr (N == 2) {
            for (std::int64_t d1 = -K; d1 <= K; ++d1)
                for (std::int64_t d0 = -K; d0 <= K; ++d0, ++pos) {
                    const double r2 = static_cast<double>(d0 * d0 + d1 * d1);
                    kern[pos] = r2 == 0.0 ? 0.0 : std::pow(h * std::sqrt(r2), -beta);
                }
        } else {
            for (std::int64_t d2 = -K; d2 <= K; ++d2)
                for (std::int64_t d1 = -K; d1 <= K; ++d1)
                    for (std::int64_t d0 = -K; d0 <= K; ++d0, ++pos) {
                        const double r2 = static_cast<double>(d0 * d0 + d1 * d1 + d2 * d2);
                        kern[pos] = r2 == 0.0 ? 0.0 : std::pow(h * std::sqrt(r2), -beta);
                    }
        }
    }
    std::array<std::size_t, N> stride;
    stride[0] = 1;
    for (int i = 1; i < N; ++i) stride[i] = stride[i - 1] * static_cast<std::size_t>(g.dims[i - 1]);

    // per-x contribution, restricted to the tau-ball around x
    auto x_contribution = [&](const std::array<std::int64_t, N>& c, std::size_t idx) -> double {
        const double rmax = P.tau * u.bdist[idx];
        const std::int64_t kk = std::min<std::int64_t>(K, static_cast<std::int64_t>(std::floor(rmax / h)));
        if (kk < 1) return 0.0;
        const double rmax2 = rmax * rmax / (h * h);
        const double ux = u.values[idx];
        std::array<std::int64_t, N> a, b;
        for (int i = 0; i < N; ++i) {
            a[i] = std::max<std::int64_t>(-kk, -c[i]);
            b[i] = std::min<std::int64_t>(kk, g.dims[i] - 1 - c[i]);
        }
        double s = 0.0;
        // the zero offset carries kernel weight 0, so no special case
        auto row = [&](double rem, std::size_t kbase, std::size_t base) {
            double rowsum = 0.0;
            for (std::int64_t d0 = a[0]; d0 <= b[0]; ++d0) {
                if (static_cast<double>(d0 * d0) >= rem) continue;
                const std::size_t j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(base) + d0);
                if (!u.in[j]) continue;
                rowsum += detail::pow_abs(ux - u.values[j], P.p) * kern[kbase + static_cast<std::size_t>(d0 + K)];
            }
            return rowsum;
        };
        if constexpr (N == 2) {
            for (std::int64_t d1 = a[1]; d1 <= b[1]; ++d1) {
                const double rem = rmax2 - static_cast<double>(d1 * d1);
                if (rem <= 0) continue;
                s += row(rem, static_cast<std::size_t>(d1 + K) * static_cast<std::size_t>(tw),
                         idx + static_cast<std::size_t>(d1 * static_cast<std::int64_t>(stride[1])));
            }
        } else {
            for (std::int64_t d2 = a[2]; d2 <= b[2]; ++d2)
                for (std::int64_t d1 = a[1]; d1 <= b[1]; ++d1) {
                    const double rem = rmax2 - static_cast<double>(d2 * d2 + d1 * d1);
                    if (rem <= 0) continue;
                    s += row(rem,
                             (static_cast<std::size_t>(d2 + K) * static_cast<std::size_t>(tw) +
                              static_cast<std::size_t>(d1 + K)) *
                                 static_cast<std::size_t>(tw),
                             idx +
                                 static_cast<std::size_t>(d2 * static_cast<std::int64_t>(stride[2]) +
                                                          d1 * static_cast<std::int64_t>(stride[1])));
                }
        }
        return s;
    };

    // blocks over the leading cell coordinate, merged in order
    const std::size_t n_blocks = static_cast<std::size_t>(g.dims[N - 1]);
    auto block_value = [&](std::size_t blk) -> double {
        KahanSum acc;
        std::array<std::int64_t, N> c{};
        c[N - 1] = static_cast<std::int64_t>(blk);
        if constexpr (N == 2) {
            for (std::int64_t x = 0; x < g.dims[0]; ++x) {
                c[0] = x;
                const std::size_t idx = g.flat(c);
                if (u.in[idx]) acc.add(x_contribution(c, idx));
            }
        } else {
            for (std::int64_t y = 0; y < g.dims[1]; ++y)
                for (std::int64_t x = 0; x < g.dims[0]; ++x) {
                    c[1] = y;
                    c[0] = x;
                    const std::size_t idx = g.flat(c);
                    if (u.in[idx]) acc.add(x_contribution(c, idx));
                }
        }
        return acc.value();
    };

    const double integral = parallel_reduce_blocks(n_blocks, block_value) * scale;
    SeminormValue out;
    out.integral = integral;
    out.value = std::pow(integral, 1.0 / P.p);
    out.same_cell_band = detail::same_cell_band(u, P.delta, P.p);
    return out;
}

/// Mean of u over the cells tiling a dyadic cube (all inside required).
template <int N>
double cube_mean(const GridFunction<N>& u, const DyadicCube<N>& q) {
    std::array<std::int64_t, N> a, b;
    u.grid.cube_cell_range(q, a, b);
    KahanSum s;
    std::size_t n = 0;
    std::array<std::int64_t, N> it = a;
    for (;;) {
        const std::size_t idx = u.grid.flat(it);
        if (!u.in[idx]) throw std::runtime_error("cube_mean: cube contains outside cells");
        s.add(u.values[idx]);
        ++n;
        int axis = 0;
        while (axis < N && ++it[axis] >= b[axis]) {
            it[axis] = a[axis];
            ++axis;
        }
        if (axis == N) break;
    }
    if (n == 0) throw std::runtime_error("cube_mean: empty cube");
    return s.value() / static_cast<double>(n);
}

/// ∫_Q |u - u_Q| dx over a dyadic cube.
template <int N>
double cube_mean_oscillation_l1(const GridFunction<N>& u, const DyadicCube<N>& q) {
    const double m = cube_mean(u, q);
    std::array<std::int64_t, N> a, b;
    u.grid.cube_cell_range(q, a, b);
    KahanSum s;
    std::array<std::int64_t, N> it = a;
    for (;;) {
        s.add(std::abs(u.values[u.grid.flat(it)] - m));
        int axis = 0;
        while (axis < N && ++it[axis] >= b[axis]) {
            it[axis] = a[axis];
            ++axis;
        }
        if (axis == N) break;
    }
    return s.value() * std::pow(u.grid.h(), N);
}

/// Volume-weighted mean over an arbitrary box (cells weighted by the
/// measure of cell ∩ box); used for the dilated cubes Q*.
template <int N>
double box_weighted_mean(const GridFunction<N>& u, const Box<N>& box) {
    const auto& g = u.grid;
    const double h = g.h();
    KahanSum num, den;
    std::array<std::int64_t, N> a, b;
    for (int i = 0; i < N; ++i) {
        a[i] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(box.lo[i] / h)) - g.origin[i]);
        b[i] = std::min<std::int64_t>(g.dims[i], static_cast<std::int64_t>(std::ceil(box.hi[i] / h)) - g.origin[i]);
        if (a[i] >= b[i]) throw std::runtime_error("box_weighted_mean: box misses the grid");
    }
    std::array<std::int64_t, N> it = a;
    for (;;) {
        const std::size_t idx = g.flat(it);
        if (u.in[idx]) {
            const Box<N> cell = g.cell_cube(it).box();
            const double w = cell.intersection(box).volume();
            if (w > 0) {
                num.add(w * u.values[idx]);
                den.add(w);
            }
        }
        int axis = 0;
        while (axis < N && ++it[axis] >= b[axis]) {
            it[axis] = a[axis];
            ++axis;
        }
        if (axis == N) break;
    }
    if (den.value() <= 0) throw std::runtime_error("box_weighted_mean: empty box");
    return num.value() / den.value();
}

/// Mean L1 oscillation (1/|B|)∫_B |u - u_B| over an arbitrary box.
template <int N>
double box_mean_oscillation(const GridFunction<N>& u, const Box<N>& box) {
    const double m = box_weighted_mean(u, box);
    const auto& g = u.grid;
    const double h = g.h();
    KahanSum num, den;
    std::array<std::int64_t, N> a, b;
    for (int i = 0; i < N; ++i) {
        a[i] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(box.lo[i] / h)) - g.origin[i]);
        b[i] = std::min<std::int64_t>(g.dims[i], static_cast<std::int64_t>(std::ceil(box.hi[i] / h)) - g.origin[i]);
    }
    std::array<std::int64_t, N> it = a;
    for (;;) {
        const std::size_t idx = g.flat(it);
        if (u.in[idx]) {
            const Box<N> cell = g.cell_cube(it).box();
            const double w = cell.intersection(box).volume();
            if (w > 0) {
                num.add(w * std::abs(u.values[idx] - m));
                den.add(w);
            }
        }
        int axis = 0;
        while (axis < N && ++it[axis] >= b[axis]) {
            it[axis] = a[axis];
            ++axis;
        }
        if (axis == N) break;
    }
    return num.value() / den.value();
}

struct AFunctionalBounds {
    double lower = 0.0;
    double upper = 0.0;
    double kappa_used = 1.0;
    double seminorm_tau_value = 0.0;
    std::size_t families = 0;
};

/// Minimal kappa with Q ⊂ B(x, tau·dist(x,∂G)) for x ∈ Q whenever
/// kappa·Q ⊂ G (worst corner bound).
inline double kappa_for_tau(int n, double tau) { return 1.0 + 2.0 * std::sqrt(double(n)) / tau; }

/// Certified sandwich for the A-functional: greedy disjoint-family lower
/// bound and the (sqrt n)^{n/p+delta}·|u|_tau upper bound.
template <int N>
AFunctionalBounds a_functional_bounds(const GridFunction<N>& u, const FracParams& P,
                                      const WhitneyFamily<N>* refined = nullptr) {
    P.validate();
    AFunctionalBounds out;
    out.kappa_used = std::max(P.kappa, kappa_for_tau(N, P.tau));
    WhitneyFamily<N> local;
    if (!refined) {
        local = refine_kappa(whitney_decompose<N>(u.domain, u.grid.level), out.kappa_used);
        refined = &local;
    }
    // packing term per admissible cube
    std::vector<double> term;
    std::vector<Box<N>> boxes;
    for (std::size_t i = 0; i < refined->cubes.size(); ++i) {
        const auto& q = refined->cubes[i];
        if (q.level > u.grid.level) continue;  // finer than the lattice
        if (!kappa_ok(*u.domain, q, out.kappa_used)) continue;
        const double vol = q.volume();
        const double osc = cube_mean_oscillation_l1(u, q);  // ∫_Q |u-u_Q|
        const double t = std::pow(vol, -1.0 - P.delta / N) * osc;
        boxes.push_back(q.box());
        term.push_back(std::pow(t, P.p) * vol);
    }
    const auto families = greedy_disjoint_partition<N>(boxes, term);
    out.families = families.size();
    double best = 0.0;
    for (const auto& f : families) {
        KahanSum s;
        for (std::size_t id : f) s.add(term[id]);
        best = std::max(best, std::pow(s.value(), 1.0 / P.p));
    }
    out.lower = best;
    const auto tau = seminorm_tau(u, P);
    out.seminorm_tau_value = tau.value;
    out.upper = std::pow(std::sqrt(double(N)), double(N) / P.p + P.delta) * tau.value;
    return out;
}

struct ShiftMin {
    double a_star = 0.0;
    double value = 0.0;
};

/// inf_a Σ|u-a|^q h^n by golden-section search; the objective is convex
/// for q >= 1 and the bracket [min u, max u] always contains a minimizer.
template <int N>
ShiftMin inf_shift_lq(const GridFunction<N>& u, double q) {
    if (q < 1.0) throw std::invalid_argument("inf_shift_lq: q must be >= 1");
    const double hn = std::pow(u.grid.h(), N);
    auto phi = [&](double a) {
        KahanSum s;
        for (std::size_t i = 0; i < u.values.size(); ++i)
            if (u.in[i]) s.add(detail::pow_abs(u.values[i] - a, q));
        return s.value() * hn;
    };
    double lo = u.min_value(), hi = u.max_value();
    if (!(lo < hi)) return {lo, 0.0};
    const double tol = 1e-10 * (hi - lo);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = phi(x1), f2 = phi(x2);
    while (hi - lo > tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = phi(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = phi(x2);
        }
    }
    const double a = 0.5 * (lo + hi);
    return {a, phi(a)};
}

/// Σ |u|^q dist(x,∂D)^{-w} h^n with w = q(delta + n(1/q - 1/p)).
/// Rejects support cells whose center sits on the boundary (weight
/// undefined there).
template <int N>
double hardy_lhs(const GridFunction<N>& u, const FracParams& P) {
    P.validate();
    const double qq = P.q(N);
    const double w = P.hardy_weight(N);
    if (w < 0) throw std::invalid_argument("hardy_lhs: weight exponent negative (needs 1/p - 1/q <= delta/n)");
    const double hn = std::pow(u.grid.h(), N);
    KahanSum s;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        if (!u.in[i] || u.values[i] == 0.0) continue;
        if (u.bdist[i] <= 0.0) throw std::invalid_argument("hardy_lhs: support touches the boundary");
        s.add(detail::pow_abs(u.values[i], qq) * std::pow(u.bdist[i], -w));
    }
    return s.value() * hn;
}

/// sup_{t>0} t^q |{|u-a| > t}|; exact for lattice step functions (the
/// supremum is attained approaching a data value from below, so it is
/// evaluated at each distinct value v against |{|u-a| >= v}|).
template <int N>
double weak_quasinorm(const GridFunction<N>& u, double a, double q) {
    if (q < 1.0) throw std::invalid_argument("weak_quasinorm: q must be >= 1");
    std::vector<double> vals;
    vals.reserve(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (u.in[i]) vals.push_back(std::abs(u.values[i] - a));
    std::sort(vals.begin(), vals.end(), std::greater<>());
    const double hn = std::pow(u.grid.h(), N);
    double best = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
        ++count;  // cells with |u-a| >= vals[i]
        if (i + 1 < vals.size() && vals[i + 1] == vals[i]) continue;
        if (vals[i] > 0.0) best = std::max(best, std::pow(vals[i], q) * static_cast<double>(count) * hn);
    }
    return best;
}

}  // namespace fraclab

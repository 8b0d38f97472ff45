#pragma once

#include "fraclab/functional.hpp"

namespace fraclab {

template <int N>
struct CapacityProblem {
    std::shared_ptr<const Domain<N>> domain;
    GridSpec<N> grid;
    CompactSet<N> K;
    FracParams params;
    /// Extra cells of clearance (beyond strict cell interiority) that
    /// the support must keep from the boundary.
    int support_margin = 0;
};

template <int N>
struct CapacityResult {
    double value_upper = 0.0;  // best objective: an upper bound on the discrete capacity
    GridFunction<N> minimizer;
    std::vector<double> trace;
    bool converged = true;
};

/// Projected (sub)gradient minimization of u -> |u|_{W^{delta,p}}^p over
/// {0 <= u <= 1, u = 1 on K, u = 0 outside the compactly-supported
/// region}. Clamping to [0,1] never increases the seminorm when the
/// constraint is u >= 1 on K, so the projection is exact. For p = 2 a
/// Jacobi-preconditioned Barzilai-Borwein gradient descent is used; for
/// p != 2 a subgradient schedule s_t = s0/sqrt(t).
template <int N>
CapacityResult<N> capacity_estimate(const CapacityProblem<N>& prob, int budget,
                                    const GridFunction<N>* initial = nullptr) {
    if (budget < 1) throw std::invalid_argument("capacity_estimate: budget must be >= 1");
    prob.params.validate();
    const double p = prob.params.p;
    const double beta = N + prob.params.delta * p;
    GridFunction<N> u = GridFunction<N>::zeros(prob.domain, prob.grid.level);
    if (u.grid != prob.grid) throw std::invalid_argument("capacity_estimate: grid mismatch");
    const double h = u.grid.h();
    const double scale = std::pow(h, 2.0 * N);

    CapacityResult<N> out;
    out.minimizer = u;
    if (prob.K.cells.empty()) {
        out.value_upper = 0.0;
        out.trace = {0.0};
        return out;
    }

    // admissible support: cells whose closed cell avoids the boundary,
    // with optional extra margin
    const double clearance = (0.5 + prob.support_margin) * h * std::sqrt(double(N));
    std::vector<std::size_t> active;
    std::vector<std::uint8_t> is_active(u.values.size(), 0);
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (u.in[i] && u.bdist[i] > clearance) {
            active.push_back(i);
            is_active[i] = 1;
        }
    std::vector<std::uint8_t> fixed_one(u.values.size(), 0);
    for (std::size_t c : prob.K.cells) {
        if (!is_active[c]) throw std::invalid_argument("capacity_estimate: empty admissible set (K outside support region)");
        fixed_one[c] = 1;
    }

    const std::size_t A = active.size();
    std::vector<Vec<N>> pos(A);
    for (std::size_t i = 0; i < A; ++i) pos[i] = u.grid.cell_center(u.grid.unflat(active[i]));

    // kernel weights within the active set, and the fixed far-field
    // weight w_out(x) = sum over inside-but-inactive cells (where u = 0)
    std::vector<double> w_out(A, 0.0);
    {
        std::vector<std::size_t> inactive;
        for (std::size_t i = 0; i < u.values.size(); ++i)
            if (u.in[i] && !is_active[i]) inactive.push_back(i);
        std::vector<Vec<N>> qos(inactive.size());
        for (std::size_t j = 0; j < inactive.size(); ++j) qos[j] = u.grid.cell_center(u.grid.unflat(inactive[j]));
        parallel_for_blocks(A, [&](std::size_t i) {
            KahanSum s;
            for (std::size_t j = 0; j < qos.size(); ++j) s.add(std::pow(dist<N>(pos[i], qos[j]), -beta));
            w_out[i] = s.value();
        });
    }

    std::vector<double> x(A, 0.0);
    if (initial) {
        if (initial->grid != prob.grid) throw std::invalid_argument("capacity_estimate: initial guess grid mismatch");
        for (std::size_t i = 0; i < A; ++i) x[i] = initial->values[active[i]];
    }
    auto project = [&](std::vector<double>& v) {
        for (std::size_t i = 0; i < A; ++i) {
            double t = std::clamp(v[i], 0.0, 1.0);
            if (fixed_one[active[i]]) t = 1.0;
            v[i] = t;
        }
    };
    project(x);

    auto objective = [&](const std::vector<double>& v) -> double {
        // pairs within the active set (each unordered pair twice) plus
        // the u-vs-0 pairs against the inactive inside cells
        const double val = parallel_reduce_blocks(A, [&](std::size_t i) {
            KahanSum s;
            for (std::size_t j = i + 1; j < A; ++j)
                s.add(2.0 * detail::pow_abs(v[i] - v[j], p) * std::pow(dist<N>(pos[i], pos[j]), -beta));
            s.add(2.0 * detail::pow_abs(v[i], p) * w_out[i]);
            return s.value();
        });
        return val * scale;
    };
    auto gradient = [&](const std::vector<double>& v, std::vector<double>& g) {
        parallel_for_blocks(A, [&](std::size_t i) {
            KahanSum s;
            for (std::size_t j = 0; j < A; ++j) {
                if (j == i) continue;
                const double d = v[i] - v[j];
                const double kern = std::pow(dist<N>(pos[i], pos[j]), -beta);
                s.add(2.0 * p * detail::pow_abs(d, p - 1.0) * (d >= 0 ? 1.0 : -1.0) * kern);
            }
            const double vi = v[i];
            if (vi != 0.0) s.add(2.0 * p * detail::pow_abs(vi, p - 1.0) * (vi >= 0 ? 1.0 : -1.0) * w_out[i]);
            g[i] = s.value() * scale;
        });
    };

    std::vector<double> g(A), xn(A), gn(A), best_x = x;
    double best = objective(x);
    out.trace.push_back(best);
    gradient(x, g);
    double gnorm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
    double step;
    std::vector<double> jacobi(A, 1.0);
    if (p == 2.0) {
        // diag of the quadratic form as preconditioner
        parallel_for_blocks(A, [&](std::size_t i) {
            KahanSum s;
            for (std::size_t j = 0; j < A; ++j)
                if (j != i) s.add(std::pow(dist<N>(pos[i], pos[j]), -beta));
            s.add(w_out[i]);
            jacobi[i] = 1.0 / (4.0 * s.value() * scale);
        });
        step = 1.0;
    } else {
        step = gnorm > 0 ? 1.0 / gnorm : 1.0;
    }

    const int check_window = std::max(1, budget / 10);
    double window_best = best;
    for (int t = 1; t <= budget; ++t) {
        if (p == 2.0) {
            for (std::size_t i = 0; i < A; ++i) xn[i] = x[i] - step * jacobi[i] * g[i];
            project(xn);
            gradient(xn, gn);
            // Barzilai-Borwein step in the preconditioned metric
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < A; ++i) {
                const double dx = xn[i] - x[i];
                const double dg = gn[i] - g[i];
                num += dx * dx / jacobi[i];
                den += dx * dg;
            }
            if (den > 1e-300) step = std::clamp(num / den, 1e-6, 1e6);
            x.swap(xn);
            g.swap(gn);
        } else {
            const double st = step / std::sqrt(static_cast<double>(t));
            for (std::size_t i = 0; i < A; ++i) xn[i] = x[i] - st * g[i];
            project(xn);
            x.swap(xn);
            gradient(x, g);
        }
        const double val = objective(x);
        out.trace.push_back(val);
        if (val < best) {
            best = val;
            best_x = x;
        }
        if (t % check_window == 0) {
            const double improvement = window_best - best;
            if (improvement <= 1e-4 * std::abs(best)) break;  // plateau: settled
            window_best = best;
        }
    }
    // converged iff the trailing window stopped improving meaningfully
    out.converged = (window_best - best) <= 1e-4 * std::abs(best) || out.trace.size() <= 2;

    std::vector<double> full(u.values.size(), 0.0);
    for (std::size_t i = 0; i < A; ++i) full[active[i]] = best_x[i];
    out.minimizer = u.like_with(std::move(full));
    out.value_upper = best;
    return out;
}

/// Piecewise-linear cutoff: 1 on Q, 0 outside (17/16)Q, linear in the
/// sup-norm distance between (ramp width side/32 per side), so the
/// difference quotients stay below 32/side.
template <int N>
GridFunction<N> cutoff_phi(std::shared_ptr<const Domain<N>> dom, int level, const DyadicCube<N>& q) {
    const Box<N> hat = q.hat();
    Box<N> window = dom->window;
    if (!window.contains_box(hat)) throw std::invalid_argument("cutoff_phi: (17/16)Q exits the window");
    const Box<N> core = q.box();
    const double ramp = q.side() / 32.0;
    return GridFunction<N>::sample(dom, level, [core, ramp](const Vec<N>& x) {
        return std::clamp(1.0 - core.supdist_to(x) / ramp, 0.0, 1.0);
    });
}

/// The Maz'ya truncation u_k: 1 where |u| >= 2^{k+1}, |u|/2^k - 1 on
/// the ramp 2^k < |u| < 2^{k+1}, 0 where |u| <= 2^k.
template <int N>
GridFunction<N> truncate_levels(const GridFunction<N>& u, int k) {
    const double lo = std::ldexp(1.0, k);
    const double hi = std::ldexp(1.0, k + 1);
    std::vector<double> v(u.values.size(), 0.0);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        if (!u.in[i]) continue;
        const double a = std::abs(u.values[i]);
        if (a >= hi)
            v[i] = 1.0;
        else if (a > lo)
            v[i] = a / lo - 1.0;
        else
            v[i] = 0.0;
    }
    return u.like_with(std::move(v));
}

}  // namespace fraclab

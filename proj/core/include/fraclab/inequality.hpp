#pragma once

#include <map>

#include "fraclab/capacity.hpp"
#include "fraclab/chains.hpp"
#include "fraclab/fixtures.hpp"

namespace fraclab {

/// One checked inequality instance.
struct InequalityReport {
    std::string name;
    std::string domain_name;
    std::string fixture;
    double delta = 0.0, p = 0.0, q = 0.0, tau = 0.0, kappa = 0.0;
    double h = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool degenerate = false;
    nlohmann::json extra;
    std::vector<std::pair<double, double>> refinement_trace;  // (h, ratio)

    void fill_params(const FracParams& P, int n) {
        delta = P.delta;
        p = P.p;
        q = P.q(n);
        tau = P.tau;
        kappa = P.kappa;
    }
};

void write_reports_csv(const std::vector<InequalityReport>& reports, const std::string& path);
void write_reports_json(const std::vector<InequalityReport>& reports, const std::string& path);

namespace detail {

inline double safe_ratio(double lhs, double rhs) {
    if (rhs == 0.0) {
        if (lhs == 0.0) return 0.0;
        throw std::runtime_error("inequality check: rhs = 0 with lhs > 0 (quadrature bug)");
    }
    return lhs / rhs;
}

}  // namespace detail

/// Strong Sobolev-Poincare: Σ|u-a|^q h^n vs |u|_tau^q, a = u_D on
/// bounded domains and the inf-shift minimizer on unbounded ones.
template <int N>
InequalityReport check_sobolev_poincare(const GridFunction<N>& u, const FracParams& P) {
    P.validate();
    InequalityReport rep;
    rep.name = "sobolev_poincare";
    rep.domain_name = u.domain->name;
    rep.fill_params(P, N);
    rep.h = u.grid.h();
    const double q = P.q(N);
    double a;
    if (u.domain->bounded) {
        a = u.mean();
    } else {
        a = inf_shift_lq(u, q).a_star;
    }
    const double hn = std::pow(u.grid.h(), N);
    KahanSum s;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (u.in[i]) s.add(detail::pow_abs(u.values[i] - a, q));
    rep.lhs = s.value() * hn;
    const auto tau = seminorm_tau(u, P);
    rep.rhs = std::pow(tau.integral, q / P.p);
    if (rep.lhs == 0.0 && rep.rhs == 0.0) {
        rep.degenerate = true;
        rep.extra["note"] = "degenerate 0/0, inequality vacuous";
        return rep;
    }
    rep.ratio = detail::safe_ratio(rep.lhs, rep.rhs);
    rep.extra["a"] = a;
    rep.extra["seminorm_tau"] = tau.value;
    rep.extra["same_cell_band"] = tau.same_cell_band;
    return rep;
}

/// Weak Sobolev-Poincare: inf over a in {u_D, a*} of the weak
/// quasinorm, against both the tau-seminorm and the A-functional path.
template <int N>
InequalityReport check_weak_sobolev_poincare(const GridFunction<N>& u, const FracParams& P) {
    P.validate();
    InequalityReport rep;
    rep.name = "weak_sobolev_poincare";
    rep.domain_name = u.domain->name;
    rep.fill_params(P, N);
    rep.h = u.grid.h();
    const double q = P.q(N);
    const double a1 = u.mean();
    const double a2 = inf_shift_lq(u, q).a_star;
    rep.lhs = std::min(weak_quasinorm(u, a1, q), weak_quasinorm(u, a2, q));
    const auto bounds = a_functional_bounds(u, P);
    rep.rhs = std::pow(bounds.seminorm_tau_value, q);  // = tau integral^{q/p}
    if (rep.lhs == 0.0 && rep.rhs == 0.0) {
        rep.degenerate = true;
        return rep;
    }
    rep.ratio = detail::safe_ratio(rep.lhs, rep.rhs);
    const double rhs_a = std::pow(bounds.upper, q);
    rep.extra["ratio_a_functional_path"] = rhs_a == 0.0 ? 0.0 : rep.lhs / rhs_a;
    rep.extra["a_lower"] = bounds.lower;
    rep.extra["a_upper"] = bounds.upper;
    rep.extra["kappa_used"] = bounds.kappa_used;
    return rep;
}

/// Fractional (delta,q,p)-Hardy: weighted q-mass vs |u|^q.
template <int N>
InequalityReport check_hardy(const GridFunction<N>& u, const FracParams& P) {
    P.validate();
    const double q = P.q(N);
    const double gap = 1.0 / P.p - 1.0 / q;
    if (gap < -1e-12 || gap > P.delta / N + 1e-12)
        throw std::invalid_argument("check_hardy: needs 0 <= 1/p - 1/q <= delta/n");
    InequalityReport rep;
    rep.name = "hardy";
    rep.domain_name = u.domain->name;
    rep.fill_params(P, N);
    rep.h = u.grid.h();
    rep.lhs = hardy_lhs(u, P);
    const auto full = seminorm_full(u, P);
    rep.rhs = std::pow(full.integral, q / P.p);
    rep.ratio = detail::safe_ratio(rep.lhs, rep.rhs);
    rep.extra["seminorm_full"] = full.value;
    rep.extra["weight_exponent"] = P.hardy_weight(N);
    if (!u.domain->bounded) rep.extra["window_truncated"] = true;
    return rep;
}

/// Truncation-transfer verdict: every display of the proof chain that
/// turns the capacity condition into the strong weighted inequality,
/// evaluated termwise on one fixture.
struct TruncationReport {
    double strong_lhs = 0.0;
    double seminorm_integral = 0.0;       // E(u) = |u|_W^p
    double C1_measured = 0.0;             // strong_lhs / E(u)^{q/p}
    double C2_measured = 0.0;             // max_k measure(A_{k+1}) / cap_k^{q/p}
    double assembled_constant = 0.0;      // 2^{3q+2q/p}(1-2^{-p})^{-q/p}
    double forward_factor = 0.0;          // measured strong/weak lhs ratio (unquantified C(p,q))
    bool level_decomposition_ok = false;  // S1
    bool capacity_condition_ok = false;   // S2
    bool truncation_admissible_ok = false;  // S3: cap_k <= E(u_k)
    bool split_bound_ok = false;            // S4
    bool pointwise_transfer_ok = false;     // S5 termwise
    bool assembled_bound_ok = false;        // final: C1 <= C2 * assembled
    double worst_pointwise_slack = 0.0;
    double decomposition_bound = 0.0;  // S1 right-hand side
    int levels_used = 0;
    std::vector<double> cap_per_level;
};

/// Runs the level-set machinery on |u|: E_k = {|u| > 2^k}, A_k =
/// E_k \ E_{k+1}, the truncations u_k as capacity test functions, and
/// the geometric-series assembly with its explicit constant.
template <int N>
TruncationReport check_truncation_transfer(const GridFunction<N>& u, const FracParams& P, int cap_budget = 80) {
    P.validate();
    const double p = P.p, q = P.q(N);
    if (q < p) throw std::invalid_argument("check_truncation_transfer: needs q >= p");
    const double hn = std::pow(u.grid.h(), N);
    const double beta = N + P.delta * p;
    const double scale2 = std::pow(u.grid.h(), 2.0 * N);

    TruncationReport rep;
    rep.assembled_constant = std::pow(2.0, 3.0 * q + 2.0 * q / p) * std::pow(1.0 - std::pow(2.0, -p), -q / p);

    // level range from the data
    double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (u.in[i] && u.values[i] != 0.0) {
            vmin = std::min(vmin, std::abs(u.values[i]));
            vmax = std::max(vmax, std::abs(u.values[i]));
        }
    if (vmax == 0.0) return rep;  // u == 0: everything vacuous
    const int k_lo = static_cast<int>(std::floor(std::log2(vmin))) - 1;
    const int k_hi = static_cast<int>(std::ceil(std::log2(vmax)));
    const int L = k_hi - k_lo + 1;
    rep.levels_used = L;

    // class of each inside cell: INT_MIN marks F = {u = 0}, else the k
    // with |u| in A_k (the sentinel must stay clear of real k indices)
    constexpr int kZeroClass = std::numeric_limits<int>::min();
    auto class_of = [&](double v) -> int {
        const double a = std::abs(v);
        if (a == 0.0) return kZeroClass;
        int k = static_cast<int>(std::floor(std::log2(a)));
        // A_k = {2^k < |u| <= 2^{k+1}}
        if (std::ldexp(1.0, k) == a) --k;  // |u| exactly 2^k sits in A_{k-1}
        return k;
    };

    // strong lhs and level decomposition S1
    std::vector<double> measure_A(static_cast<std::size_t>(L + 2), 0.0);  // index k - k_lo
    KahanSum strong;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        if (!u.in[i]) continue;
        strong.add(detail::pow_abs(u.values[i], q));
        const int k = class_of(u.values[i]);
        if (k >= k_lo && k <= k_hi) measure_A[static_cast<std::size_t>(k - k_lo)] += hn;
    }
    rep.strong_lhs = strong.value() * hn;
    KahanSum decomp;
    for (int k = k_lo - 1; k <= k_hi; ++k) {
        const double mA = (k + 1 >= k_lo && k + 1 <= k_hi) ? measure_A[static_cast<std::size_t>(k + 1 - k_lo)] : 0.0;
        decomp.add(std::pow(2.0, (k + 2) * q) * mA);
    }
    rep.decomposition_bound = decomp.value();
    rep.level_decomposition_ok = rep.strong_lhs <= decomp.value() * (1.0 + 1e-12);

    // pair-class kernels: T_u[ci][cj] and T_{u_k}[ci][cj] per k; class 0
    // stands for F, classes 1..L for A_{k_lo}..A_{k_hi}
    std::vector<std::size_t> cells;
    std::vector<int> cls;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (u.in[i]) {
            cells.push_back(i);
            const int k = class_of(u.values[i]);
            cls.push_back(k == kZeroClass ? 0 : (k - k_lo + 1));
        }
    const std::size_t M = cells.size();
    std::vector<Vec<N>> pos(M);
    for (std::size_t i = 0; i < M; ++i) pos[i] = u.grid.cell_center(u.grid.unflat(cells[i]));
    const int kt_lo = k_lo - 1;  // truncation range covers the lowest band
    const int LT = L + 1;
    std::vector<GridFunction<N>> trunc;
    for (int k = kt_lo; k <= k_hi; ++k) trunc.push_back(truncate_levels(u, k));

    const std::size_t C = static_cast<std::size_t>(L + 1);
    std::vector<double> T_u(C * C, 0.0);
    std::vector<std::vector<double>> T_k(static_cast<std::size_t>(LT), std::vector<double>(C * C, 0.0));
    double worst_slack = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < M; ++j) {
            if (i == j) continue;
            const double kern = std::pow(dist<N>(pos[i], pos[j]), -beta) * scale2;
            const std::size_t cc = static_cast<std::size_t>(cls[i]) * C + static_cast<std::size_t>(cls[j]);
            const double du = u.values[cells[i]] - u.values[cells[j]];
            T_u[cc] += detail::pow_abs(du, p) * kern;
            for (int t = 0; t < LT; ++t) {
                const double dk = trunc[static_cast<std::size_t>(t)].values[cells[i]] -
                                  trunc[static_cast<std::size_t>(t)].values[cells[j]];
                if (dk != 0.0) T_k[static_cast<std::size_t>(t)][cc] += detail::pow_abs(dk, p) * kern;
                // pointwise transfer |u_k(x)-u_k(y)| <= 2^{-k}|u(x)-u(y)|
                const double bound = std::ldexp(std::abs(u.values[cells[i]] - u.values[cells[j]]), -(kt_lo + t));
                worst_slack = std::max(worst_slack, std::abs(dk) - bound);
            }
        }
    }
    rep.worst_pointwise_slack = worst_slack;
    rep.pointwise_transfer_ok = worst_slack <= 1e-12 * std::max(1.0, vmax);

    auto Tu = [&](int ci, int cj) { return T_u[static_cast<std::size_t>(ci) * C + static_cast<std::size_t>(cj)]; };
    auto Tk = [&](int t, int ci, int cj) {
        return T_k[static_cast<std::size_t>(t)][static_cast<std::size_t>(ci) * C + static_cast<std::size_t>(cj)];
    };
    {
        KahanSum total;
        for (std::size_t c = 0; c < C * C; ++c) total.add(T_u[c]);
        rep.seminorm_integral = total.value();
    }

    // capacities of the closed level bands, seeded with the truncations
    rep.capacity_condition_ok = true;
    rep.truncation_admissible_ok = true;
    rep.split_bound_ok = true;
    double C2 = 0.0;
    rep.cap_per_level.assign(static_cast<std::size_t>(LT), 0.0);
    std::vector<double> Euk(static_cast<std::size_t>(LT), 0.0);
    for (int t = 0; t < LT; ++t) {
        // E(u_k), exact from the class kernels
        KahanSum e;
        for (std::size_t c = 0; c < C * C; ++c) e.add(T_k[static_cast<std::size_t>(t)][c]);
        Euk[static_cast<std::size_t>(t)] = e.value();
        const int k = kt_lo + t;
        const double mA = (k + 1 >= k_lo && k + 1 <= k_hi) ? measure_A[static_cast<std::size_t>(k + 1 - k_lo)] : 0.0;
        if (mA == 0.0) continue;
        // K = cells of A_{k+1}
        CompactSet<N> K;
        K.grid = u.grid;
        for (std::size_t i = 0; i < M; ++i)
            if (cls[i] == (k + 1) - k_lo + 1) K.cells.push_back(cells[i]);
        CapacityProblem<N> prob{u.domain, u.grid, K, P, 0};
        const auto cap = capacity_estimate(prob, cap_budget, &trunc[static_cast<std::size_t>(t)]);
        rep.cap_per_level[static_cast<std::size_t>(t)] = cap.value_upper;
        if (cap.value_upper > Euk[static_cast<std::size_t>(t)] * (1.0 + 1e-9))
            rep.truncation_admissible_ok = false;
        if (cap.value_upper > 0.0) C2 = std::max(C2, mA / std::pow(cap.value_upper, q / p));
    }
    rep.C2_measured = C2;

    // S2: level decomposition against the capacity condition
    {
        KahanSum rhs;
        for (int t = 0; t < LT; ++t) {
            const double cap = rep.cap_per_level[static_cast<std::size_t>(t)];
            if (cap > 0.0) rhs.add(std::pow(2.0, (kt_lo + t) * q) * std::pow(cap, q / p));
        }
        const double bound = C2 * std::pow(2.0, 2.0 * q) * rhs.value();
        rep.capacity_condition_ok = decomp.value() <= bound * (1.0 + 1e-9) || C2 == 0.0;
    }

    // S4/S5: the split of E(u_k) into low-high and F-high blocks, and the
    // pointwise 2·2^{-j} transfer per block
    double s4_worst = 0.0;
    for (int t = 0; t < LT; ++t) {
        const int k = kt_lo + t;
        KahanSum split;
        for (int j = std::max(k, k_lo); j <= k_hi; ++j) {
            const int cj = j - k_lo + 1;
            split.add(2.0 * Tk(t, 0, cj));  // F x A_j
            for (int i = k_lo; i <= k; ++i) split.add(2.0 * Tk(t, i - k_lo + 1, cj));
        }
        s4_worst = std::max(s4_worst, Euk[static_cast<std::size_t>(t)] - split.value() * (1.0 + 1e-12));
        for (int j = std::max(k, k_lo); j <= k_hi; ++j) {
            const int cj = j - k_lo + 1;
            const double factor = std::pow(2.0, p) * std::pow(2.0, -j * p);
            if (Tk(t, 0, cj) > factor * Tu(0, cj) * (1.0 + 1e-9) + 1e-300) rep.split_bound_ok = false;
            for (int i = k_lo; i <= k; ++i) {
                const int ci = i - k_lo + 1;
                if (Tk(t, ci, cj) > factor * Tu(ci, cj) * (1.0 + 1e-9) + 1e-300) rep.split_bound_ok = false;
            }
        }
    }
    if (s4_worst > 1e-12 * std::max(1.0, rep.seminorm_integral)) rep.split_bound_ok = false;

    // final assembly
    rep.C1_measured = rep.strong_lhs / std::pow(rep.seminorm_integral, q / p);
    rep.assembled_bound_ok = rep.C1_measured <= rep.C2_measured * rep.assembled_constant * (1.0 + 1e-9);

    // the unquantified forward factor (weak -> strong), recorded only
    const double a_star = inf_shift_lq(u, q).a_star;
    const double weak = std::min(weak_quasinorm(u, u.mean(), q), weak_quasinorm(u, a_star, q));
    const double strong_shift = inf_shift_lq(u, q).value;
    rep.forward_factor = weak > 0.0 ? strong_shift / weak : 0.0;
    return rep;
}

struct MazyaReport {
    InequalityReport report;
    double capacity_upper = 0.0;
    bool converged = true;
};

/// Necessary-direction Maz'ya check: the weighted mass of K against
/// cap^{q/p}. The capacity estimate is an upper bound, so only this
/// direction is certified; the caveat rides along in the report.
template <int N>
MazyaReport check_mazya_criterion(std::shared_ptr<const Domain<N>> dom, const CompactSet<N>& K,
                                  const FracParams& P, int cap_budget = 200) {
    P.validate();
    MazyaReport out;
    auto& rep = out.report;
    rep.name = "mazya_criterion";
    rep.domain_name = dom->name;
    rep.fill_params(P, N);
    rep.h = K.grid.h();
    const double w = P.hardy_weight(N);
    GridFunction<N> probe = GridFunction<N>::zeros(dom, K.grid.level);
    const double hn = std::pow(K.grid.h(), N);
    KahanSum lhs;
    for (std::size_t c : K.cells) lhs.add(std::pow(probe.bdist[c], -w));
    rep.lhs = lhs.value() * hn;
    CapacityProblem<N> prob{dom, K.grid, K, P, 0};
    const auto cap = capacity_estimate(prob, cap_budget);
    out.capacity_upper = cap.value_upper;
    out.converged = cap.converged;
    rep.rhs = std::pow(cap.value_upper, P.q(N) / P.p);
    if (rep.lhs == 0.0 && rep.rhs == 0.0)
        rep.degenerate = true;
    else
        rep.ratio = detail::safe_ratio(rep.lhs, rep.rhs);
    rep.extra["caveat"] = "capacity is an upper bound: necessary-direction check only";
    rep.extra["cap_converged"] = cap.converged;
    return out;
}

struct WhitneySumReport {
    double sum_term = 0.0;      // (sum_Q cap(K∩Q)^{q/p})^{p/q}
    double cap_total = 0.0;     // cap(K)
    double N_measured = 0.0;    // sum_term / cap_total
    std::vector<double> per_cube;
    std::vector<double> per_cube_cap;
};

/// Condition (B) probe: Whitney-localized capacities against cap(K).
template <int N>
WhitneySumReport check_whitney_capacity_sum(std::shared_ptr<const Domain<N>> dom, const CompactSet<N>& K,
                                            const FracParams& P, int cap_budget = 200) {
    P.validate();
    WhitneySumReport out;
    const auto fam = whitney_decompose<N>(dom, K.grid.level);
    const double q = P.q(N);
    // bucket K's cells by the accepted cube containing them
    std::unordered_map<CubeKey<N>, std::size_t, CubeKeyHash<N>> have;
    for (std::size_t i = 0; i < fam.cubes.size(); ++i) have[{fam.cubes[i].level, fam.cubes[i].index}] = i;
    std::map<std::size_t, std::vector<std::size_t>> pieces;
    for (std::size_t c : K.cells) {
        DyadicCube<N> walk = K.grid.cell_cube(K.grid.unflat(c));
        bool found = false;
        for (int lev = walk.level; lev >= dom->window_level; --lev) {
            if (auto it = have.find({walk.level, walk.index}); it != have.end()) {
                pieces[it->second].push_back(c);
                found = true;
                break;
            }
            walk = walk.parent();
        }
        if (!found) throw std::runtime_error("check_whitney_capacity_sum: K cell outside the resolved region");
    }
    KahanSum sum;
    for (const auto& [cube_id, cellv] : pieces) {
        CompactSet<N> piece;
        piece.grid = K.grid;
        piece.cells = cellv;
        CapacityProblem<N> prob{dom, K.grid, piece, P, 0};
        const auto cap = capacity_estimate(prob, cap_budget);
        out.per_cube_cap.push_back(cap.value_upper);
        sum.add(std::pow(cap.value_upper, q / P.p));
    }
    out.sum_term = std::pow(sum.value(), P.p / q);
    CapacityProblem<N> prob{dom, K.grid, K, P, 0};
    out.cap_total = capacity_estimate(prob, cap_budget).value_upper;
    out.N_measured = out.cap_total > 0 ? out.sum_term / out.cap_total : 0.0;
    return out;
}

struct CounterexampleResult {
    std::vector<GridFunction<2>> family;
    std::vector<double> ratios;
    std::vector<InequalityReport> reports;
    double growth = 0.0;  // ratio(m_max)/ratio(1)
    bool increasing = false;
};

/// Truncated-log bumps collapsing onto the slit of R^2 \ L: u_m =
/// clamp(1 - log(dist/r_m)/log(R/r_m)), r_m = 2^{-m}. In witness mode
/// delta = 1/p is required (the claimed failure regime); control mode
/// runs the same family at other exponents.
inline CounterexampleResult counterexample_sequence(int m_max, const FracParams& P, int level = 8,
                                                    double R = 0.625, bool control = false,
                                                    bool keep_family = false) {
    P.validate();
    if (!control && std::abs(P.delta - 1.0 / P.p) > 1e-12)
        throw std::invalid_argument("counterexample_sequence: witness mode requires delta = 1/p");
    if (m_max < 1) throw std::invalid_argument("counterexample_sequence: m_max must be >= 1");
    auto dom = make_domain<2>("plane_minus_segment");
    CounterexampleResult out;
    for (int m = 1; m <= m_max; ++m) {
        const double r = std::ldexp(1.0, -m);
        if (r >= R) throw std::invalid_argument("counterexample_sequence: need r_m < R");
        auto u = GridFunction<2>::sample(dom, level, [dom, r, R](const Vec<2>& x) {
            const double d = dom->dist_boundary(x);
            if (d <= 0.0) return 0.0;
            return std::clamp(1.0 - std::log(d / r) / std::log(R / r), 0.0, 1.0);
        });
        auto rep = check_hardy(u, P);
        rep.fixture = "log_bump_m" + std::to_string(m);
        rep.extra["m"] = m;
        rep.extra["r_m"] = r;
        rep.extra["R"] = R;
        out.ratios.push_back(rep.ratio);
        out.reports.push_back(std::move(rep));
        if (keep_family) out.family.push_back(std::move(u));
    }
    out.increasing = true;
    for (std::size_t i = 0; i + 1 < out.ratios.size(); ++i)
        if (!(out.ratios[i] < out.ratios[i + 1])) out.increasing = false;
    out.growth = out.ratios.front() > 0 ? out.ratios.back() / out.ratios.front() : 0.0;
    return out;
}

struct ExhaustionReport {
    std::vector<double> window_measures;
    std::vector<double> means;          // u_{D_i}
    std::vector<double> holder_bounds;  // |D_i|^{-1/p} ||u||_p
    double ratio_zero_shift = 0.0;      // SP ratio with a = 0 at the largest window
    double ratio_inf_shift = 0.0;       // SP ratio with a = a*
    bool holder_ok = false;
    bool means_decreasing = false;
};

/// Nested-window exhaustion of an unbounded domain: checks the Hölder
/// bound |u_{D_i}| <= |D_i|^{-1/p}||u||_p and that the zero-shift and
/// inf-shift Sobolev quotients agree on the largest window.
template <int N>
ExhaustionReport exhaustion_study(const GridFunction<N>& u, const FracParams& P, int levels = 5) {
    P.validate();
    if (u.domain->bounded) throw std::invalid_argument("exhaustion_study: domain must be unbounded");
    const double q = P.q(N);
    const double hn = std::pow(u.grid.h(), N);
    // support box must sit inside the smallest window
    Box<N> full = u.domain->window;
    auto window_at = [&](int i) {
        // shrink toward the window center by powers of two
        Box<N> w;
        const Vec<N> c = full.center();
        const double f = std::ldexp(1.0, -(levels - i));
        for (int d = 0; d < N; ++d) {
            w.lo[d] = c[d] + (full.lo[d] - c[d]) * f;
            w.hi[d] = c[d] + (full.hi[d] - c[d]) * f;
        }
        return w;
    };
    {
        const Box<N> w1 = window_at(1);
        for (std::size_t i = 0; i < u.values.size(); ++i)
            if (u.in[i] && u.values[i] != 0.0 && !w1.contains(u.grid.cell_center(u.grid.unflat(i))))
                throw std::invalid_argument("exhaustion_study: u not compactly supported in the smallest window");
    }
    ExhaustionReport rep;
    KahanSum up_norm;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (u.in[i]) up_norm.add(detail::pow_abs(u.values[i], P.p));
    const double unorm_p = std::pow(up_norm.value() * hn, 1.0 / P.p);

    rep.holder_ok = true;
    for (int i = 1; i <= levels; ++i) {
        const Box<N> w = window_at(i);
        KahanSum s;
        std::size_t count = 0;
        for (std::size_t idx = 0; idx < u.values.size(); ++idx) {
            if (!u.in[idx]) continue;
            if (!w.contains(u.grid.cell_center(u.grid.unflat(idx)))) continue;
            s.add(u.values[idx]);
            ++count;
        }
        const double measure = static_cast<double>(count) * hn;
        const double mean = count > 0 ? s.value() / static_cast<double>(count) : 0.0;
        rep.window_measures.push_back(measure);
        rep.means.push_back(mean);
        const double bound = std::pow(measure, -1.0 / P.p) * unorm_p;
        rep.holder_bounds.push_back(bound);
        if (std::abs(mean) > bound * (1.0 + 1e-12)) rep.holder_ok = false;
    }
    rep.means_decreasing = true;
    for (std::size_t i = 0; i + 1 < rep.means.size(); ++i)
        if (std::abs(rep.means[i + 1]) > std::abs(rep.means[i]) * (1.0 + 1e-12)) rep.means_decreasing = false;

    const auto tau = seminorm_tau(u, P);
    const double rhs = std::pow(tau.integral, q / P.p);
    KahanSum zero_lhs;
    for (std::size_t i = 0; i < u.values.size(); ++i)
        if (u.in[i]) zero_lhs.add(detail::pow_abs(u.values[i], q));
    rep.ratio_zero_shift = detail::safe_ratio(zero_lhs.value() * hn, rhs);
    rep.ratio_inf_shift = detail::safe_ratio(inf_shift_lq(u, q).value, rhs);
    return rep;
}

}  // namespace fraclab

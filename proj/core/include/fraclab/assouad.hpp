#pragma once

#include <fstream>

#include "fraclab/functional.hpp"
#include "fraclab/geometry.hpp"

namespace fraclab {

/// One covering count: center id, scales (R, r) and the greedy r-net
/// size of E ∩ B(center, R).
struct CoveringCount {
    std::size_t center_id;
    double R;
    double r;
    std::size_t count;
};

/// Covering counts over the fixed scale ladder plus the log-log fits.
struct CoveringProfile {
    std::vector<CoveringCount> counts;
    double slope_max = 0.0;  // upper Assouad estimate
    double slope_min = 0.0;  // lower Assouad estimate
    double residual = 0.0;   // worst per-center rms of the fits
    /// Conservative bracket from the greedy-net 2-approximation.
    double interval_lo = 0.0;
    double interval_hi = 0.0;

    void write_csv(const std::string& path) const {
        std::ofstream os(path);
        os << "center_id,R,r,count\n";
        char buf[96];
        for (const auto& c : counts) {
            std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%zu\n", c.center_id, c.R, c.r, c.count);
            os << buf;
        }
    }
};

namespace detail {

template <int N>
double bbox_diameter(const std::vector<Vec<N>>& pts) {
    Vec<N> lo = pts.front(), hi = pts.front();
    for (const auto& p : pts)
        for (int i = 0; i < N; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += (hi[i] - lo[i]) * (hi[i] - lo[i]);
    return std::sqrt(s);
}

/// Greedy r-net of E ∩ B(center, R) in fixed point order: kept points
/// are pairwise > r apart and r-cover the intersection.
template <int N>
std::size_t greedy_net_count(const std::vector<Vec<N>>& pts, const Vec<N>& center, double R, double r) {
    std::vector<Vec<N>> kept;
    const double R2 = R * R, r2 = r * r;
    for (const auto& p : pts) {
        double dc = 0.0;
        for (int i = 0; i < N; ++i) dc += (p[i] - center[i]) * (p[i] - center[i]);
        if (dc > R2) continue;
        bool fresh = true;
        for (const auto& k : kept) {
            double dk = 0.0;
            for (int i = 0; i < N; ++i) dk += (p[i] - k[i]) * (p[i] - k[i]);
            if (dk <= r2) {
                fresh = false;
                break;
            }
        }
        if (fresh) kept.push_back(p);
    }
    return kept.size();
}

}  // namespace detail

/// Covering profile over the fixed ladder (R, r) = (2^-a, 2^-a-b)·diam,
/// a in 1..4, b in 2..5, for a deterministic center subsample.
template <int N>
CoveringProfile covering_profile(const std::vector<Vec<N>>& pts, std::size_t n_centers = 16) {
    if (pts.size() < 1000) throw std::invalid_argument("covering_profile: need at least 10^3 boundary samples");
    CoveringProfile prof;
    const double diam = detail::bbox_diameter<N>(pts);
    if (diam == 0.0) {  // single point: all counts are 1, slope 0
        prof.counts.push_back({0, 0.0, 0.0, 1});
        return prof;
    }
    // crude sample-resolution guard: the finest scale must stay above
    // the typical inter-sample spacing
    const double spacing = 2.0 * diam / static_cast<double>(pts.size());
    const double r_finest = std::ldexp(diam, -9);
    if (r_finest < spacing)
        throw std::invalid_argument("covering_profile: scale ladder below the sample resolution");

    std::vector<std::size_t> centers;
    const std::size_t stride = std::max<std::size_t>(1, pts.size() / n_centers);
    for (std::size_t i = 0; i < pts.size() && centers.size() < n_centers; i += stride) centers.push_back(i);

    double smax = -std::numeric_limits<double>::infinity();
    double smin = std::numeric_limits<double>::infinity();
    double worst_resid = 0.0;
    for (std::size_t ci : centers) {
        std::vector<double> X, Y;
        for (int a = 1; a <= 4; ++a)
            for (int b = 2; b <= 5; ++b) {
                const double R = std::ldexp(diam, -a);
                const double r = std::ldexp(diam, -a - b);
                const std::size_t cnt = detail::greedy_net_count<N>(pts, pts[ci], R, r);
                prof.counts.push_back({ci, R, r, cnt});
                if (cnt >= 1) {
                    X.push_back(std::log(R / r));
                    Y.push_back(std::log(static_cast<double>(cnt)));
                }
            }
        if (X.size() < 2) continue;
        // least squares slope of Y on X
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            mx += X[i];
            my += Y[i];
        }
        mx /= X.size();
        my /= Y.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            sxx += (X[i] - mx) * (X[i] - mx);
            sxy += (X[i] - mx) * (Y[i] - my);
        }
        const double slope = sxy / sxx;
        double rss = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            const double e = Y[i] - my - slope * (X[i] - mx);
            rss += e * e;
        }
        worst_resid = std::max(worst_resid, std::sqrt(rss / X.size()));
        smax = std::max(smax, slope);
        smin = std::min(smin, slope);
    }
    if (!std::isfinite(smax)) {
        smax = smin = 0.0;  // all counts saturated at 1 (finite set below separation)
    }
    prof.slope_max = std::max(0.0, smax);
    prof.slope_min = std::max(0.0, smin);
    prof.residual = worst_resid;
    prof.interval_lo = prof.slope_min / 2.0;  // greedy net is a 2-approximation
    prof.interval_hi = prof.slope_max;
    return prof;
}

/// Upper Assouad estimate: max over centers of the count-growth slope.
template <int N>
double upper_assouad_estimate(const std::vector<Vec<N>>& pts, std::size_t n_centers = 16) {
    return covering_profile<N>(pts, n_centers).slope_max;
}

/// Lower Assouad estimate: min over centers of the count-growth slope.
template <int N>
double lower_assouad_estimate(const std::vector<Vec<N>>& pts, std::size_t n_centers = 16) {
    return covering_profile<N>(pts, n_centers).slope_min;
}

enum class ConditionStatus { holds, fails, inconclusive };

inline const char* to_string(ConditionStatus s) {
    switch (s) {
        case ConditionStatus::holds: return "holds";
        case ConditionStatus::fails: return "fails";
        default: return "inconclusive";
    }
}

struct CorollaryConditions {
    ConditionStatus A = ConditionStatus::inconclusive;
    ConditionStatus B = ConditionStatus::inconclusive;
    double lambda_upper = 0.0;
    double lambda_lower = 0.0;
    double threshold = 0.0;  // n - delta p
    double margin = 0.0;
    bool boundary_unbounded = false;
};

/// Sufficient-condition tests: (A) upper dim < n - delta p, (B) lower
/// dim > n - delta p with unbounded boundary. Estimates within `margin`
/// of the threshold are inconclusive (the estimator brackets, it does
/// not decide boundary cases).
template <int N>
CorollaryConditions corollary_conditions(const Domain<N>& dom, const FracParams& P,
                                         std::size_t sample_count = 8192, double margin = 0.12) {
    P.validate();
    CorollaryConditions out;
    out.threshold = N - P.delta * P.p;
    out.margin = margin;
    out.boundary_unbounded = dom.boundary_unbounded;
    auto pts = dom.boundary_sample(sample_count);
    const auto prof = covering_profile<N>(pts);
    out.lambda_upper = prof.slope_max;
    out.lambda_lower = prof.slope_min;
    if (out.lambda_upper + margin < out.threshold)
        out.A = ConditionStatus::holds;
    else if (out.lambda_upper - margin > out.threshold)
        out.A = ConditionStatus::fails;
    else
        out.A = ConditionStatus::inconclusive;
    if (!dom.boundary_unbounded)
        out.B = ConditionStatus::fails;
    else if (out.lambda_lower - margin > out.threshold)
        out.B = ConditionStatus::holds;
    else if (out.lambda_lower + margin < out.threshold)
        out.B = ConditionStatus::fails;
    else
        out.B = ConditionStatus::inconclusive;
    return out;
}

}  // namespace fraclab

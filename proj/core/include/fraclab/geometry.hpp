#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fraclab/common.hpp"

namespace fraclab {

/// Dyadic cube 2^{-j}(k + [0,1]^N). Side 2^{-j}; corners on the dyadic
/// lattice of its level.
template <int N>
struct DyadicCube {
    int level = 0;
    std::array<std::int64_t, N> index{};

    double side() const { return std::ldexp(1.0, -level); }
    double diam() const { return side() * std::sqrt(static_cast<double>(N)); }
    double volume() const { return std::ldexp(1.0, -level * N); }

    Box<N> box() const {
        Box<N> b;
        const double s = side();
        for (int i = 0; i < N; ++i) {
            b.lo[i] = static_cast<double>(index[i]) * s;
            b.hi[i] = static_cast<double>(index[i] + 1) * s;
        }
        return b;
    }

    Vec<N> center() const {
        Vec<N> c;
        const double s = side();
        for (int i = 0; i < N; ++i) c[i] = (static_cast<double>(index[i]) + 0.5) * s;
        return c;
    }

    /// rQ: dilation about the center, side r*2^{-j}. Not dyadic for r != 1.
    Box<N> dilated(double r) const { return box().dilated(r); }

    /// (9/8)Q, the paper's Q*.
    Box<N> star() const { return dilated(9.0 / 8.0); }

    /// (17/16)Q, the paper's Q-hat.
    Box<N> hat() const { return dilated(17.0 / 16.0); }

    DyadicCube child(int corner_mask) const {
        DyadicCube c;
        c.level = level + 1;
        for (int i = 0; i < N; ++i)
            c.index[i] = 2 * index[i] + ((corner_mask >> i) & 1);
        return c;
    }

    DyadicCube parent() const {
        DyadicCube p;
        p.level = level - 1;
        for (int i = 0; i < N; ++i)
            p.index[i] = index[i] >= 0 ? index[i] / 2 : -((-index[i] + 1) / 2);
        return p;
    }

    friend bool operator==(const DyadicCube& a, const DyadicCube& b) {
        return a.level == b.level && a.index == b.index;
    }
    friend auto operator<=>(const DyadicCube& a, const DyadicCube& b) = default;
};

/// A gallery domain: membership predicate plus an exact distance to the
/// boundary, a finite computation window, and a John-constant annotation.
/// All closures are closed-form per gallery member; instances are
/// immutable after construction and safe to share between workers.
template <int N>
class Domain {
public:
    std::string name;
    nlohmann::json params;
    bool bounded = true;
    bool boundary_unbounded = false;
    std::optional<double> john_constant;
    Box<N> window{};
    /// Dyadic level whose lattice is aligned with the window corners;
    /// the Whitney top cubes live at this level.
    int window_level = 0;

    /// Signed distance to the boundary; > 0 inside. For slit-type
    /// domains with empty exterior the value is the plain distance.
    double signed_dist(const Vec<N>& x) const { return sdf_(x); }

    /// max(signed_dist, 0), so dist_boundary(x) > 0 iff inside(x).
    double dist_boundary(const Vec<N>& x) const { return std::max(sdf_(x), 0.0); }

    bool inside(const Vec<N>& x) const { return sdf_(x) > 0.0; }

    /// Setwise distance inf_{x in B} dist(x, boundary); exact for the
    /// gallery (0 when the box is not contained in the domain).
    double cube_dist(const Box<N>& b) const { return cube_dist_(b); }

    /// Whether the open box meets the open domain. Exact per gallery.
    bool cube_intersects(const Box<N>& b) const { return intersects_(b); }

    /// Deterministic, roughly equispaced sample of the boundary within
    /// the window; feeds the Assouad estimators.
    std::vector<Vec<N>> boundary_sample(std::size_t count) const { return boundary_(count); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["name"] = name;
        j["params"] = params;
        j["window"] = {{"lo", window.lo}, {"hi", window.hi}};
        j["bounded"] = bounded;
        if (john_constant) j["john_constant"] = *john_constant;
        return j;
    }

    // Factory wiring; only make_domain constructs these.
    std::function<double(const Vec<N>&)> sdf_;
    std::function<double(const Box<N>&)> cube_dist_;
    std::function<bool(const Box<N>&)> intersects_;
    std::function<std::vector<Vec<N>>(std::size_t)> boundary_;
};

/// Builds a gallery domain.
///
/// Names: unit_square, ball (r), cone (aperture, window_size),
/// plane_minus_segment (window_size), l_shape, half_space (window_size).
/// Throws std::invalid_argument for unknown names, nonpositive size
/// parameters, or members not defined in the requested dimension.
template <int N>
std::shared_ptr<const Domain<N>> make_domain(const std::string& spec_name,
                                             const nlohmann::json& params = nlohmann::json::object());

/// Distance from point x to the closed segment [a, b].
template <int N>
double segment_dist(const Vec<N>& x, const Vec<N>& a, const Vec<N>& b);

extern template std::shared_ptr<const Domain<2>> make_domain<2>(const std::string&, const nlohmann::json&);
extern template std::shared_ptr<const Domain<3>> make_domain<3>(const std::string&, const nlohmann::json&);

}  // namespace fraclab

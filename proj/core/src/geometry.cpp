#include "fraclab/geometry.hpp"

#include <cmath>

namespace fraclab {

namespace {

double get_param(const nlohmann::json& params, const std::string& key, double fallback) {
    if (params.contains(key)) return params.at(key).get<double>();
    return fallback;
}

bool is_power_of_two(double v) {
    if (v <= 0) return false;
    const double l = std::log2(v);
    return l == std::floor(l);
}

template <int N>
std::vector<Vec<N>> sample_segment(const Vec<N>& a, const Vec<N>& b, std::size_t count) {
    std::vector<Vec<N>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(count - 1);
        Vec<N> p;
        for (int d = 0; d < N; ++d) p[d] = a[d] + t * (b[d] - a[d]);
        out.push_back(p);
    }
    return out;
}

// Distance from box to the segment [0,1]x{0}; the point-to-box map is
// convex along the segment, so ternary search is exact to rounding.
template <int N>
double box_to_unit_segment_dist(const Box<N>& b) {
    static_assert(N == 2);
    if (b.lo[1] <= 0.0 && b.hi[1] >= 0.0 && b.lo[0] <= 1.0 && b.hi[0] >= 0.0) return 0.0;
    auto f = [&](double t) {
        Vec<N> p{t, 0.0};
        return b.dist_to(p);
    };
    double a = 0.0, c = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double m1 = a + (c - a) / 3.0;
        const double m2 = c - (c - a) / 3.0;
        if (f(m1) < f(m2))
            c = m2;
        else
            a = m1;
    }
    return f(0.5 * (a + c));
}

template <int N>
std::shared_ptr<const Domain<N>> make_unit_square(const nlohmann::json& params) {
    auto d = std::make_shared<Domain<N>>();
    d->name = "unit_square";
    d->params = params;
    d->bounded = true;
    d->john_constant = 2.0;
    for (int i = 0; i < N; ++i) {
        d->window.lo[i] = 0.0;
        d->window.hi[i] = 1.0;
    }
    d->window_level = 0;
    const Box<N> outer = d->window;
    d->sdf_ = [outer](const Vec<N>& x) { return outer.signed_dist(x); };
    d->cube_dist_ = [outer](const Box<N>& b) {
        if (!outer.contains_box(b)) return 0.0;
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < N; ++i)
            m = std::min({m, b.lo[i] - outer.lo[i], outer.hi[i] - b.hi[i]});
        return m;
    };
    d->intersects_ = [outer](const Box<N>& b) { return outer.overlaps_open(b); };
    d->boundary_ = [outer](std::size_t count) {
        std::vector<Vec<N>> out;
        if constexpr (N == 2) {
            const std::size_t per = std::max<std::size_t>(count / 4, 2);
            auto emit = [&](Vec<2> a, Vec<2> b2) {
                for (auto& p : sample_segment<2>(a, b2, per)) out.push_back(p);
            };
            emit({0, 0}, {1, 0});
            emit({1, 0}, {1, 1});
            emit({1, 1}, {0, 1});
            emit({0, 1}, {0, 0});
        } else {
            // six faces, stratified grid
            const std::size_t per_face = std::max<std::size_t>(count / 6, 4);
            const std::size_t g = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(double(per_face))));
            for (int axis = 0; axis < 3; ++axis)
                for (int sideidx = 0; sideidx < 2; ++sideidx)
                    for (std::size_t i = 0; i < g; ++i)
                        for (std::size_t j = 0; j < g; ++j) {
                            Vec<3> p;
                            p[axis] = sideidx ? 1.0 : 0.0;
                            p[(axis + 1) % 3] = (i + 0.5) / g;
                            p[(axis + 2) % 3] = (j + 0.5) / g;
                            out.push_back(p);
                        }
        }
        return out;
    };
    return d;
}

template <int N>
std::shared_ptr<const Domain<N>> make_ball(const nlohmann::json& params) {
    const double r = get_param(params, "r", 1.0);
    if (r <= 0) throw std::invalid_argument("ball: radius must be positive");
    auto d = std::make_shared<Domain<N>>();
    d->name = "ball";
    d->params = {{"r", r}};
    d->bounded = true;
    d->john_constant = 2.0;
    const double R = std::exp2(std::ceil(std::log2(r)));
    for (int i = 0; i < N; ++i) {
        d->window.lo[i] = -R;
        d->window.hi[i] = R;
    }
    d->window_level = -static_cast<int>(std::lround(std::log2(R)));
    d->sdf_ = [r](const Vec<N>& x) { return r - norm<N>(x); };
    d->cube_dist_ = [r](const Box<N>& b) {
        double far2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double m = std::max(std::abs(b.lo[i]), std::abs(b.hi[i]));
            far2 += m * m;
        }
        return std::max(0.0, r - std::sqrt(far2));
    };
    d->intersects_ = [r](const Box<N>& b) {
        Vec<N> origin{};
        return b.dist_to(origin) < r;
    };
    d->boundary_ = [r](std::size_t count) {
        std::vector<Vec<N>> out;
        if constexpr (N == 2) {
            for (std::size_t i = 0; i < count; ++i) {
                const double t = 2.0 * M_PI * i / count;
                out.push_back({r * std::cos(t), r * std::sin(t)});
            }
        } else {
            // Fibonacci sphere
            const double golden = M_PI * (3.0 - std::sqrt(5.0));
            for (std::size_t i = 0; i < count; ++i) {
                const double z = 1.0 - 2.0 * (i + 0.5) / count;
                const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
                const double th = golden * i;
                out.push_back({r * rad * std::cos(th), r * rad * std::sin(th), r * z});
            }
        }
        return out;
    };
    return d;
}

// {x : x_N > cot(aperture) * |x'|}; aperture pi/4 gives the cone x_n > |x'|.
template <int N>
std::shared_ptr<const Domain<N>> make_cone(const nlohmann::json& params) {
    const double aperture = get_param(params, "aperture", M_PI / 4.0);
    const double S = get_param(params, "window_size", 4.0);
    if (S <= 0) throw std::invalid_argument("cone: window_size must be positive");
    if (!is_power_of_two(S)) throw std::invalid_argument("cone: window_size must be a power of two");
    if (aperture <= 0 || aperture >= M_PI / 2)
        throw std::invalid_argument("cone: aperture must lie in (0, pi/2)");
    auto d = std::make_shared<Domain<N>>();
    d->name = "cone";
    d->params = {{"aperture", aperture}, {"window_size", S}};
    d->bounded = false;
    d->boundary_unbounded = true;
    d->john_constant = 1.0 / std::sin(aperture);
    for (int i = 0; i + 1 < N; ++i) {
        d->window.lo[i] = -S;
        d->window.hi[i] = S;
    }
    d->window.lo[N - 1] = 0.0;
    d->window.hi[N - 1] = 2.0 * S;
    d->window_level = -static_cast<int>(std::lround(std::log2(S)));
    const double sa = std::sin(aperture), ca = std::cos(aperture);
    auto radial = [](const Vec<N>& x) {
        double s = 0.0;
        for (int i = 0; i + 1 < N; ++i) s += x[i] * x[i];
        return std::sqrt(s);
    };
    d->sdf_ = [sa, ca, radial](const Vec<N>& x) {
        const double rr = radial(x);
        const double z = x[N - 1];
        if (rr * sa + z * ca >= 0.0) return z * sa - rr * ca;
        return -std::sqrt(rr * rr + z * z);  // nearest boundary point is the apex
    };
    // sdf is concave inside the (convex) cone, so the min over an inside
    // box is at a corner; any outside corner forces 0.
    d->cube_dist_ = [d](const Box<N>& b) {
        double m = std::numeric_limits<double>::infinity();
        b.for_each_corner([&](const Vec<N>& c) { m = std::min(m, d->sdf_(c)); });
        return std::max(0.0, m);
    };
    d->intersects_ = [sa, ca](const Box<N>& b) {
        double rmin2 = 0.0;
        for (int i = 0; i + 1 < N; ++i) {
            const double g = std::max({0.0, b.lo[i], -b.hi[i]});
            rmin2 += g * g;
        }
        return b.hi[N - 1] * sa - std::sqrt(rmin2) * ca > 0.0;
    };
    d->boundary_ = [sa, ca, S](std::size_t count) {
        const double tmax = std::min(S / sa, 2.0 * S / ca);
        std::vector<Vec<N>> out;
        if constexpr (N == 2) {
            const std::size_t per = std::max<std::size_t>(count / 2, 2);
            for (int sgn : {-1, 1})
                for (std::size_t i = 0; i < per; ++i) {
                    const double t = tmax * i / (per - 1);
                    out.push_back({sgn * t * sa, t * ca});
                }
        } else {
            const std::size_t rings = std::max<std::size_t>(8, static_cast<std::size_t>(std::sqrt(double(count))));
            const std::size_t per_ring = std::max<std::size_t>(8, count / rings);
            for (std::size_t i = 0; i < rings; ++i) {
                const double t = tmax * (i + 0.5) / rings;
                for (std::size_t j = 0; j < per_ring; ++j) {
                    const double th = 2.0 * M_PI * j / per_ring;
                    out.push_back({t * sa * std::cos(th), t * sa * std::sin(th), t * ca});
                }
            }
        }
        return out;
    };
    return d;
}

template <int N>
std::shared_ptr<const Domain<N>> make_plane_minus_segment(const nlohmann::json& params) {
    if constexpr (N != 2) {
        throw std::invalid_argument("plane_minus_segment: defined for n = 2 only");
    } else {
        const double w = get_param(params, "window_size", 1.0);
        if (w <= 0) throw std::invalid_argument("plane_minus_segment: window_size must be positive");
        if (w != std::floor(w)) throw std::invalid_argument("plane_minus_segment: window_size must be an integer");
        auto d = std::make_shared<Domain<2>>();
        d->name = "plane_minus_segment";
        d->params = {{"window_size", w}};
        d->bounded = false;
        d->john_constant = 3.0;
        d->window.lo = {-w, -w};
        d->window.hi = {1.0 + w, w};
        d->window_level = 0;
        const Vec<2> a{0.0, 0.0}, b{1.0, 0.0};
        d->sdf_ = [a, b](const Vec<2>& x) { return segment_dist<2>(x, a, b); };
        d->cube_dist_ = [](const Box<2>& bx) { return box_to_unit_segment_dist<2>(bx); };
        d->intersects_ = [](const Box<2>&) { return true; };  // the slit has measure zero
        d->boundary_ = [a, b](std::size_t count) { return sample_segment<2>(a, b, std::max<std::size_t>(count, 2)); };
        return d;
    }
}

template <int N>
std::shared_ptr<const Domain<N>> make_l_shape(const nlohmann::json& params) {
    if constexpr (N != 2) {
        throw std::invalid_argument("l_shape: defined for n = 2 only");
    } else {
        auto d = std::make_shared<Domain<2>>();
        d->name = "l_shape";
        d->params = params;
        d->bounded = true;
        d->john_constant = 3.0;
        d->window.lo = {0.0, 0.0};
        d->window.hi = {1.0, 1.0};
        d->window_level = 0;
        const Box<2> outer{{0.0, 0.0}, {1.0, 1.0}};
        const Box<2> excl{{0.5, 0.5}, {1.0, 1.0}};
        d->sdf_ = [outer, excl](const Vec<2>& x) {
            return std::min(outer.signed_dist(x), -excl.signed_dist(x));
        };
        d->cube_dist_ = [outer, excl](const Box<2>& b) {
            if (!outer.contains_box(b)) return 0.0;
            if (b.overlaps_open(excl)) return 0.0;
            double m = std::numeric_limits<double>::infinity();
            for (int i = 0; i < 2; ++i)
                m = std::min({m, b.lo[i] - outer.lo[i], outer.hi[i] - b.hi[i]});
            return std::min(m, b.dist_to_box(excl));
        };
        d->intersects_ = [outer, excl](const Box<2>& b) {
            if (!outer.overlaps_open(b)) return false;
            const Box<2> c = outer.intersection(b);
            return c.lo[0] < excl.lo[0] || c.lo[1] < excl.lo[1];
        };
        d->boundary_ = [](std::size_t count) {
            // perimeter pieces; total length 4
            struct Piece { Vec<2> a, b; double len; };
            const std::vector<Piece> pieces = {
                {{0, 0}, {1, 0}, 1.0},     {{1, 0}, {1, 0.5}, 0.5}, {{1, 0.5}, {0.5, 0.5}, 0.5},
                {{0.5, 0.5}, {0.5, 1}, 0.5}, {{0.5, 1}, {0, 1}, 0.5}, {{0, 1}, {0, 0}, 1.0}};
            std::vector<Vec<2>> out;
            for (const auto& p : pieces) {
                const auto per = std::max<std::size_t>(2, static_cast<std::size_t>(count * p.len / 4.0));
                for (auto& q : sample_segment<2>(p.a, p.b, per)) out.push_back(q);
            }
            return out;
        };
        return d;
    }
}

template <int N>
std::shared_ptr<const Domain<N>> make_half_space(const nlohmann::json& params) {
    const double S = get_param(params, "window_size", 2.0);
    if (S <= 0) throw std::invalid_argument("half_space: window_size must be positive");
    if (!is_power_of_two(S)) throw std::invalid_argument("half_space: window_size must be a power of two");
    auto d = std::make_shared<Domain<N>>();
    d->name = "half_space";
    d->params = {{"window_size", S}};
    d->bounded = false;
    d->boundary_unbounded = true;
    d->john_constant = 2.0;
    for (int i = 0; i < N; ++i) {
        d->window.lo[i] = -S;
        d->window.hi[i] = S;
    }
    d->window_level = -static_cast<int>(std::lround(std::log2(S)));
    d->sdf_ = [](const Vec<N>& x) { return x[N - 1]; };
    d->cube_dist_ = [](const Box<N>& b) { return std::max(0.0, b.lo[N - 1]); };
    d->intersects_ = [](const Box<N>& b) { return b.hi[N - 1] > 0.0; };
    d->boundary_ = [S](std::size_t count) {
        std::vector<Vec<N>> out;
        if constexpr (N == 2) {
            out = sample_segment<2>({-S, 0.0}, {S, 0.0}, std::max<std::size_t>(count, 2));
        } else {
            const std::size_t g = std::max<std::size_t>(4, static_cast<std::size_t>(std::sqrt(double(count))));
            for (std::size_t i = 0; i < g; ++i)
                for (std::size_t j = 0; j < g; ++j)
                    out.push_back({-S + 2 * S * (i + 0.5) / g, -S + 2 * S * (j + 0.5) / g, 0.0});
        }
        return out;
    };
    return d;
}

}  // namespace

template <int N>
double segment_dist(const Vec<N>& x, const Vec<N>& a, const Vec<N>& b) {
    Vec<N> ab, ax;
    for (int i = 0; i < N; ++i) {
        ab[i] = b[i] - a[i];
        ax[i] = x[i] - a[i];
    }
    const double len2 = dot<N>(ab, ab);
    double t = len2 > 0 ? dot<N>(ax, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
        const double d = x[i] - (a[i] + t * ab[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

template <int N>
std::shared_ptr<const Domain<N>> make_domain(const std::string& spec_name, const nlohmann::json& params) {
    if (spec_name == "unit_square") return make_unit_square<N>(params);
    if (spec_name == "ball") return make_ball<N>(params);
    if (spec_name == "cone") return make_cone<N>(params);
    if (spec_name == "plane_minus_segment") return make_plane_minus_segment<N>(params);
    if (spec_name == "l_shape") return make_l_shape<N>(params);
    if (spec_name == "half_space") return make_half_space<N>(params);
    throw std::invalid_argument("make_domain: unknown gallery name '" + spec_name + "'");
}

template double segment_dist<2>(const Vec<2>&, const Vec<2>&, const Vec<2>&);
template double segment_dist<3>(const Vec<3>&, const Vec<3>&, const Vec<3>&);
template std::shared_ptr<const Domain<2>> make_domain<2>(const std::string&, const nlohmann::json&);
template std::shared_ptr<const Domain<3>> make_domain<3>(const std::string&, const nlohmann::json&);

}  // namespace fraclab

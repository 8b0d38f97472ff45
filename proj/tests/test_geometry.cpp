#include <doctest.h>

#include "fraclab/geometry.hpp"
#include "fraclab/john.hpp"
#include "oracles.hpp"

using namespace fraclab;

TEST_CASE("gallery factory basics") {
    auto sq = make_domain<2>("unit_square");
    CHECK(sq->dist_boundary({0.5, 0.5}) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sq->bounded);

    auto cone = make_domain<2>("cone");
    CHECK(cone->inside({0.0, 1.0}));
    CHECK(!cone->inside({1.0, 0.0}));
    CHECK(!cone->bounded);
    CHECK(cone->boundary_unbounded);

    auto slit = make_domain<2>("plane_minus_segment");
    CHECK(slit->dist_boundary({0.5, 0.3}) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(!slit->inside({0.5, 0.0}));
    CHECK(slit->inside({1.5, 0.0}));  // beyond the segment tip

    CHECK_THROWS_AS((void)make_domain<2>("dodecahedron"), std::invalid_argument);
    CHECK_THROWS_AS((void)make_domain<2>("ball", {{"r", -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS((void)make_domain<3>("l_shape"), std::invalid_argument);
    CHECK_THROWS_AS((void)make_domain<3>("plane_minus_segment"), std::invalid_argument);
}

TEST_CASE("dist_boundary is 1-Lipschitz and characterizes membership") {
    const char* names[] = {"unit_square", "ball", "cone", "plane_minus_segment", "l_shape", "half_space"};
    for (const char* nm : names) {
        auto dom = make_domain<2>(nm);
        SplitMix64 rng(42);
        const auto& w = dom->window;
        for (int i = 0; i < 10000; ++i) {
            Vec<2> x, y;
            for (int d = 0; d < 2; ++d) {
                x[d] = w.lo[d] + rng.next_double() * w.side(d);
                y[d] = w.lo[d] + rng.next_double() * w.side(d);
            }
            const double dx = dom->dist_boundary(x), dy = dom->dist_boundary(y);
            CHECK(std::abs(dx - dy) <= dist<2>(x, y) * (1.0 + 1e-12) + 1e-15);
        }
        // window lattice: inside(x) iff dist > 0
        for (int gx = 0; gx < 32; ++gx)
            for (int gy = 0; gy < 32; ++gy) {
                Vec<2> p{w.lo[0] + (gx + 0.5) / 32.0 * w.side(0), w.lo[1] + (gy + 0.5) / 32.0 * w.side(1)};
                CHECK(dom->inside(p) == (dom->dist_boundary(p) > 0.0));
            }
    }
}

TEST_CASE("dilation algebra") {
    DyadicCube<2> q{3, {5, -2}};
    for (double r : {9.0 / 8.0, 17.0 / 16.0, 2.0 * 9.0 / 8.0}) {
        const Box<2> d = q.dilated(r);
        const Vec<2> c = q.box().center();
        CHECK(d.center()[0] == doctest::Approx(c[0]).epsilon(1e-15));
        CHECK(d.center()[1] == doctest::Approx(c[1]).epsilon(1e-15));
        CHECK(d.side(0) == doctest::Approx(r * q.side()).epsilon(1e-15));
    }
    CHECK(q.parent().child(1 | 0).level == q.level);
}

TEST_CASE("cube distance: exact values and the sampling oracle") {
    auto sq = make_domain<2>("unit_square");
    CHECK(sq->cube_dist({{0.25, 0.25}, {0.5, 0.5}}) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(sq->cube_dist({{-0.1, 0.2}, {0.2, 0.4}}) == 0.0);  // crosses the boundary

    auto ball = make_domain<2>("ball");
    const Box<2> b{{0.4, 0.4}, {0.6, 0.6}};
    const double exact = 1.0 - std::sqrt(0.6 * 0.6 + 0.6 * 0.6);
    CHECK(ball->cube_dist(b) == doctest::Approx(exact).epsilon(1e-14));
    CHECK(oracles::sampled_cube_dist(*ball, b) == doctest::Approx(exact).epsilon(1e-8));

    auto slit = make_domain<2>("plane_minus_segment");
    CHECK(slit->cube_dist({{0.2, 0.1}, {0.4, 0.3}}) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(slit->cube_dist({{0.2, -0.1}, {0.4, 0.1}}) == 0.0);
    // off-tip box: nearest segment point is the endpoint (1, 0)
    const Box<2> tip{{1.5, 0.5}, {2.0, 1.0}};
    CHECK(slit->cube_dist(tip) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(oracles::sampled_cube_dist(*slit, tip) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-8));

    auto lsh = make_domain<2>("l_shape");
    CHECK(lsh->cube_dist({{0.125, 0.125}, {0.25, 0.25}}) == doctest::Approx(0.125).epsilon(1e-15));
    // distance limited by the excluded quadrant (diagonal gap)
    CHECK(lsh->cube_dist({{0.25, 0.25}, {0.375, 0.375}}) ==
          doctest::Approx(0.125 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("domain serialization") {
    auto cone = make_domain<2>("cone", {{"aperture", M_PI / 4}, {"window_size", 2.0}});
    const auto j = cone->to_json();
    CHECK(j["name"] == "cone");
    CHECK(j["params"]["window_size"] == 2.0);
    CHECK(j.contains("john_constant"));
}

TEST_CASE("john curves: witness search") {
    auto sq = make_domain<2>("unit_square");
    SplitMix64 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        const Vec<2> x1{0.05 + 0.9 * rng.next_double(), 0.05 + 0.9 * rng.next_double()};
        const Vec<2> x2{0.05 + 0.9 * rng.next_double(), 0.05 + 0.9 * rng.next_double()};
        const auto r1 = john_curve_exists<2>(sq, x1, x2, 10.0, 6);
        CHECK(r1.found);
        CHECK(r1.polyline.size() >= 2);
    }

    const auto r2 = john_curve_exists<2>(sq, {0.3, 0.7}, {0.3, 0.7}, 1.0, 6);
    CHECK(r2.found);
    CHECK(r2.length == 0.0);

    CHECK_THROWS_AS((void)john_curve_exists<2>(sq, {-1.0, 0.5}, {0.5, 0.5}, 2.0, 5), std::invalid_argument);

    auto slit = make_domain<2>("plane_minus_segment");
    // opposite sides of the slit near its middle: the cigar must round
    // the tip, impossible at c barely above 1
    const auto r3 = john_curve_exists<2>(slit, {0.5, 0.05}, {0.5, -0.05}, 1.01, 8);
    CHECK(!r3.found);
    const auto r4 = john_curve_exists<2>(slit, {0.5, 0.05}, {0.5, -0.05}, 60.0, 8);
    CHECK(r4.found);
}

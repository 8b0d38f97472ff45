#include <doctest.h>

#include "fraclab/whitney.hpp"

using namespace fraclab;

namespace {

template <int N>
bool family_has(const WhitneyFamily<N>& fam, int level, std::array<std::int64_t, N> idx) {
    for (const auto& q : fam.cubes)
        if (q.level == level && q.index == idx) return true;
    return false;
}

}  // namespace

TEST_CASE("unit square: acceptance predicate run by hand at the center") {
    auto dom = make_domain<2>("unit_square");
    const auto fam = whitney_decompose<2>(dom, 7);
    // [1/4, 1/2]^2 has dist 1/4 < diam sqrt(2)/4, so it subdivides; its
    // level-3 children (e.g. [3/8,1/2]^2) pass
    CHECK(!family_has<2>(fam, 2, {1, 1}));
    CHECK(family_has<2>(fam, 3, {3, 3}));
    CHECK(family_has<2>(fam, 3, {2, 2}));

    for (std::size_t i = 0; i < fam.cubes.size(); ++i) {
        const double diam = fam.cubes[i].diam();
        CHECK(fam.dist[i] >= diam - 1e-12);
        CHECK(fam.dist[i] <= 4.0 * diam + 1e-12);
    }
    CHECK(uncovered_measure(fam) <= std::ldexp(1.0, -12));
}

TEST_CASE("neighboring accepted cubes differ by at most one level") {
    for (const char* nm : {"unit_square", "ball", "l_shape"}) {
        auto dom = make_domain<2>(nm);
        const auto fam = whitney_decompose<2>(dom, 6);
        const auto adj = cube_adjacency(fam);
        for (std::size_t i = 0; i < adj.size(); ++i)
            for (std::size_t j : adj[i]) CHECK(std::abs(fam.cubes[i].level - fam.cubes[j].level) <= 1);
    }
}

TEST_CASE("kappa refinement: legality and split depth") {
    auto dom = make_domain<2>("unit_square");
    const auto fam = whitney_decompose<2>(dom, 6);

    // kappa = 1: cubes already satisfying (9/8)-clearance stay unsplit
    const auto f1 = refine_kappa(fam, 1.0);
    CHECK(f1.split_depth_max <= kappa_split_depth_bound(1.0));
    for (std::size_t i = 0; i < fam.cubes.size(); ++i)
        if (fam.dist[i] >= (9.0 / 8.0) * fam.cubes[i].diam())
            CHECK(kappa_split_depth(fam.cubes[i], fam.dist[i], 1.0) == 0);

    const auto f2 = refine_kappa(fam, 2.0);
    CHECK(f2.kappa == 2.0);
    CHECK(f2.split_depth_max <= kappa_split_depth_bound(2.0));
    for (const auto& q : f2.cubes) CHECK(kappa_star_ok(*dom, q, 2.0));

    // refinement preserves total measure (children partition the parent)
    auto vol = [](const auto& f) {
        KahanSum s;
        for (const auto& q : f.cubes) s.add(q.volume());
        return s.value();
    };
    CHECK(vol(f2) == doctest::Approx(vol(fam)).epsilon(1e-12));

    CHECK_THROWS_AS((void)refine_kappa(fam, 0.5), std::invalid_argument);
}

TEST_CASE("greedy disjoint families") {
    // single candidate
    {
        std::vector<Box<2>> boxes{{{0, 0}, {1, 1}}};
        const auto fams = greedy_disjoint_partition<2>(boxes, {1.0});
        REQUIRE(fams.size() == 1);
        CHECK(fams[0] == std::vector<std::size_t>{0});
    }
    // two overlapping candidates: the higher-scored wins the first family
    {
        std::vector<Box<2>> boxes{{{0, 0}, {1, 1}}, {{0.5, 0.5}, {1.5, 1.5}}};
        const auto fams = greedy_disjoint_partition<2>(boxes, {1.0, 2.0});
        REQUIRE(fams.size() == 2);
        CHECK(fams[0] == std::vector<std::size_t>{1});
        CHECK(fams[1] == std::vector<std::size_t>{0});
    }
    // 100 random candidates: families pairwise disjoint and maximal
    {
        SplitMix64 rng(7);
        std::vector<Box<2>> boxes;
        std::vector<double> scores;
        for (int i = 0; i < 100; ++i) {
            const double x = rng.next_double() * 0.8, y = rng.next_double() * 0.8;
            const double s = 0.05 + 0.15 * rng.next_double();
            boxes.push_back({{x, y}, {x + s, y + s}});
            scores.push_back(rng.next_double());
        }
        const auto fams = greedy_disjoint_partition<2>(boxes, scores);
        std::size_t total = 0;
        for (std::size_t f = 0; f < fams.size(); ++f) {
            total += fams[f].size();
            for (std::size_t a = 0; a < fams[f].size(); ++a)
                for (std::size_t b = a + 1; b < fams[f].size(); ++b)
                    CHECK(!boxes[fams[f][a]].overlaps_open(boxes[fams[f][b]]));
            // maximality: every candidate of a LATER family overlaps something here
            for (std::size_t g = f + 1; g < fams.size(); ++g)
                for (std::size_t id : fams[g]) {
                    bool overlaps = false;
                    for (std::size_t chosen : fams[f])
                        if (boxes[id].overlaps_open(boxes[chosen])) overlaps = true;
                    CHECK(overlaps);
                }
        }
        CHECK(total == boxes.size());
    }
}

TEST_CASE("star overlap stays below the n = 2 bound") {
    for (const char* nm : {"unit_square", "ball", "l_shape", "plane_minus_segment"}) {
        auto dom = make_domain<2>(nm);
        const auto fam = whitney_decompose<2>(dom, 6);
        CHECK(star_overlap_max(fam) <= 12);
    }
}

TEST_CASE("whitney in three dimensions") {
    auto dom = make_domain<3>("unit_square");
    const auto fam = whitney_decompose<3>(dom, 4);
    CHECK(fam.cubes.size() > 0);
    for (std::size_t i = 0; i < fam.cubes.size(); ++i) {
        const double diam = fam.cubes[i].diam();
        CHECK(fam.dist[i] >= diam - 1e-12);
        CHECK(fam.dist[i] <= 4.0 * diam + 1e-12);
    }
    CHECK(uncovered_measure(fam) <= std::ldexp(1.0, -10));
    CHECK_THROWS_AS((void)whitney_decompose<3>(dom, -1), std::invalid_argument);
}

#include <gtest/gtest.h>

#include <vector>

#include "skr/frontier.hpp"
#include "skr/rng.hpp"

using namespace skr;

namespace {

Frontier of(std::vector<RateConstraintSet> s) { return pareto_frontier(s); }

bool has_vertex(const Frontier& f, double r1, double r2) {
    for (const auto& v : f.vertices)
        if (std::abs(v.r1 - r1) < 1e-12 && std::abs(v.r2 - r2) < 1e-12) return true;
    return false;
}

// Brute force: the largest r2 over the union at a given r1.
double brute_r2(const std::vector<RateConstraintSet>& sets, double r1) {
    double best = -1.0;
    for (const auto& s : sets)
        if (r1 <= s.r1_max && r1 <= s.sum_max) best = std::max(best, std::min(s.r2_max, s.sum_max - r1));
    return best;
}

// Linear interpolation along the frontier polyline; steps are vertical drops
// between consecutive vertices unless the edge is sloped.
double frontier_r2(const Frontier& f, double r1) {
    double best = -1.0;
    for (std::size_t i = 0; i < f.vertices.size(); ++i) {
        const auto& v = f.vertices[i];
        if (r1 <= v.r1 + 1e-12) best = std::max(best, v.r2);
    }
    for (const auto& [a, b] : f.segments)
        if (r1 >= a.r1 - 1e-12 && r1 <= b.r1 + 1e-12)
            best = std::max(best, a.r2 + (b.r2 - a.r2) * (r1 - a.r1) / (b.r1 - a.r1));
    return best;
}

}  // namespace

TEST(Frontier, Examples) {
    const auto two = of({{1, 0, 1}, {0, 1, 1}});
    EXPECT_TRUE(has_vertex(two, 1, 0));
    EXPECT_TRUE(has_vertex(two, 0, 1));

    const auto seg = of({{1, 1, 1}});
    EXPECT_TRUE(has_vertex(seg, 0, 1));
    EXPECT_TRUE(has_vertex(seg, 1, 0));
    ASSERT_EQ(seg.segments.size(), 1U);

    const auto rect = of({{1, 1, kInf}});
    ASSERT_EQ(rect.vertices.size(), 1U);
    EXPECT_TRUE(has_vertex(rect, 1, 1));
}

TEST(Frontier, EmptyAndZero) {
    const auto e = of({});
    ASSERT_EQ(e.vertices.size(), 1U);
    EXPECT_TRUE(has_vertex(e, 0, 0));
    EXPECT_TRUE(has_vertex(of({{0, 0, 0}, {0, 0, kInf}}), 0, 0));
}

TEST(Frontier, ParetoSorted) {
    Rng rng(3, Stream::fuzz);
    for (int draw = 0; draw < 200; ++draw) {
        std::vector<RateConstraintSet> sets;
        const auto k = 1 + rng.below(6);
        for (std::uint64_t i = 0; i < k; ++i) {
            const double a = 0.25 * static_cast<double>(rng.below(5)), b = 0.25 * static_cast<double>(rng.below(5));
            const double c = rng.below(3) == 0 ? kInf : 0.25 * static_cast<double>(rng.below(9));
            sets.push_back({a, b, c});
        }
        const auto f = pareto_frontier(sets);
        for (std::size_t i = 1; i < f.vertices.size(); ++i) {
            EXPECT_LT(f.vertices[i - 1].r1, f.vertices[i].r1);
            EXPECT_GE(f.vertices[i - 1].r2, f.vertices[i].r2);
        }
        // The polyline equals the union's upper envelope at sampled r1.
        for (int t = 0; t <= 16; ++t) {
            const double r1 = 0.125 * t;
            const double want = brute_r2(sets, r1);
            if (want < 0) continue;
            EXPECT_NEAR(frontier_r2(f, r1), want, 1e-9) << "draw " << draw << " r1=" << r1;
            EXPECT_NEAR(envelope_r2(sets, r1), want, 1e-12);
        }
    }
}

TEST(Hull, DominatesFrontier) {
    const auto f = of({{1, 0, kInf}, {0.2, 0.2, kInf}, {0, 1, kInf}});
    const auto h = concave_hull(f);
    EXPECT_TRUE(has_vertex(h, 0, 1));
    EXPECT_TRUE(has_vertex(h, 1, 0));
    EXPECT_FALSE(has_vertex(h, 0.2, 0.2));
}

TEST(Distance, Linf) {
    const RateConstraintSet s{1, 1, 1.5};
    EXPECT_DOUBLE_EQ(linf_distance(s, {0.5, 0.5}), 0.0);
    EXPECT_DOUBLE_EQ(linf_distance(s, {1.25, 0.0}), 0.25);
    EXPECT_DOUBLE_EQ(linf_distance(s, {1.0, 1.0}), 0.25);
    EXPECT_DOUBLE_EQ(linf_distance(s, {2.0, 0.0}), 1.0);
}

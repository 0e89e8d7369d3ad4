#include <gtest/gtest.h>

#include <algorithm>

#include "oracle.hpp"
#include "skr/error.hpp"
#include "skr/presets.hpp"
#include "skr/random.hpp"
#include "skr/region.hpp"

using namespace skr;
using oracle::I;

namespace {

double pos(double v) { return std::max(0.0, v); }

// The four bounds restated over the dictionary reference.
RateConstraintSet oracle_point(const AuxSystem& aux) {
    const auto d = oracle::from_pmf(aux.full);
    switch (aux.family) {
        case Family::forward_inner: {
            const double ls = I(d, {"S"}, {"X2"}, {"T", "U"}), lt = I(d, {"T"}, {"X1"}, {"S", "V"});
            return {pos(I(d, {"S"}, {"X3"}, {"T", "U"}) - ls), pos(I(d, {"T"}, {"X3"}, {"S", "V"}) - lt),
                    pos(I(d, {"S", "T"}, {"X3"}, {"U", "V"}) - ls - lt - I(d, {"S"}, {"T"}, {"U", "V"}))};
        }
        case Family::forward_outer:
            return {pos(I(d, {"S"}, {"T", "X3"}, {"U"}) - I(d, {"S"}, {"X2"}, {"U"})),
                    pos(I(d, {"T"}, {"S", "X3"}, {"V"}) - I(d, {"T"}, {"X1"}, {"V"})), kInf};
        case Family::backward_inner:
            return {pos(I(d, {"S"}, {"X1"}, {"U"}) - I(d, {"S"}, {"X2", "T"}, {"U"})),
                    pos(I(d, {"T"}, {"X2"}, {"U"}) - I(d, {"T"}, {"X1", "S"}, {"U"})), kInf};
        case Family::backward_outer:
            return {pos(std::min(I(d, {"S"}, {"X1"}, {"U"}) - I(d, {"S"}, {"X2"}, {"U"}),
                                 I(d, {"S"}, {"X1"}, {"T", "U"}) - I(d, {"S"}, {"X2"}, {"T", "U"}))),
                    pos(std::min(I(d, {"T"}, {"X2"}, {"U"}) - I(d, {"T"}, {"X1"}, {"U"}),
                                 I(d, {"T"}, {"X2"}, {"S", "U"}) - I(d, {"T"}, {"X1"}, {"S", "U"}))),
                    kInf};
    }
    return {};
}

void expect_set(const RateConstraintSet& got, const RateConstraintSet& want, double tol) {
    EXPECT_NEAR(got.r1_max, want.r1_max, tol);
    EXPECT_NEAR(got.r2_max, want.r2_max, tol);
    if (std::isinf(want.sum_max)) EXPECT_TRUE(std::isinf(got.sum_max));
    else EXPECT_NEAR(got.sum_max, want.sum_max, tol);
}

Channel random_channel(const char* from, std::size_t rows, const char* to, std::size_t cols, Rng& rng) {
    Channel ch{{from}, {{to, cols}}, {}};
    for (std::size_t r = 0; r < rows; ++r)
        for (double w : random_simplex(cols, rng)) ch.matrix.push_back(w);
    return ch;
}

JointPmf random_base(Rng& rng) {
    return random_pmf({{"X1", 2 + rng.below(2)}, {"X2", 2 + rng.below(2)}, {"X3", 2 + rng.below(2)}}, rng);
}

bool frontier_has(const Frontier& f, double r1, double r2, double tol) {
    for (const auto& v : f.vertices)
        if (std::abs(v.r1 - r1) < tol && std::abs(v.r2 - r2) < tol) return true;
    return false;
}

double max_r1(const RateRegion& r) {
    double m = 0.0;
    for (const auto& v : r.frontier.vertices) m = std::max(m, v.r1);
    return m;
}

double max_r2(const RateRegion& r) {
    double m = 0.0;
    for (const auto& v : r.frontier.vertices) m = std::max(m, v.r2);
    return m;
}

}  // namespace

TEST(Points, ForwardExamples) {
    const auto x = xor_source();
    const auto inner = forward_inner_point(make_aux_system(x, forward_channels(x, true, true, false, false), Family::forward_inner));
    EXPECT_NEAR(inner.r1_max, 1.0, 1e-12);
    EXPECT_NEAR(inner.r2_max, 1.0, 1e-12);
    EXPECT_NEAR(inner.sum_max, 1.0, 1e-12);

    const auto zero = forward_inner_point(make_aux_system(x, forward_channels(x, false, false, false, false), Family::forward_inner));
    EXPECT_EQ(zero, (RateConstraintSet{0, 0, 0}));

    const auto ind = independent_source();
    const auto z2 = forward_inner_point(make_aux_system(ind, forward_channels(ind, true, true, true, true), Family::forward_inner));
    EXPECT_NEAR(z2.r1_max, 0.0, 1e-12);
    EXPECT_NEAR(z2.sum_max, 0.0, 1e-12);

    const auto outer = forward_outer_point(make_aux_system(x, forward_channels(x, true, true, false, false), Family::forward_outer));
    EXPECT_NEAR(outer.r1_max, 1.0, 1e-12);
    EXPECT_NEAR(outer.r2_max, 1.0, 1e-12);
    EXPECT_TRUE(std::isinf(outer.sum_max));

    const auto c = forward_outer_point(make_aux_system(x, forward_channels(x, false, false, false, false), Family::forward_outer));
    EXPECT_EQ(c.r1_max, 0.0);
    EXPECT_EQ(c.r2_max, 0.0);
    EXPECT_TRUE(std::isinf(c.sum_max));

    const auto e3 = e3_source(0.25, 0.25);
    const auto d = oracle::from_pmf(e3);
    const auto o3 = forward_outer_point(make_aux_system(e3, forward_channels(e3, true, true, false, false), Family::forward_outer));
    EXPECT_NEAR(o3.r1_max, I(d, {"X1"}, {"X2", "X3"}) - I(d, {"X1"}, {"X2"}), 1e-12);
}

TEST(Points, ExplicitOuter) {
    const JointPmf same({{"X1", 2}, {"X2", 2}, {"X3", 2}}, {0.5, 0, 0, 0, 0, 0, 0, 0.5});
    const auto s = explicit_outer(same);
    EXPECT_EQ(s.r1_max, 0.0);
    EXPECT_EQ(s.r2_max, 0.0);
    EXPECT_TRUE(std::isinf(s.sum_max));
    const auto x = explicit_outer(xor_source());
    EXPECT_NEAR(x.r1_max, 1.0, 1e-12);
    EXPECT_NEAR(x.r2_max, 1.0, 1e-12);
    const auto e3 = explicit_outer(e3_source(0.25, 0.25));
    const auto d = oracle::from_pmf(e3_source(0.25, 0.25));
    EXPECT_NEAR(e3.r1_max, I(d, {"X1"}, {"X3"}, {"X2"}), 1e-12);
    EXPECT_NEAR(e3.r1_max, 0.143156, 1e-6);
    EXPECT_NEAR(e3.r2_max, 0.143156, 1e-6);
}

TEST(Points, BackwardExamples) {
    const auto e6 = e6_source();
    const auto d6 = oracle::from_pmf(e6);
    const auto b = backward_inner_point(make_aux_system(e6, backward_channels(e6, false, true, UCopy::none), Family::backward_inner));
    EXPECT_NEAR(b.r2_max, I(d6, {"X3"}, {"X2"}) - I(d6, {"X3"}, {"X1"}), 1e-12);
    EXPECT_NEAR(b.r2_max, 0.143156, 1e-6);

    const auto x = xor_source();
    const auto bx = backward_inner_point(make_aux_system(x, backward_channels(x, true, false, UCopy::none), Family::backward_inner));
    EXPECT_NEAR(bx.r1_max, 0.0, 1e-12);

    const auto c = backward_inner_point(make_aux_system(x, backward_channels(x, false, false, UCopy::none), Family::backward_inner));
    EXPECT_EQ(c.r1_max, 0.0);
    EXPECT_EQ(c.r2_max, 0.0);

    const auto o6 = backward_outer_point(make_aux_system(e6, backward_channels(e6, true, true, UCopy::none), Family::backward_outer));
    EXPECT_EQ(o6.r1_max, 0.0);
    const auto e3 = e3_source(0.25, 0.25);
    const auto o3 = backward_outer_point(make_aux_system(e3, backward_channels(e3, true, true, UCopy::none), Family::backward_outer));
    EXPECT_EQ(o3.r1_max, 0.0);
    const auto cs = backward_outer_point(make_aux_system(e6, backward_channels(e6, false, true, UCopy::none), Family::backward_outer));
    EXPECT_EQ(cs.r1_max, 0.0);
}

TEST(Points, FamilyMismatchAndFactorization) {
    const auto x = xor_source();
    const auto sys = make_aux_system(x, forward_channels(x, true, true, false, false), Family::forward_inner);
    EXPECT_THROW(backward_inner_point(sys), InvalidArgument);
    // S fed from X2 breaks p(s|x1).
    auto ch = forward_channels(x, true, true, false, false);
    ch[0] = identity_channel("X2", 2, "S");
    EXPECT_THROW(make_aux_system(x, ch, Family::forward_inner), FactorizationError);
    // U a copy of X3 given constant S, T breaks U - (S,T) - X3 on a backward system.
    const auto b = backward_channels(x, false, false, UCopy::none);
    std::vector<Channel> bad{b[0], identity_channel("X3", 2, "U")};
    EXPECT_THROW(make_aux_system(x, bad, Family::backward_inner), FactorizationError);
    EXPECT_THROW(make_aux_system(x, bad, Family::backward_outer), FactorizationError);
}

TEST(Points, BackwardOuterChainViolated) {
    // S = X3, T constant, U = S: the factorization holds but U - T - X3 fails.
    const auto x = xor_source();
    const auto ch = backward_channels(x, true, false, UCopy::s);
    EXPECT_THROW(make_aux_system(x, ch, Family::backward_outer), ChainViolated);
}

// Random auxiliaries on random bases: library evaluators equal the
// definition-level restatement.
TEST(Points, OracleEquivalence) {
    Rng rng(21, Stream::fuzz);
    for (int draw = 0; draw < 30; ++draw) {
        const auto base = random_base(rng);
        const std::size_t c1 = base.cardinality("X1"), c2 = base.cardinality("X2"), c3 = base.cardinality("X3");
        std::vector<Channel> fwd{random_channel("X1", c1, "S", 2, rng), random_channel("X2", c2, "T", 2, rng),
                                 random_channel("S", 2, "U", 2, rng), random_channel("T", 2, "V", 2, rng)};
        for (Family f : {Family::forward_inner, Family::forward_outer}) {
            const auto sys = make_aux_system(base, fwd, f);
            expect_set(evaluate_point(sys), oracle_point(sys), 1e-10);
        }
        Channel st{{"X3"}, {{"S", 2}, {"T", 2}}, {}};
        for (std::size_t r = 0; r < c3; ++r)
            for (double w : random_simplex(4, rng)) st.matrix.push_back(w);
        Channel u{{"S", "T"}, {{"U", 2}}, {}};
        for (std::size_t r = 0; r < 4; ++r)
            for (double w : random_simplex(2, rng)) u.matrix.push_back(w);
        const auto sys = make_aux_system(base, {st, u}, Family::backward_inner);
        expect_set(evaluate_point(sys), oracle_point(sys), 1e-10);
        // U constant keeps both backward-outer chains.
        const auto sys2 = make_aux_system(base, {st, Channel{{"S", "T"}, {{"U", 1}}, {1, 1, 1, 1}}}, Family::backward_outer);
        expect_set(evaluate_point(sys2), oracle_point(sys2), 1e-10);
    }
}

TEST(Enumerate, XorForwardInner) {
    GridSpec g;
    g.card_s = g.card_t = 2;
    g.card_u = g.card_v = 1;
    const auto r = enumerate_region(xor_source(), Family::forward_inner, g);
    EXPECT_TRUE(frontier_has(r.frontier, 1, 0, 1e-12));
    EXPECT_TRUE(frontier_has(r.frontier, 0, 1, 1e-12));
    for (const auto& v : r.frontier.vertices) EXPECT_LE(v.r1 + v.r2, 1 + 1e-9);
    for (const auto& p : r.points) EXPECT_LE(std::min(p.rates.sum_max, p.rates.r1_max + p.rates.r2_max), 1 + 1e-9);
}

TEST(Enumerate, IndependentIsZero) {
    for (Family f : {Family::forward_inner, Family::forward_outer, Family::backward_inner, Family::backward_outer}) {
        GridSpec g;
        g.card_u = g.card_v = 1;
        const auto r = enumerate_region(independent_source(), f, g);
        ASSERT_EQ(r.frontier.vertices.size(), 1U) << to_string(f);
        EXPECT_NEAR(r.frontier.vertices[0].r1, 0.0, 1e-12);
        EXPECT_NEAR(r.frontier.vertices[0].r2, 0.0, 1e-12);
    }
}

TEST(Enumerate, E6BackwardInner) {
    GridSpec g;
    g.card_s = 1;
    g.card_t = 2;
    g.card_u = 1;
    const auto r = enumerate_region(e6_source(), Family::backward_inner, g);
    const auto d = oracle::from_pmf(e6_source());
    EXPECT_NEAR(max_r2(r), I(d, {"X2"}, {"X3"}, {"X1"}), 1e-12);
}

TEST(Enumerate, BudgetExceeded) {
    GridSpec g;
    g.q = 4;
    g.card_s = g.card_t = g.card_u = g.card_v = 4;
    EXPECT_THROW(enumerate_region(xor_source(), Family::forward_inner, g), CapacityError);
}

// Refining q -> 2q keeps every lattice point, so no frontier point is lost.
TEST(Enumerate, GridMonotonicity) {
    Rng rng(31, Stream::fuzz);
    for (int draw = 0; draw < 3; ++draw) {
        const auto base = random_pmf({{"X1", 2}, {"X2", 2}, {"X3", 2}}, rng);
        for (Family f : {Family::forward_inner, Family::backward_inner}) {
            GridSpec g;
            g.card_s = g.card_t = 2;
            g.card_u = g.card_v = 1;
            g.q = 1;
            const auto coarse = enumerate_region(base, f, g, {4, {}});
            g.q = 2;
            const auto fine = enumerate_region(base, f, g, {4, {}});
            const auto fs = fine.sets();
            for (const auto& v : coarse.frontier.vertices) EXPECT_LE(linf_distance(fs, v), 1e-12);
        }
    }
}

TEST(Enumerate, ThreadInvariance) {
    const auto base = e3_source(0.1, 0.4);
    GridSpec g;
    g.q = 2;
    g.card_u = g.card_v = 1;
    for (Family f : {Family::forward_inner, Family::backward_outer}) {
        const auto a = enumerate_region(base, f, g, {1, {}});
        for (unsigned t : {2U, 8U}) {
            const auto b = enumerate_region(base, f, g, {t, {}});
            ASSERT_EQ(a.points.size(), b.points.size());
            for (std::size_t i = 0; i < a.points.size(); ++i) {
                EXPECT_EQ(a.points[i].rates, b.points[i].rates);
                EXPECT_EQ(a.points[i].grid_index, b.points[i].grid_index);
            }
            EXPECT_EQ(a.frontier.vertices, b.frontier.vertices);
            EXPECT_EQ(a.rejected, b.rejected);
        }
    }
}

// Inner grid points never leave the explicit outer rectangle.
TEST(Enumerate, Containment) {
    Rng rng(41, Stream::fuzz);
    for (int draw = 0; draw < 10; ++draw) {
        const auto base = random_pmf({{"X1", 2}, {"X2", 2}, {"X3", 2}}, rng);
        const auto outer = explicit_outer(base);
        GridSpec g;
        g.card_u = g.card_v = 1;
        for (Family f : {Family::forward_inner, Family::backward_inner}) {
            for (const auto& p : enumerate_region(base, f, g).points) {
                EXPECT_LE(p.rates.r1_max, outer.r1_max + 1e-9);
                EXPECT_LE(p.rates.r2_max, outer.r2_max + 1e-9);
            }
        }
    }
}

TEST(Corollary, Examples) {
    GridSpec g;
    g.card_s = 2;
    g.card_u = 1;
    const auto e3 = e3_source(0.25, 0.25);
    const auto d = oracle::from_pmf(e3);
    const auto c = corollary_capacity(e3, Direction::forward, g);
    EXPECT_NEAR(c.value, I(d, {"X1"}, {"X3"}) - I(d, {"X1"}, {"X2"}), 1e-12);
    EXPECT_NEAR(corollary_capacity(independent_source(), Direction::forward, g).value, 0.0, 1e-12);
    EXPECT_NEAR(corollary_capacity(identity_source(), Direction::forward, g).value, 1.0, 1e-12);
}

// Same grid with T, V constant: the corollary and the R1-axis maximum of the
// enumerated region agree exactly, argmax included.
TEST(Corollary, MatchesEnumeration) {
    Rng rng(51, Stream::fuzz);
    for (int draw = 0; draw < 5; ++draw) {
        const auto base = random_pmf({{"X1", 2}, {"X2", 2}, {"X3", 2}}, rng);
        GridSpec g;
        g.q = 2;
        g.card_u = 2;
        const auto c = corollary_capacity(base, Direction::forward, g);
        GridSpec h = g;
        h.card_t = h.card_v = 1;
        const auto r = enumerate_region(base, Family::forward_inner, h);
        double best = 0.0;
        std::int64_t arg = -1;
        for (const auto& p : r.points)
            if (arg < 0 || p.rates.r1_max > best) {
                best = p.rates.r1_max;
                arg = p.grid_index;
            }
        EXPECT_LT(std::abs(c.value - best), 1e-12);
        EXPECT_LT(std::abs(c.value - max_r1(r)), 1e-12);
        EXPECT_EQ(c.argmax, arg);
    }
}

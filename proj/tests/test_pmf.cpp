#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "skr/error.hpp"
#include "skr/pmf.hpp"
#include "skr/presets.hpp"
#include "skr/random.hpp"
#include "skr/rng.hpp"

using namespace skr;

namespace {

JointPmf random_joint(Rng& rng, std::size_t vars) {
    std::vector<VariableId> v;
    for (std::size_t i = 0; i < vars; ++i) v.push_back({"A" + std::to_string(i), 1 + rng.below(4)});
    return random_pmf(v, rng);
}

VariableSet join(VariableSet a, const VariableSet& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::vector<std::string> names_of(const JointPmf& p, AxisMask m) {
    std::vector<std::string> out;
    for (auto a : p.axes_of(m)) out.push_back(p.variables()[a].name);
    return out;
}

// E3 by hand: X3 uniform, X1 and X2 independent noisy copies with flip 1/4.
oracle::Dict e3_dict() {
    return oracle::make({"X1", "X2", "X3"}, {2, 2, 2}, [](const oracle::Outcome& o) {
        const double f1 = o[0] == o[2] ? 0.75 : 0.25, f2 = o[1] == o[2] ? 0.75 : 0.25;
        return 0.5 * f1 * f2;
    });
}

}  // namespace

TEST(Entropy, Examples) {
    EXPECT_DOUBLE_EQ(entropy(JointPmf::uniform({{"X", 2}}), {"X"}), 1.0);
    EXPECT_DOUBLE_EQ(entropy(JointPmf({{"X", 3}}, {0.0, 1.0, 0.0}), {"X"}), 0.0);
    EXPECT_NEAR(entropy(JointPmf({{"X", 2}}, {0.75, 0.25}), {"X"}), 0.811278, 1e-6);
}

TEST(MutualInformation, Examples) {
    EXPECT_DOUBLE_EQ(mutual_information(JointPmf::uniform({{"X1", 2}, {"X3", 2}}), {"X1"}, {"X3"}), 0.0);
    const JointPmf copy({{"X1", 2}, {"X3", 2}}, {0.5, 0.0, 0.0, 0.5});
    EXPECT_NEAR(mutual_information(copy, {"X1"}, {"X3"}), 1.0, 1e-15);
    const auto d = e3_dict();
    const double want = oracle::H(d, {"X1"}, {"X2"}) - oracle::H(d, {"X1"}, {"X3"});
    EXPECT_NEAR(want, 0.143156, 1e-6);
    EXPECT_NEAR(cond_mutual_information(e3_source(0.25, 0.25), {"X1"}, {"X3"}, {"X2"}), want, 1e-12);
}

TEST(MutualInformation, OverlapRejected) {
    EXPECT_THROW(cond_mutual_information(e3_source(0.25, 0.25), {"X1"}, {"X1"}), InvalidArgument);
}

TEST(Markov, Examples) {
    const auto ind = independent_source();
    const char* v[3] = {"X1", "X2", "X3"};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                if (a != b && b != c && a != c) {
                    EXPECT_TRUE(is_markov_chain(ind, {v[a]}, {v[b]}, {v[c]}, 1e-9));
                }
    EXPECT_TRUE(is_markov_chain(e6_source(), {"X1"}, {"X2"}, {"X3"}, 1e-9));
    EXPECT_FALSE(is_markov_chain(xor_source(), {"X1"}, {"X2"}, {"X3"}, 1e-9));
    EXPECT_NEAR(cond_mutual_information(xor_source(), {"X1"}, {"X3"}, {"X2"}), 1.0, 1e-12);
}

TEST(Marginalize, Examples) {
    const auto u = marginalize(JointPmf::uniform({{"X1", 2}, {"X2", 2}}), {"X1"});
    ASSERT_EQ(u.size(), 2U);
    EXPECT_DOUBLE_EQ(u.at({0}), 0.5);
    const auto e3 = e3_source(0.25, 0.25);
    const auto same = marginalize(e3, {"X1", "X2", "X3"});
    EXPECT_TRUE(std::equal(same.table().begin(), same.table().end(), e3.table().begin()));
    const auto pair = marginalize(e3, {"X1", "X2"});
    const auto want = e3_dict().project({"X1", "X2"});
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            EXPECT_NEAR(pair.at({std::size_t(a), std::size_t(b)}), want.p.at({a, b}), 1e-15);
}

TEST(Marginalize, UnknownVariable) {
    EXPECT_THROW(marginalize(e3_source(0.25, 0.25), {"Q"}), UnknownVariable);
}

TEST(Extend, Examples) {
    const auto bit = JointPmf::uniform({{"X", 2}});
    const auto pair = extend(bit, identity_channel("X", 2, "S"));
    EXPECT_DOUBLE_EQ(pair.at({0, 0}), 0.5);
    EXPECT_DOUBLE_EQ(pair.at({0, 1}), 0.0);
    EXPECT_DOUBLE_EQ(pair.at({1, 1}), 0.5);

    const auto e3 = e3_source(0.25, 0.25);
    const auto unit = extend(e3, constant_channel("X1", 2, "S"));
    EXPECT_EQ(unit.size(), e3.size());
    EXPECT_TRUE(std::equal(unit.table().begin(), unit.table().end(), e3.table().begin()));

    const Channel bsc{{"X1"}, {{"S", 2}}, {0.9, 0.1, 0.1, 0.9}};
    const auto ext = extend(e3, bsc);
    const auto s = marginalize(ext, {"S"});
    // Direct matrix product: p(s) = sum_x1 p(x1) W(s|x1), with p(x1) = 1/2.
    EXPECT_NEAR(s.at({0}), 0.5 * 0.9 + 0.5 * 0.1, 1e-15);
    EXPECT_NEAR(s.at({1}), 0.5, 1e-15);
}

TEST(Extend, Errors) {
    const auto e3 = e3_source(0.25, 0.25);
    EXPECT_THROW(extend(e3, Channel{{"X1"}, {{"S", 2}}, {0.5, 0.5, 0.7, 0.7}}), InvalidArgument);
    EXPECT_THROW(extend(e3, Channel{{"X1"}, {{"S", 2}}, {1.0, 0.0}}), DimensionMismatch);
    EXPECT_THROW(extend(e3, Channel{{"Q"}, {{"S", 2}}, {1.0, 0.0, 0.0, 1.0}}), UnknownVariable);
}

TEST(Iid, Examples) {
    const auto e3 = e3_source(0.25, 0.25);
    const auto one = iid_extension(e3, 1);
    EXPECT_TRUE(std::equal(one.table().begin(), one.table().end(), e3.table().begin()));
    const auto bits = iid_extension(JointPmf::uniform({{"X", 2}}), 3);
    ASSERT_EQ(bits.size(), 8U);
    for (double p : bits.table()) EXPECT_NEAR(p, 0.125, 1e-15);
    EXPECT_THROW(iid_extension(e3, 0), InvalidArgument);
}

// Oracle equivalence on random joints: every entropy and CMI over random
// variable subsets matches the dictionary reference.
TEST(Oracle, RandomJointsMatch) {
    Rng rng(7, Stream::fuzz);
    for (int draw = 0; draw < 100; ++draw) {
        const auto p = random_joint(rng, 2 + rng.below(3));
        const auto d = oracle::from_pmf(p);
        InfoCache c(p);
        const AxisMask all = (AxisMask{1} << p.rank()) - 1;
        for (AxisMask a = 1; a <= all; ++a) EXPECT_NEAR(c.entropy(a), oracle::H(d, names_of(p, a)), 1e-10);
        for (int k = 0; k < 10; ++k) {
            const AxisMask a = 1 + rng.below(all), b = (1 + rng.below(all)) & ~a, cc = rng.below(all + 1) & ~(a | b);
            if (b == 0) continue;
            const double want = oracle::I(d, names_of(p, a), names_of(p, b), names_of(p, cc));
            EXPECT_NEAR(c.cmi(a, b, cc), want, 1e-10);
            EXPECT_GE(c.cmi(a, b, cc), 0.0);
        }
    }
}

TEST(Properties, ChainRuleAndMarginalization) {
    Rng rng(11, Stream::fuzz);
    for (int draw = 0; draw < 50; ++draw) {
        const auto p = random_joint(rng, 3);
        InfoCache c(p);
        const AxisMask a = 1, b = 2;
        EXPECT_NEAR(c.entropy(a | b), c.entropy(a) + c.conditional_entropy(b, a), 1e-10);
        // marginalize then entropy equals entropy on the subset, exactly.
        const auto m = marginalize(p, {"A0", "A2"});
        EXPECT_EQ(entropy(m, {"A0", "A2"}), entropy(p, {"A0", "A2"}));
    }
}

TEST(Properties, DataProcessingUnderExtend) {
    Rng rng(12, Stream::fuzz);
    for (int draw = 0; draw < 50; ++draw) {
        const auto p = random_joint(rng, 3);
        const std::size_t c0 = p.cardinality("A0"), cs = 1 + rng.below(3);
        Channel ch{{"A0"}, {{"S", cs}}, {}};
        for (std::size_t x = 0; x < c0; ++x)
            for (double w : random_simplex(cs, rng)) ch.matrix.push_back(w);
        const auto q = extend(p, ch);
        for (const char* y : {"A1", "A2"})
            EXPECT_LE(mutual_information(q, {"S"}, {y}), mutual_information(q, {"A0"}, {y}) + 1e-10);
    }
}

// H(S^n | X2^n, U^n) = n H(S | X2, U) on the i.i.d. extension.
TEST(Properties, IidTensorization) {
    Rng rng(13, Stream::fuzz);
    for (int draw = 0; draw < 20; ++draw) {
        const auto p = random_pmf({{"S", 2 + rng.below(2)}, {"X2", 2}, {"U", 2}}, rng);
        const double single = conditional_entropy(p, {"S"}, {"X2", "U"});
        for (std::size_t n : {2U, 3U, 4U}) {
            const auto ext = iid_extension(p, n);
            const double got = conditional_entropy(ext, iid_names({"S"}, n), join(iid_names({"X2"}, n), iid_names({"U"}, n)));
            EXPECT_NEAR(got, static_cast<double>(n) * single, 1e-9) << "n=" << n;
        }
    }
}

TEST(Budget, RefusesOversizedTables) {
    const auto e3 = e3_source(0.25, 0.25);
    EXPECT_THROW(iid_extension(e3, 40), CapacityError);
}

TEST(Validation, BadTables) {
    EXPECT_THROW(JointPmf({{"X", 2}}, {0.5}), DimensionMismatch);
    EXPECT_THROW(JointPmf({{"X", 2}}, {0.5, 0.6}), InvalidArgument);
    EXPECT_THROW(JointPmf({{"X", 2}}, {1.5, -0.5}), InvalidArgument);
    EXPECT_THROW(JointPmf({{"X", 2}, {"X", 2}}, {0.25, 0.25, 0.25, 0.25}), InvalidArgument);
}

#pragma once

// Named example sources and simulation setups.

#include <functional>
#include <string>
#include <vector>

#include "skr/error.hpp"
#include "skr/pmf.hpp"
#include "skr/region.hpp"

namespace skr {

namespace detail {

inline JointPmf triple(const std::function<double(std::size_t, std::size_t, std::size_t)>& p, std::size_t c = 2) {
    std::vector<double> t(c * c * c);
    for (std::size_t a = 0; a < c; ++a)
        for (std::size_t b = 0; b < c; ++b)
            for (std::size_t d = 0; d < c; ++d) t[(a * c + b) * c + d] = p(a, b, d);
    return JointPmf({{"X1", c}, {"X2", c}, {"X3", c}}, std::move(t));
}

inline double bsc(std::size_t a, std::size_t b, double flip) { return a == b ? 1.0 - flip : flip; }

}  // namespace detail

// X3 uniform, X1 and X2 are X3 through independent BSCs.
inline JointPmf e3_source(double flip1 = 0.25, double flip2 = 0.25) {
    return detail::triple([=](std::size_t x1, std::size_t x2, std::size_t x3) {
        return 0.5 * detail::bsc(x3, x1, flip1) * detail::bsc(x3, x2, flip2);
    });
}

// X2 uniform, X1 and X3 are X2 through independent BSC(1/4): X1 - X2 - X3.
inline JointPmf e6_source() {
    return detail::triple([](std::size_t x1, std::size_t x2, std::size_t x3) {
        return 0.5 * detail::bsc(x2, x1, 0.25) * detail::bsc(x2, x3, 0.25);
    });
}

// E6 with users 1 and 2 exchanged: X2 - X1 - X3.
inline JointPmf e6_mirrored_source() {
    return detail::triple([](std::size_t x1, std::size_t x2, std::size_t x3) {
        return 0.5 * detail::bsc(x1, x2, 0.25) * detail::bsc(x1, x3, 0.25);
    });
}

// X1, X2 independent uniform bits, X3 = X1 xor X2.
inline JointPmf xor_source() {
    return detail::triple([](std::size_t x1, std::size_t x2, std::size_t x3) { return x3 == (x1 ^ x2) ? 0.25 : 0.0; });
}

// X1 = X3 uniform, X2 an independent uniform bit.
inline JointPmf identity_source() {
    return detail::triple([](std::size_t x1, std::size_t, std::size_t x3) { return x1 == x3 ? 0.25 : 0.0; });
}

inline JointPmf independent_source() {
    return JointPmf::uniform({{"X1", 2}, {"X2", 2}, {"X3", 2}});
}

struct Preset {
    std::string name;
    JointPmf base;
    std::vector<Channel> channels;
    Direction direction;
};

// Forward channels from simple descriptors: each of S, T, U, V is a copy of
// its parent or a constant.
inline std::vector<Channel> forward_channels(const JointPmf& base, bool s_copy, bool t_copy, bool u_copy,
                                             bool v_copy) {
    const std::size_t c1 = base.cardinality("X1"), c2 = base.cardinality("X2");
    const std::size_t cs = s_copy ? c1 : 1, ct = t_copy ? c2 : 1;
    return {s_copy ? identity_channel("X1", c1, "S") : constant_channel("X1", c1, "S"),
            t_copy ? identity_channel("X2", c2, "T") : constant_channel("X2", c2, "T"),
            u_copy ? identity_channel("S", cs, "U") : constant_channel("S", cs, "U"),
            v_copy ? identity_channel("T", ct, "V") : constant_channel("T", ct, "V")};
}

// Backward channels: S and T are copies of X3 or constants, U copies S, T
// or nothing.
enum class UCopy { none, s, t };

inline std::vector<Channel> backward_channels(const JointPmf& base, bool s_copy, bool t_copy, UCopy u) {
    const std::size_t c3 = base.cardinality("X3");
    const std::size_t cs = s_copy ? c3 : 1, ct = t_copy ? c3 : 1;
    Channel st{{"X3"}, {{"S", cs}, {"T", ct}}, std::vector<double>(c3 * cs * ct, 0.0)};
    for (std::size_t x = 0; x < c3; ++x)
        st.matrix[x * cs * ct + (s_copy ? x : 0) * ct + (t_copy ? x : 0)] = 1.0;
    const std::size_t cu = u == UCopy::s ? cs : u == UCopy::t ? ct : 1;
    Channel uc{{"S", "T"}, {{"U", cu}}, std::vector<double>(cs * ct * cu, 0.0)};
    for (std::size_t sv = 0; sv < cs; ++sv)
        for (std::size_t tv = 0; tv < ct; ++tv)
            uc.matrix[(sv * ct + tv) * cu + (u == UCopy::s ? sv : u == UCopy::t ? tv : 0)] = 1.0;
    return {st, uc};
}

inline std::vector<std::string> preset_names() { return {"e6", "e6-plain", "identity", "e3", "xor"}; }

inline Preset make_preset(const std::string& name) {
    if (name == "e6") {
        // Key K carries the positive rate: S = X1, user 2 reveals T = V = X2.
        auto base = e6_mirrored_source();
        auto ch = forward_channels(base, true, true, false, true);
        return {name, std::move(base), std::move(ch), Direction::forward};
    }
    if (name == "e6-plain") {
        auto base = e6_source();
        auto ch = forward_channels(base, true, true, true, false);
        return {name, std::move(base), std::move(ch), Direction::forward};
    }
    if (name == "identity") {
        auto base = identity_source();
        auto ch = forward_channels(base, true, false, false, false);
        return {name, std::move(base), std::move(ch), Direction::forward};
    }
    if (name == "e3") {
        auto base = e3_source();
        auto ch = forward_channels(base, true, true, false, false);
        return {name, std::move(base), std::move(ch), Direction::forward};
    }
    if (name == "xor") {
        auto base = xor_source();
        auto ch = forward_channels(base, true, true, false, false);
        return {name, std::move(base), std::move(ch), Direction::forward};
    }
    throw InvalidArgument("unknown preset '" + name + "'");
}

}  // namespace skr

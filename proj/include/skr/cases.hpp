#pragma once

// Special source structures where inner and outer bounds meet, coincidence
// checks between regions, and the single-letterization inequality check.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "skr/error.hpp"
#include "skr/frontier.hpp"
#include "skr/pmf.hpp"
#include "skr/region.hpp"

namespace skr {

inline constexpr double kChainTol = 1e-9;

struct CaseDiagnosis {
    // Residual I(A;C|B) of each chain A - B - C.
    double x1_x2_x3 = 0.0;  // I(X1;X3|X2)
    double x2_x1_x3 = 0.0;  // I(X2;X3|X1)
    double x1_x3_x2 = 0.0;  // I(X1;X2|X3)
    bool chain_x1_x2_x3 = false, chain_x2_x1_x3 = false, chain_x1_x3_x2 = false;
};

inline CaseDiagnosis diagnose(const JointPmf& base, double tol = kChainTol) {
    detail::check_base(base);
    InfoCache c(base);
    CaseDiagnosis d;
    d.x1_x2_x3 = c.cmi({"X1"}, {"X3"}, {"X2"});
    d.x2_x1_x3 = c.cmi({"X2"}, {"X3"}, {"X1"});
    d.x1_x3_x2 = c.cmi({"X1"}, {"X2"}, {"X3"});
    d.chain_x1_x2_x3 = d.x1_x2_x3 <= tol;
    d.chain_x2_x1_x3 = d.x2_x1_x3 <= tol;
    d.chain_x1_x3_x2 = d.x1_x3_x2 <= tol;
    return d;
}

// X1 - X2 - X3: user 2 holds everything user 1 knows about X3, so only L has
// positive rate, R2 <= I(X2;X3|X1). Same region in both directions.
inline RateRegion case1_region(const JointPmf& base, double tol = kChainTol) {
    const auto d = diagnose(base, tol);
    if (!d.chain_x1_x2_x3) throw ChainViolated("X1-X2-X3", d.x1_x2_x3);
    return region_from_sets(Family::forward_inner, {{0.0, d.x2_x1_x3, kInf}});
}

// The same with the users' roles exchanged (X2 - X1 - X3).
inline RateRegion case1_mirror_region(const JointPmf& base, double tol = kChainTol) {
    const auto d = diagnose(base, tol);
    if (!d.chain_x2_x1_x3) throw ChainViolated("X2-X1-X3", d.x2_x1_x3);
    return region_from_sets(Family::forward_inner, {{d.x1_x2_x3, 0.0, kInf}});
}

// X1 - X3 - X2: forward rectangle I(X1;X3|X2) x I(X2;X3|X1).
inline RateRegion case2_region(const JointPmf& base, double tol = kChainTol) {
    const auto d = diagnose(base, tol);
    if (!d.chain_x1_x3_x2) throw ChainViolated("X1-X3-X2", d.x1_x3_x2);
    return region_from_sets(Family::forward_inner, {{d.x1_x2_x3, d.x2_x1_x3, kInf}});
}

// Backward formula I(S;X1|U) - I(S;X2|U), I(T;X2|U) - I(T;X1|U) at one system.
inline RateConstraintSet case3_point(const AuxSystem& aux) {
    if (is_forward(aux.family)) throw InvalidArgument("case 3 needs a backward auxiliary system");
    InfoCache c(aux.full);
    const auto m = detail::masks_of(aux.full, false);
    return {detail::pos(c.cmi(m.s, m.x1, m.u) - c.cmi(m.s, m.x2, m.u)),
            detail::pos(c.cmi(m.t, m.x2, m.u) - c.cmi(m.t, m.x1, m.u)), kInf};
}

struct Case3Region {
    RateRegion region;          // case-3 formula on accepted points (a lower bound of the true region)
    RateRegion inner, outer;    // backward inner and outer bounds on the same points
    std::size_t rejected = 0;   // points failing a required chain
    std::size_t asserted = 0;   // accepted points where I(S;T|X1,U) or I(S;T|X2,U) exceeded tol
    double max_pointwise_gap = 0.0;  // max |inner - outer| over accepted points
};

// Grid search restricted to systems with U - S - X3, U - T - X3 and
// S - X1 - X2 - T.
inline Case3Region case3_region(const JointPmf& base, const GridSpec& grid, double tol = kChainTol,
                                unsigned threads = 1) {
    const auto d = diagnose(base, tol);
    if (!d.chain_x1_x3_x2) throw ChainViolated("X1-X3-X2", d.x1_x3_x2);
    const auto lattice = grid_lattice(base, Family::backward_inner, grid);
    const std::uint64_t count = checked_grid_count(base, lattice);
    struct Slot {
        bool accepted = false, asserted = false;
        RateConstraintSet c3, in, out;
    };
    std::vector<Slot> slots(count);
    parallel_for(count, threads, [&](std::size_t i) {
        const JointPmf full = grid_joint(base, lattice, i);
        InfoCache c(full);
        const auto m = detail::masks_of(full, false);
        if (c.cmi(m.u, m.x3, m.s) > tol || c.cmi(m.u, m.x3, m.t) > tol) return;
        if (c.cmi(m.s, m.x2 | m.t, m.x1) > tol || c.cmi(m.s | m.x1, m.t, m.x2) > tol) return;
        auto& s = slots[i];
        if (c.cmi(m.s, m.t, m.x1 | m.u) > tol || c.cmi(m.s, m.t, m.x2 | m.u) > tol) {
            s.asserted = true;
            return;
        }
        s.accepted = true;
        s.c3 = {detail::pos(c.cmi(m.s, m.x1, m.u) - c.cmi(m.s, m.x2, m.u)),
                detail::pos(c.cmi(m.t, m.x2, m.u) - c.cmi(m.t, m.x1, m.u)), kInf};
        s.in = detail::backward_inner(c, m);
        s.out = detail::backward_outer(c, m);
    });
    Case3Region r;
    r.region.family = r.inner.family = Family::backward_inner;
    r.outer.family = Family::backward_outer;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto& s = slots[i];
        if (!s.accepted) {
            ++r.rejected;
            r.asserted += s.asserted;
            continue;
        }
        const auto idx = static_cast<std::int64_t>(i);
        r.region.points.push_back({s.c3, idx});
        r.inner.points.push_back({s.in, idx});
        r.outer.points.push_back({s.out, idx});
        r.max_pointwise_gap = std::max({r.max_pointwise_gap, std::abs(s.in.r1_max - s.out.r1_max),
                                        std::abs(s.in.r2_max - s.out.r2_max)});
    }
    r.region.rejected = r.inner.rejected = r.outer.rejected = r.rejected;
    r.region.frontier = pareto_frontier(r.region.sets());
    r.inner.frontier = pareto_frontier(r.inner.sets());
    r.outer.frontier = pareto_frontier(r.outer.sets());
    return r;
}

struct Coincidence {
    bool pass = false;
    double gap = 0.0;
    RatePair worst;  // probe realizing the gap
};

// One-sided L-infinity gap from the outer frontier to the inner union,
// probing outer vertices and points along its sloped stretches.
inline Coincidence verify_coincidence(const RateRegion& inner, const RateRegion& outer, double tol,
                                      std::size_t samples_per_edge = 16) {
    std::vector<RatePair> probes = outer.frontier.vertices;
    for (const auto& [a, b] : outer.frontier.segments)
        for (std::size_t k = 0; k <= samples_per_edge; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(samples_per_edge);
            probes.push_back({a.r1 + t * (b.r1 - a.r1), a.r2 + t * (b.r2 - a.r2)});
        }
    const auto sets = inner.sets();
    Coincidence out;
    for (const auto& p : probes) {
        const double g = linf_distance(sets, p);
        if (g > out.gap) {
            out.gap = g;
            out.worst = p;
        }
    }
    out.pass = out.gap <= tol;
    return out;
}

struct LemmaCheck {
    double lhs = 0.0, rhs = 0.0, slack = 0.0;
    bool holds() const { return slack >= -1e-10; }
};

// I(K;X3^n,F2|F1) - I(K;X2^n|F1) against
// sum_i I(K;F2,X3_i|X3^{i-1},X2_{i+1}^n,F1) - I(K;X2_i|X3^{i-1},X2_{i+1}^n,F1)
// on a joint over K, F1, F2, X2[1..n], X3[1..n].
inline LemmaCheck lemma3_check(const JointPmf& joint, std::size_t n) {
    if (n == 0) throw InvalidArgument("lemma check needs n >= 1");
    InfoCache c(joint);
    auto x2 = [](std::size_t i) { return iid_name("X2", i); };
    auto x3 = [](std::size_t i) { return iid_name("X3", i); };
    const AxisMask k = joint.mask({"K"}), f1 = joint.mask({"F1"}), f2 = joint.mask({"F2"});
    AxisMask all2 = 0, all3 = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        all2 |= joint.mask({x2(i)});
        all3 |= joint.mask({x3(i)});
    }
    LemmaCheck out;
    out.lhs = c.cmi(k, all3 | f2, f1) - c.cmi(k, all2, f1);
    for (std::size_t i = 1; i <= n; ++i) {
        AxisMask w = f1;
        for (std::size_t j = 1; j < i; ++j) w |= joint.mask({x3(j)});
        for (std::size_t j = i + 1; j <= n; ++j) w |= joint.mask({x2(j)});
        out.rhs += c.cmi(k, f2 | joint.mask({x3(i)}), w) - c.cmi(k, joint.mask({x2(i)}), w);
    }
    out.slack = out.rhs - out.lhs;
    return out;
}

// Variable list for lemma3_check with the given cardinalities.
inline std::vector<VariableId> lemma3_variables(std::size_t n, std::size_t ck, std::size_t cf1, std::size_t cf2,
                                                std::size_t cx2, std::size_t cx3) {
    std::vector<VariableId> vars{{"K", ck}, {"F1", cf1}, {"F2", cf2}};
    for (std::size_t i = 1; i <= n; ++i) vars.push_back({iid_name("X2", i), cx2});
    for (std::size_t i = 1; i <= n; ++i) vars.push_back({iid_name("X3", i), cx3});
    return vars;
}

}  // namespace skr

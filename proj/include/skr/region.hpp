#pragma once

// Rate formulas of the forward and backward bounds, evaluated at given
// auxiliary channels or maximized over a lattice of channels.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "skr/error.hpp"
#include "skr/frontier.hpp"
#include "skr/lattice.hpp"
#include "skr/parallel.hpp"
#include "skr/pmf.hpp"

namespace skr {

inline constexpr double kFactorizationTol = 1e-9;
inline constexpr double kMarkovTol = 1e-9;

enum class Family { forward_inner, forward_outer, backward_inner, backward_outer };
enum class Direction { forward, backward };

inline const char* to_string(Family f) {
    switch (f) {
        case Family::forward_inner: return "forward-inner";
        case Family::forward_outer: return "forward-outer";
        case Family::backward_inner: return "backward-inner";
        case Family::backward_outer: return "backward-outer";
    }
    return "?";
}

inline const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

inline bool is_forward(Family f) { return f == Family::forward_inner || f == Family::forward_outer; }

// Base joint plus auxiliaries. Forward systems carry S, T, U, V; backward
// systems carry S, T, U.
struct AuxSystem {
    JointPmf base;
    std::vector<Channel> channels;
    Family family;
    JointPmf full;
};

namespace detail {

struct Masks {
    AxisMask x1, x2, x3, s, t, u, v;
};

inline Masks masks_of(const JointPmf& full, bool with_v) {
    auto one = [&](const char* n) { return AxisMask{1} << full.axis(n); };
    return {one("X1"), one("X2"), one("X3"), one("S"), one("T"), one("U"), with_v ? one("V") : AxisMask{0}};
}

inline double pos(double v) { return v > 0.0 ? v : 0.0; }

inline RateConstraintSet forward_inner(InfoCache& c, const Masks& m) {
    const double leak_s = c.cmi(m.s, m.x2, m.t | m.u);
    const double leak_t = c.cmi(m.t, m.x1, m.s | m.v);
    return {pos(c.cmi(m.s, m.x3, m.t | m.u) - leak_s), pos(c.cmi(m.t, m.x3, m.s | m.v) - leak_t),
            pos(c.cmi(m.s | m.t, m.x3, m.u | m.v) - leak_s - leak_t - c.cmi(m.s, m.t, m.u | m.v))};
}

inline RateConstraintSet forward_outer(InfoCache& c, const Masks& m) {
    return {pos(c.cmi(m.s, m.t | m.x3, m.u) - c.cmi(m.s, m.x2, m.u)),
            pos(c.cmi(m.t, m.s | m.x3, m.v) - c.cmi(m.t, m.x1, m.v)), kInf};
}

inline RateConstraintSet backward_inner(InfoCache& c, const Masks& m) {
    return {pos(c.cmi(m.s, m.x1, m.u) - c.cmi(m.s, m.x2 | m.t, m.u)),
            pos(c.cmi(m.t, m.x2, m.u) - c.cmi(m.t, m.x1 | m.s, m.u)), kInf};
}

inline RateConstraintSet backward_outer(InfoCache& c, const Masks& m) {
    const double r1 = std::min(c.cmi(m.s, m.x1, m.u) - c.cmi(m.s, m.x2, m.u),
                               c.cmi(m.s, m.x1, m.t | m.u) - c.cmi(m.s, m.x2, m.t | m.u));
    const double r2 = std::min(c.cmi(m.t, m.x2, m.u) - c.cmi(m.t, m.x1, m.u),
                               c.cmi(m.t, m.x2, m.s | m.u) - c.cmi(m.t, m.x1, m.s | m.u));
    return {pos(r1), pos(r2), kInf};
}

inline bool backward_markov_ok(InfoCache& c, const Masks& m, double tol) {
    return c.cmi(m.u, m.x3, m.s) <= tol && c.cmi(m.u, m.x3, m.t) <= tol;
}

inline RateConstraintSet evaluate(Family f, InfoCache& c, const Masks& m) {
    switch (f) {
        case Family::forward_inner: return forward_inner(c, m);
        case Family::forward_outer: return forward_outer(c, m);
        case Family::backward_inner: return backward_inner(c, m);
        case Family::backward_outer: return backward_outer(c, m);
    }
    return {};
}

inline void check_base(const JointPmf& base) {
    if (base.rank() != 3 || !base.contains("X1") || !base.contains("X2") || !base.contains("X3"))
        throw InvalidArgument("base distribution must be over exactly X1, X2, X3");
}

// Residuals whose vanishing is equivalent to the family's factorization.
inline void check_factorization(Family f, InfoCache& c, const Masks& m, double tol) {
    auto need = [&](double r, const char* what) {
        if (r > tol) throw FactorizationError(std::string(what) + " residual " + std::to_string(r));
    };
    if (is_forward(f)) {
        need(c.cmi(m.s, m.x2 | m.x3, m.x1), "S depends on more than X1:");
        need(c.cmi(m.t, m.x1 | m.x3 | m.s, m.x2), "T depends on more than X2:");
        need(c.cmi(m.u, m.x1 | m.x2 | m.x3 | m.t | m.v, m.s), "U depends on more than S:");
        need(c.cmi(m.v, m.x1 | m.x2 | m.x3 | m.s | m.u, m.t), "V depends on more than T:");
    } else {
        need(c.cmi(m.s | m.t, m.x1 | m.x2, m.x3), "(S,T) depends on more than X3:");
        need(c.cmi(m.u, m.x1 | m.x2 | m.x3, m.s | m.t), "U depends on more than (S,T):");
        if (f == Family::backward_outer) {
            const double r1 = c.cmi(m.u, m.x3, m.s), r2 = c.cmi(m.u, m.x3, m.t);
            if (r1 > kMarkovTol) throw ChainViolated("U-S-X3", r1);
            if (r2 > kMarkovTol) throw ChainViolated("U-T-X3", r2);
        }
    }
}

}  // namespace detail

// Extends the base joint by the channels in order and validates the family's
// factorization.
inline AuxSystem make_aux_system(JointPmf base, std::vector<Channel> channels, Family family) {
    detail::check_base(base);
    JointPmf full = base;
    for (const auto& ch : channels) full = extend(full, ch);
    const bool fwd = is_forward(family);
    for (const char* n : {"S", "T", "U"})
        if (!full.contains(n)) throw InvalidArgument(std::string("auxiliary system lacks ") + n);
    if (fwd && !full.contains("V")) throw InvalidArgument("forward auxiliary system lacks V");
    if (full.rank() != (fwd ? 7u : 6u)) throw InvalidArgument("unexpected variables in auxiliary system");
    InfoCache cache(full);
    detail::check_factorization(family, cache, detail::masks_of(full, fwd), kFactorizationTol);
    return AuxSystem{std::move(base), std::move(channels), family, std::move(full)};
}

inline RateConstraintSet evaluate_point(const AuxSystem& aux) {
    InfoCache cache(aux.full);
    return detail::evaluate(aux.family, cache, detail::masks_of(aux.full, is_forward(aux.family)));
}

inline RateConstraintSet checked_point(const AuxSystem& aux, Family expected) {
    if (aux.family != expected)
        throw InvalidArgument(std::string("expected a ") + to_string(expected) + " system, got " + to_string(aux.family));
    return evaluate_point(aux);
}

inline RateConstraintSet forward_inner_point(const AuxSystem& aux) { return checked_point(aux, Family::forward_inner); }
inline RateConstraintSet forward_outer_point(const AuxSystem& aux) { return checked_point(aux, Family::forward_outer); }
inline RateConstraintSet backward_inner_point(const AuxSystem& aux) {
    return checked_point(aux, Family::backward_inner);
}
inline RateConstraintSet backward_outer_point(const AuxSystem& aux) {
    return checked_point(aux, Family::backward_outer);
}

inline RateConstraintSet explicit_outer(const JointPmf& base) {
    detail::check_base(base);
    InfoCache c(base);
    return {c.cmi({"X1"}, {"X3"}, {"X2"}), c.cmi({"X2"}, {"X3"}, {"X1"}), kInf};
}

struct GridSpec {
    std::size_t card_s = 0;  // 0 picks |source| + 1
    std::size_t card_t = 0;
    std::size_t card_u = 2;
    std::size_t card_v = 2;
    std::uint32_t q = 1;
};

struct RegionPoint {
    RateConstraintSet rates;
    std::int64_t grid_index = -1;
};

struct RateRegion {
    Family family = Family::forward_inner;
    std::vector<RegionPoint> points;
    Frontier frontier;
    std::size_t rejected = 0;  // grid points failing a required chain

    std::vector<RateConstraintSet> sets() const {
        std::vector<RateConstraintSet> out;
        out.reserve(points.size());
        for (const auto& p : points) out.push_back(p.rates);
        return out;
    }
};

inline RateRegion region_from_sets(Family family, std::vector<RateConstraintSet> sets) {
    RateRegion r;
    r.family = family;
    for (auto& s : sets) r.points.push_back({s, -1});
    r.frontier = pareto_frontier(r.sets());
    return r;
}

// The channel lattice behind a grid. Forward: S|X1, T|X2, U|S, V|T.
// Backward: (S,T)|X3, U|(S,T).
inline GridSpec resolve_grid(const JointPmf& base, Family family, GridSpec g) {
    if (g.card_s == 0) g.card_s = (is_forward(family) ? base.cardinality("X1") : base.cardinality("X3")) + 1;
    if (g.card_t == 0) g.card_t = (is_forward(family) ? base.cardinality("X2") : base.cardinality("X3")) + 1;
    if (g.q == 0 || g.card_s == 0 || g.card_t == 0 || g.card_u == 0 || g.card_v == 0)
        throw InvalidArgument("grid cardinalities and q must be >= 1");
    return g;
}

inline LatticeProduct grid_lattice(const JointPmf& base, Family family, const GridSpec& spec) {
    const GridSpec g = resolve_grid(base, family, spec);
    std::vector<ChannelLattice> parts;
    if (is_forward(family)) {
        parts.emplace_back(VariableSet{"X1"}, base.cardinality("X1"), std::vector<VariableId>{{"S", g.card_s}}, g.q);
        parts.emplace_back(VariableSet{"X2"}, base.cardinality("X2"), std::vector<VariableId>{{"T", g.card_t}}, g.q);
        parts.emplace_back(VariableSet{"S"}, g.card_s, std::vector<VariableId>{{"U", g.card_u}}, g.q);
        parts.emplace_back(VariableSet{"T"}, g.card_t, std::vector<VariableId>{{"V", g.card_v}}, g.q);
    } else {
        parts.emplace_back(VariableSet{"X3"}, base.cardinality("X3"),
                           std::vector<VariableId>{{"S", g.card_s}, {"T", g.card_t}}, g.q);
        parts.emplace_back(VariableSet{"S", "T"}, g.card_s * g.card_t, std::vector<VariableId>{{"U", g.card_u}},
                           g.q);
    }
    return LatticeProduct(std::move(parts));
}

inline std::uint64_t checked_grid_count(const JointPmf& base, const LatticeProduct& lattice) {
    // Each point materializes the full joint once, so the budget bounds both
    // the number of points and the work per point.
    const double budget = static_cast<double>(entry_budget());
    if (lattice.count() > budget)
        throw CapacityError("grid enumeration of " + std::to_string(static_cast<unsigned long long>(lattice.count())) +
                                " points",
                            lattice.count(), entry_budget());
    (void)base;
    return static_cast<std::uint64_t>(lattice.count());
}

inline JointPmf grid_joint(const JointPmf& base, const LatticeProduct& lattice, std::uint64_t index) {
    JointPmf full = base;
    for (const auto& ch : lattice.channels(index)) full = extend(full, ch);
    return full;
}

struct EnumerateOptions {
    unsigned threads = 1;
    // Extra acceptance test on each full joint (e.g. additional chains).
    std::function<bool(InfoCache&)> accept;
};

// Union over all lattice channel tuples of the family's point evaluator.
inline RateRegion enumerate_region(const JointPmf& base, Family family, const GridSpec& grid,
                                   const EnumerateOptions& opt = {}) {
    detail::check_base(base);
    const auto lattice = grid_lattice(base, family, grid);
    const std::uint64_t count = checked_grid_count(base, lattice);
    const bool fwd = is_forward(family);
    std::vector<std::optional<RateConstraintSet>> slots(count);
    parallel_for(count, opt.threads, [&](std::size_t i) {
        const JointPmf full = grid_joint(base, lattice, i);
        InfoCache cache(full);
        const auto m = detail::masks_of(full, fwd);
        if (family == Family::backward_outer && !detail::backward_markov_ok(cache, m, kMarkovTol)) return;
        if (opt.accept && !opt.accept(cache)) return;
        slots[i] = detail::evaluate(family, cache, m);
    });
    RateRegion r;
    r.family = family;
    for (std::uint64_t i = 0; i < count; ++i) {
        if (slots[i]) r.points.push_back({*slots[i], static_cast<std::int64_t>(i)});
        else ++r.rejected;
    }
    r.frontier = pareto_frontier(r.sets());
    return r;
}

// Channels behind a grid point, for reports.
inline std::vector<Channel> grid_channels(const JointPmf& base, Family family, const GridSpec& grid,
                                          std::int64_t index) {
    return grid_lattice(base, family, grid).channels(static_cast<std::uint64_t>(index));
}

struct CorollaryResult {
    double value = 0.0;
    std::int64_t argmax = -1;
};

// Largest single-key rate when the other user only wiretaps: forward
// max I(S;X3|U) - I(S;X2|U) over U-S-X1, backward max I(S;X1|U) - I(S;X2|U)
// over U-S-X3. Grid indices coincide with enumerate_region on the same grid
// with |T| = |V| = 1, the first maximizer wins.
inline CorollaryResult corollary_capacity(const JointPmf& base, Direction dir, GridSpec grid, unsigned threads = 1) {
    detail::check_base(base);
    const Family family = dir == Direction::forward ? Family::forward_inner : Family::backward_inner;
    grid.card_t = 1;
    grid.card_v = 1;
    const auto lattice = grid_lattice(base, family, grid);
    const std::uint64_t count = checked_grid_count(base, lattice);
    std::vector<double> values(count, 0.0);
    parallel_for(count, threads, [&](std::size_t i) {
        const JointPmf full = grid_joint(base, lattice, i);
        InfoCache c(full);
        const auto m = detail::masks_of(full, dir == Direction::forward);
        const double v = dir == Direction::forward ? c.cmi(m.s, m.x3, m.u) - c.cmi(m.s, m.x2, m.u)
                                                   : c.cmi(m.s, m.x1, m.u) - c.cmi(m.s, m.x2, m.u);
        values[i] = detail::pos(v);
    });
    CorollaryResult out;
    for (std::uint64_t i = 0; i < count; ++i)
        if (out.argmax < 0 || values[i] > out.value) {
            out.value = values[i];
            out.argmax = static_cast<std::int64_t>(i);
        }
    return out;
}

}  // namespace skr

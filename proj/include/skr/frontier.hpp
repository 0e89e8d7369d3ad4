#pragma once

// Upper-right boundary of a union of rate polygons
//   {(R1, R2) >= 0 : R1 <= r1_max, R2 <= r2_max, R1 + R2 <= sum_max}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace skr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct RateConstraintSet {
    double r1_max = 0.0;
    double r2_max = 0.0;
    double sum_max = kInf;

    bool contains(double r1, double r2, double tol = 0.0) const {
        return r1 >= -tol && r2 >= -tol && r1 <= r1_max + tol && r2 <= r2_max + tol && r1 + r2 <= sum_max + tol;
    }

    friend bool operator==(const RateConstraintSet&, const RateConstraintSet&) = default;
};

struct RatePair {
    double r1 = 0.0;
    double r2 = 0.0;

    friend bool operator==(const RatePair&, const RatePair&) = default;
};

// Vertices sorted by strictly increasing R1 and non-increasing R2. sloped[i]
// says whether the whole segment from vertices[i] to vertices[i + 1] lies on
// the boundary; otherwise only its endpoints do. segments lists every stretch
// of slope -1 on the boundary, including ones that start just after a jump.
struct Frontier {
    std::vector<RatePair> vertices;
    std::vector<bool> sloped;
    std::vector<std::pair<RatePair, RatePair>> segments;
};

namespace detail {

// Snap to a 2^-40 grid so values that differ only by rounding coincide and
// later sums and differences are exact.
inline double snap(double v) {
    if (!std::isfinite(v)) return v;
    return std::ldexp(std::round(std::ldexp(v, 40)), -40);
}

struct Piece {
    double x0, x1;
    double level;  // flat height, or the sum constant of a sloped piece
    bool sloped;
    double y(double x) const { return sloped ? level - x : level; }
};

}  // namespace detail

// Largest R2 with (r1, R2) in the union, or -inf if r1 exceeds every r1_max.
inline double envelope_r2(std::span<const RateConstraintSet> sets, double r1) {
    double best = -kInf;
    for (const auto& s : sets) {
        const double a = std::min(s.r1_max, s.sum_max);
        if (r1 > a || r1 < 0) continue;
        best = std::max(best, std::min(s.r2_max, s.sum_max - r1));
    }
    return best;
}

inline Frontier pareto_frontier(std::span<const RateConstraintSet> sets) {
    Frontier out;
    struct Item {
        double a, b, c, d;
    };
    std::vector<Item> items;
    double amax = 0.0, f0 = 0.0;
    for (const auto& s : sets) {
        const double c = detail::snap(std::max(0.0, s.sum_max));
        const double a = detail::snap(std::max(0.0, std::min(s.r1_max, c)));
        const double b = detail::snap(std::max(0.0, std::min(s.r2_max, c)));
        items.push_back({a, b, c, std::isfinite(c) ? c - b : kInf});
        amax = std::max(amax, a);
        f0 = std::max(f0, b);
    }
    if (amax == 0.0) {
        out.vertices.push_back({0.0, f0});
        return out;
    }

    // Breakpoints where a polygon drops out (a) or turns from flat to sloped (d).
    std::vector<double> coords{0.0};
    for (const auto& it : items) {
        coords.push_back(it.a);
        if (it.d > 0.0 && it.d < it.a) coords.push_back(it.d);
    }
    std::sort(coords.begin(), coords.end(), std::greater<>());
    coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

    std::vector<std::size_t> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return items[l].a > items[r].a; });

    // Sweep right to left. On (lo, hi] the active polygons are those with
    // a >= hi, and an active polygon is flat there iff d >= hi.
    std::multiset<double> sloped_c;
    std::multimap<double, std::pair<double, double>, std::greater<>> turning;  // d -> (b, c)
    double flat_b = -kInf;
    std::size_t next = 0;
    std::vector<detail::Piece> pieces;
    for (std::size_t j = 0; j + 1 < coords.size(); ++j) {
        const double hi = coords[j], lo = coords[j + 1];
        while (next < order.size() && items[order[next]].a >= hi) {
            const auto& it = items[order[next++]];
            if (it.d >= hi) {
                flat_b = std::max(flat_b, it.b);
            } else {
                sloped_c.insert(it.c);
                turning.emplace(it.d, std::pair{it.b, it.c});
            }
        }
        while (!turning.empty() && turning.begin()->first >= hi) {
            const auto [b, c] = turning.begin()->second;
            turning.erase(turning.begin());
            sloped_c.erase(sloped_c.find(c));
            flat_b = std::max(flat_b, b);
        }
        const double c = sloped_c.empty() ? -kInf : *sloped_c.rbegin();
        // max(flat_b, c - x): sloped left of s = c - flat_b, flat right of it.
        const double s = c - flat_b;
        if (flat_b > -kInf && s < hi) pieces.push_back({std::max(lo, s), hi, flat_b, false});
        if (c > -kInf && s > lo) pieces.push_back({lo, std::min(hi, s), c, true});
    }
    std::reverse(pieces.begin(), pieces.end());

    std::vector<detail::Piece> merged;
    for (const auto& p : pieces) {
        if (p.x1 <= p.x0) continue;
        if (!merged.empty() && merged.back().sloped == p.sloped && merged.back().level == p.level &&
            merged.back().x1 == p.x0) {
            merged.back().x1 = p.x1;
        } else {
            merged.push_back(p);
        }
    }

    auto push = [&](RatePair v, bool sloped_edge) {
        if (!out.vertices.empty()) {
            auto& last = out.vertices.back();
            if (v.r1 - last.r1 < 1e-9) {
                if (v.r2 > last.r2) last = v;
                return;
            }
            out.sloped.push_back(sloped_edge);
        }
        out.vertices.push_back(v);
    };

    // F(0) may exceed the limit from the right when some polygon has a = 0.
    if (f0 > merged.front().y(0.0) || merged.front().sloped) push({0.0, f0}, false);
    for (const auto& p : merged) {
        const RatePair left{p.x0, p.y(p.x0)}, right{p.x1, std::max(0.0, p.y(p.x1))};
        if (!p.sloped) {
            push(right, false);
            continue;
        }
        out.segments.push_back({left, right});
        const bool attached = !out.vertices.empty() && out.vertices.back() == left;
        push(right, attached);
    }
    return out;
}

// Upper concave envelope of the frontier (the time-sharing hull), Pareto part only.
inline Frontier concave_hull(const Frontier& f) {
    std::vector<RatePair> pts;
    if (f.vertices.empty()) return f;
    pts.push_back({0.0, f.vertices.front().r2});
    pts.insert(pts.end(), f.vertices.begin(), f.vertices.end());
    pts.push_back({f.vertices.back().r1, 0.0});
    std::sort(pts.begin(), pts.end(), [](const RatePair& a, const RatePair& b) {
        return a.r1 < b.r1 || (a.r1 == b.r1 && a.r2 > b.r2);
    });
    std::vector<RatePair> hull;
    for (const auto& p : pts) {
        if (!hull.empty() && hull.back().r1 == p.r1) continue;
        while (hull.size() >= 2) {
            const auto& o = hull[hull.size() - 2];
            const auto& a = hull.back();
            const double cross = (a.r1 - o.r1) * (p.r2 - o.r2) - (a.r2 - o.r2) * (p.r1 - o.r1);
            if (cross >= 0) hull.pop_back();
            else break;
        }
        hull.push_back(p);
    }
    Frontier out;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const bool flat_next = i + 1 < hull.size() && hull[i + 1].r2 >= hull[i].r2;
        const bool dominated_tail = i + 1 == hull.size() && hull.size() > 1 && hull[i].r2 == 0.0 &&
                                    hull[i - 1].r1 == hull[i].r1;
        if (flat_next || dominated_tail) continue;
        if (!out.vertices.empty()) {
            if (hull[i].r1 <= out.vertices.back().r1) continue;
            out.sloped.push_back(true);
        }
        out.vertices.push_back(hull[i]);
    }
    return out;
}

// L-infinity distance from p to one polygon; 0 when p is inside.
inline double linf_distance(const RateConstraintSet& s, RatePair p) {
    double t = std::max({0.0, p.r1 - s.r1_max, p.r2 - s.r2_max});
    if (std::isfinite(s.sum_max)) {
        const double lo = std::min(p.r1, p.r2), hi = std::max(p.r1, p.r2);
        double ts = (p.r1 + p.r2 - s.sum_max) / 2.0;
        if (ts > lo) ts = hi - s.sum_max;
        t = std::max(t, ts);
    }
    return t;
}

inline double linf_distance(std::span<const RateConstraintSet> sets, RatePair p) {
    double best = kInf;
    for (const auto& s : sets) best = std::min(best, linf_distance(s, p));
    if (sets.empty()) best = std::max(p.r1, p.r2);
    return best;
}

}  // namespace skr

#pragma once

// Definition-level reference for the information measures. Deliberately
// shares nothing with the library: a pmf is a map from outcome tuples to
// probabilities, and every quantity is a direct sum over that map.

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "skr/pmf.hpp"

namespace oracle {

using Outcome = std::vector<int>;

struct Dict {
    std::vector<std::string> names;
    std::map<Outcome, double> p;

    std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw std::out_of_range(name);
    }

    Dict project(const std::vector<std::string>& keep) const {
        Dict out;
        out.names = keep;
        std::vector<std::size_t> idx;
        for (const auto& k : keep) idx.push_back(index(k));
        for (const auto& [o, q] : p) {
            Outcome sub;
            for (auto i : idx) sub.push_back(o[i]);
            out.p[sub] += q;
        }
        return out;
    }
};

// Reads the dense table cell by cell through at(), walking the digits by hand.
inline Dict from_pmf(const skr::JointPmf& pmf) {
    Dict d;
    std::vector<std::size_t> card;
    for (const auto& v : pmf.variables()) {
        d.names.push_back(v.name);
        card.push_back(v.cardinality);
    }
    std::vector<std::size_t> digits(card.size(), 0);
    const auto table = pmf.table();
    for (std::size_t flat = 0; flat < table.size(); ++flat) {
        std::size_t rest = flat;
        for (std::size_t i = card.size(); i-- > 0;) {
            digits[i] = rest % card[i];
            rest /= card[i];
        }
        if (table[flat] > 0.0) d.p[Outcome(digits.begin(), digits.end())] += table[flat];
    }
    return d;
}

// Hand-built pmf over small alphabets: f(outcome) gives the probability.
template <class F>
Dict make(std::vector<std::string> names, std::vector<int> card, F f) {
    Dict d;
    d.names = std::move(names);
    Outcome o(card.size(), 0);
    while (true) {
        const double q = f(o);
        if (q > 0.0) d.p[o] = q;
        std::size_t i = card.size();
        while (i > 0 && ++o[i - 1] == card[i - 1]) o[--i] = 0;
        if (i == 0) break;
    }
    return d;
}

// H(A) = -sum p(a) log2 p(a).
inline double H(const Dict& d, const std::vector<std::string>& a) {
    if (a.empty()) return 0.0;
    double h = 0.0;
    for (const auto& [o, q] : d.project(a).p)
        if (q > 0.0) h -= q * std::log2(q);
    return h;
}

inline std::vector<std::string> cat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline Outcome cat_outcome(Outcome a, const Outcome& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// H(A|C) = sum p(a,c) log2 p(c)/p(a,c).
inline double H(const Dict& d, const std::vector<std::string>& a, const std::vector<std::string>& c) {
    const Dict ac = d.project(cat(a, c));
    const Dict cc = d.project(c);
    double h = 0.0;
    for (const auto& [o, q] : ac.p) {
        if (q <= 0.0) continue;
        const Outcome co(o.begin() + static_cast<std::ptrdiff_t>(a.size()), o.end());
        h += q * std::log2((c.empty() ? 1.0 : cc.p.at(co)) / q);
    }
    return h;
}

// I(A;B|C) = sum p(a,b,c) log2 p(a,b,c)p(c) / (p(a,c)p(b,c)).
inline double I(const Dict& d, const std::vector<std::string>& a, const std::vector<std::string>& b,
                const std::vector<std::string>& c = {}) {
    const Dict abc = d.project(cat(cat(a, b), c));
    const Dict ac = d.project(cat(a, c)), bc = d.project(cat(b, c)), cc = d.project(c);
    const auto na = static_cast<std::ptrdiff_t>(a.size()), nb = static_cast<std::ptrdiff_t>(b.size());
    double s = 0.0;
    for (const auto& [o, q] : abc.p) {
        if (q <= 0.0) continue;
        Outcome oa(o.begin(), o.begin() + na), ob(o.begin() + na, o.begin() + na + nb), oc(o.begin() + na + nb, o.end());
        const double pc = c.empty() ? 1.0 : cc.p.at(oc);
        s += q * std::log2(q * pc / (ac.p.at(cat_outcome(oa, oc)) * bc.p.at(cat_outcome(ob, oc))));
    }
    return s;
}

}  // namespace oracle

#pragma once

// Seeded random distributions for fuzzing and property checks.

#include <cmath>
#include <vector>

#include "skr/pmf.hpp"
#include "skr/rng.hpp"

namespace skr {

// Flat Dirichlet draw: normalized exponential weights.
inline std::vector<double> random_simplex(std::size_t size, Rng& rng) {
    std::vector<double> w(size);
    double total = 0.0;
    for (auto& x : w) {
        x = -std::log(1.0 - rng.uniform());
        total += x;
    }
    for (auto& x : w) x /= total;
    return w;
}

inline JointPmf random_pmf(std::vector<VariableId> vars, Rng& rng) {
    std::size_t size = 1;
    for (const auto& v : vars) size *= v.cardinality;
    return JointPmf(std::move(vars), random_simplex(size, rng));
}

// X1, X2, X3 joint in which `middle` separates the other two.
inline JointPmf random_chain(std::size_t c1, std::size_t c2, std::size_t c3, int middle, Rng& rng) {
    const std::size_t cards[3] = {c1, c2, c3};
    const int ends[2] = {middle == 0 ? 1 : 0, middle == 2 ? 1 : 2};
    const auto pm = random_simplex(cards[middle], rng);
    std::vector<std::vector<double>> pa, pb;
    for (std::size_t m = 0; m < cards[middle]; ++m) {
        pa.push_back(random_simplex(cards[ends[0]], rng));
        pb.push_back(random_simplex(cards[ends[1]], rng));
    }
    std::vector<double> t(c1 * c2 * c3, 0.0);
    std::size_t x[3];
    for (x[0] = 0; x[0] < c1; ++x[0])
        for (x[1] = 0; x[1] < c2; ++x[1])
            for (x[2] = 0; x[2] < c3; ++x[2])
                t[(x[0] * c2 + x[1]) * c3 + x[2]] =
                    pm[x[middle]] * pa[x[middle]][x[ends[0]]] * pb[x[middle]][x[ends[1]]];
    return JointPmf({{"X1", c1}, {"X2", c2}, {"X3", c3}}, std::move(t));
}

}  // namespace skr

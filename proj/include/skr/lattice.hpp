#pragma once

// Conditional distributions whose entries are multiples of 1/q, enumerated as
// products of simplex lattice points (one lattice point per matrix row).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "skr/error.hpp"
#include "skr/pmf.hpp"

namespace skr {

// All compositions of q into `parts` nonnegative integers, in lexicographically
// decreasing order (the first is (q, 0, ..., 0)).
inline std::vector<std::vector<std::uint32_t>> simplex_lattice(std::size_t parts, std::uint32_t q) {
    if (parts == 0) throw InvalidArgument("simplex lattice needs at least one part");
    std::vector<std::vector<std::uint32_t>> out;
    std::vector<std::uint32_t> cur(parts, 0);
    auto rec = [&](auto&& self, std::size_t i, std::uint32_t left) -> void {
        if (i + 1 == parts) {
            cur[i] = left;
            out.push_back(cur);
            return;
        }
        for (std::uint32_t v = left + 1; v-- > 0;) {
            cur[i] = v;
            self(self, i + 1, left - v);
        }
    };
    rec(rec, 0, q);
    return out;
}

inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

// One channel family p(to | from) on the 1/q lattice.
class ChannelLattice {
public:
    ChannelLattice(VariableSet from, std::size_t rows, std::vector<VariableId> to, std::uint32_t q)
        : from_(std::move(from)), to_(std::move(to)), rows_(rows), q_(q) {
        if (q == 0) throw InvalidArgument("lattice denominator must be >= 1");
        cols_ = 1;
        for (const auto& v : to_) cols_ *= v.cardinality;
        row_options_ = simplex_lattice(cols_, q);
        count_ = std::pow(static_cast<double>(row_options_.size()), static_cast<double>(rows_));
    }

    // Number of distinct channels, as a double so callers can check budgets
    // before anything overflows.
    double count() const noexcept { return count_; }
    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::uint32_t denominator() const noexcept { return q_; }

    // Numerators of channel `index`, row-major; row 0 varies slowest.
    std::vector<std::uint32_t> numerators(std::uint64_t index) const {
        std::vector<std::uint32_t> out(rows_ * cols_);
        const std::uint64_t m = row_options_.size();
        for (std::size_t r = rows_; r-- > 0;) {
            const auto& opt = row_options_[index % m];
            index /= m;
            std::copy(opt.begin(), opt.end(), out.begin() + static_cast<std::ptrdiff_t>(r * cols_));
        }
        return out;
    }

    Channel channel(std::uint64_t index) const {
        const auto num = numerators(index);
        Channel ch{from_, to_, std::vector<double>(num.size())};
        for (std::size_t i = 0; i < num.size(); ++i) ch.matrix[i] = static_cast<double>(num[i]) / q_;
        return ch;
    }

private:
    VariableSet from_;
    std::vector<VariableId> to_;
    std::size_t rows_;
    std::size_t cols_ = 1;
    std::uint32_t q_;
    std::vector<std::vector<std::uint32_t>> row_options_;
    double count_ = 1.0;
};

// Mixed-radix product of several channel lattices; the last lattice varies fastest.
class LatticeProduct {
public:
    explicit LatticeProduct(std::vector<ChannelLattice> parts) : parts_(std::move(parts)) {
        for (const auto& p : parts_) count_ *= p.count();
    }

    double count() const noexcept { return count_; }
    const std::vector<ChannelLattice>& parts() const noexcept { return parts_; }

    std::vector<std::uint64_t> split(std::uint64_t index) const {
        std::vector<std::uint64_t> out(parts_.size());
        for (std::size_t i = parts_.size(); i-- > 0;) {
            const auto m = static_cast<std::uint64_t>(parts_[i].count());
            out[i] = index % m;
            index /= m;
        }
        return out;
    }

    std::vector<Channel> channels(std::uint64_t index) const {
        const auto idx = split(index);
        std::vector<Channel> out;
        out.reserve(parts_.size());
        for (std::size_t i = 0; i < parts_.size(); ++i) out.push_back(parts_[i].channel(idx[i]));
        return out;
    }

    std::vector<std::vector<std::uint32_t>> numerators(std::uint64_t index) const {
        const auto idx = split(index);
        std::vector<std::vector<std::uint32_t>> out;
        for (std::size_t i = 0; i < parts_.size(); ++i) out.push_back(parts_[i].numerators(idx[i]));
        return out;
    }

private:
    std::vector<ChannelLattice> parts_;
    double count_ = 1.0;
};

}  // namespace skr

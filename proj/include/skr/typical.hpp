#pragma once

// Robust typicality: a tuple of length-n sequences is typical for a joint pmf
// when every cell's empirical frequency f satisfies |f - p| <= eps * p, which
// in particular forbids zero-probability cells.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "skr/error.hpp"
#include "skr/pmf.hpp"

namespace skr {

using Seq = std::vector<std::uint8_t>;

struct TypicalityParams {
    std::size_t n = 1;
    double eps = 0.1;
};

// Precomputed count bounds for one joint pmf at one (n, eps).
class TypicalityTest {
public:
    TypicalityTest() = default;
    TypicalityTest(const JointPmf& joint, TypicalityParams params) : n_(params.n) {
        if (params.n == 0) throw InvalidArgument("blocklength must be >= 1");
        if (!(params.eps > 0.0)) throw InvalidArgument("typicality tolerance must be positive");
        for (const auto& v : joint.variables()) cards_.push_back(v.cardinality);
        strides_ = joint.strides();
        const auto t = joint.table();
        lo_.resize(t.size());
        hi_.resize(t.size());
        const double n = static_cast<double>(params.n);
        for (std::size_t w = 0; w < t.size(); ++w) {
            // Slack absorbs rounding at exact boundaries such as f = p (1 + eps).
            const double lo = n * t[w] * (1.0 - params.eps), hi = n * t[w] * (1.0 + params.eps);
            lo_[w] = static_cast<std::uint32_t>(std::max(0.0, std::ceil(lo - 1e-9)));
            hi_[w] = t[w] > 0.0 ? static_cast<std::uint32_t>(std::floor(hi + 1e-9)) : 0;
        }
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t arity() const noexcept { return cards_.size(); }

    // Sequences are given in the joint's variable order.
    bool operator()(std::span<const Seq* const> seqs) const {
        if (seqs.size() != cards_.size()) throw DimensionMismatch("typicality test arity mismatch");
        for (const Seq* s : seqs)
            if (s->size() != n_) throw DimensionMismatch("sequence length differs from blocklength");
        thread_local std::vector<std::uint32_t> counts;
        counts.assign(lo_.size(), 0);
        for (std::size_t i = 0; i < n_; ++i) {
            std::size_t cell = 0;
            for (std::size_t j = 0; j < seqs.size(); ++j) cell += (*seqs[j])[i] * strides_[j];
            if (++counts[cell] > hi_[cell]) return false;
        }
        for (std::size_t w = 0; w < counts.size(); ++w)
            if (counts[w] < lo_[w]) return false;
        return true;
    }

    bool operator()(std::initializer_list<const Seq*> seqs) const {
        return (*this)(std::span<const Seq* const>(seqs.begin(), seqs.size()));
    }

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> cards_, strides_;
    std::vector<std::uint32_t> lo_, hi_;
};

inline bool jointly_typical(std::span<const Seq* const> seqs, const JointPmf& joint, TypicalityParams params) {
    if (!seqs.empty()) params.n = seqs.front()->size();
    for (const Seq* s : seqs)
        if (s->size() != params.n) throw DimensionMismatch("sequences differ in length");
    return TypicalityTest(joint, params)(seqs);
}

inline bool jointly_typical(std::initializer_list<const Seq*> seqs, const JointPmf& joint, TypicalityParams params) {
    return jointly_typical(std::span<const Seq* const>(seqs.begin(), seqs.size()), joint, params);
}

// Sequence <-> integer code, first symbol most significant, so code order is
// lexicographic order.
inline std::uint64_t seq_code(const Seq& s, std::size_t card) {
    std::uint64_t c = 0;
    for (auto x : s) c = c * card + x;
    return c;
}

inline Seq seq_from_code(std::uint64_t code, std::size_t card, std::size_t n) {
    Seq s(n);
    for (std::size_t i = n; i-- > 0;) {
        s[i] = static_cast<std::uint8_t>(code % card);
        code /= card;
    }
    return s;
}

inline double sequence_space(std::size_t card, std::size_t n) {
    return std::pow(static_cast<double>(card), static_cast<double>(n));
}

// All typical sequences of a single-variable pmf, in lexicographic order.
inline std::vector<Seq> typical_sequences(const JointPmf& marginal, TypicalityParams params) {
    if (marginal.rank() != 1) throw InvalidArgument("typical_sequences takes a single-variable pmf");
    const std::size_t card = marginal.variables()[0].cardinality;
    if (card > 256) throw InvalidArgument("alphabets above 256 letters are not supported");
    const double space = sequence_space(card, params.n);
    if (space > static_cast<double>(entry_budget())) throw CapacityError("typical set enumeration", space, entry_budget());
    const TypicalityTest test(marginal, params);
    std::vector<Seq> out;
    const auto total = static_cast<std::uint64_t>(space);
    Seq s(params.n, 0);
    for (std::uint64_t c = 0; c < total; ++c) {
        const Seq* p = &s;
        if (test(std::span<const Seq* const>(&p, 1))) out.push_back(s);
        for (std::size_t i = params.n; i-- > 0;) {
            if (++s[i] < card) break;
            s[i] = 0;
        }
    }
    return out;
}

}  // namespace skr

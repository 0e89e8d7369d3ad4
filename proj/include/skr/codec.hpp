#pragma once

// Random-binning codebooks over typical sequences, with the encoders and
// typicality decoders of the forward and backward protocols.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "skr/error.hpp"
#include "skr/pmf.hpp"
#include "skr/rng.hpp"
#include "skr/typical.hpp"

namespace skr {

struct BinIndex {
    std::uint64_t k = 0, kp = 0, kpp = 0;
    friend bool operator==(const BinIndex&, const BinIndex&) = default;
};

// ceil(2^{n rate}), at least 1.
inline std::uint64_t bin_count(double rate, std::size_t n) {
    const double e = rate * static_cast<double>(n);
    if (e > 62.0) throw InfeasibleRates("bin count 2^" + std::to_string(e) + " does not fit");
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(std::exp2(e) - 1e-9)));
}

// Typical sequences of one variable split into keys x columns x residuals.
// A seeded shuffle fixes each sequence's position; positions fill the
// (k, k') grid one full round at a time, so every bin level stays balanced.
class Codebook {
public:
    Codebook(std::vector<Seq> typical, std::size_t card, std::uint64_t keys, std::uint64_t columns, std::uint64_t seed)
        : seqs_(std::move(typical)), card_(card), keys_(keys), columns_(columns), seed_(seed) {
        if (seqs_.empty()) throw InfeasibleRates("typical set is empty");
        if (keys_ == 0 || columns_ == 0) throw InfeasibleRates("bin counts must be >= 1");
        const double cells = static_cast<double>(keys_) * static_cast<double>(columns_);
        if (cells > static_cast<double>(seqs_.size()))
            throw InfeasibleRates(std::to_string(keys_) + "x" + std::to_string(columns_) +
                                  " key/public bins exceed the " + std::to_string(seqs_.size()) + " typical sequences");
        n_ = seqs_.front().size();
        const std::uint64_t kc = keys_ * columns_;
        residuals_ = (seqs_.size() + kc - 1) / kc;
        const std::uint64_t lcm = std::lcm(keys_, columns_);

        std::vector<std::uint32_t> order(seqs_.size());
        std::iota(order.begin(), order.end(), 0U);
        Rng rng(seed_);
        rng.shuffle(order);
        index_.resize(seqs_.size());
        for (std::uint64_t pos = 0; pos < order.size(); ++pos) {
            const std::uint64_t t = pos % kc, block = t / lcm;
            index_[order[pos]] = {(t % keys_ + block) % keys_, t % columns_, pos / kc};
        }
        cells_.assign(kc, {});
        columns_list_.assign(columns_, {});
        for (std::uint32_t id = 0; id < seqs_.size(); ++id) {
            const auto& b = index_[id];
            cells_[b.k * columns_ + b.kp].push_back(id);
            columns_list_[b.kp].push_back(id);
            by_code_.emplace(seq_code(seqs_[id], card_), id);
        }
        for (auto& c : cells_)
            std::sort(c.begin(), c.end(), [&](std::uint32_t a, std::uint32_t b) { return index_[a].kpp < index_[b].kpp; });
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t card() const noexcept { return card_; }
    std::size_t size() const noexcept { return seqs_.size(); }
    std::uint64_t keys() const noexcept { return keys_; }
    std::uint64_t columns() const noexcept { return columns_; }
    std::uint64_t residuals() const noexcept { return residuals_; }
    std::uint64_t seed() const noexcept { return seed_; }

    const Seq& sequence(std::uint32_t id) const { return seqs_.at(id); }
    const BinIndex& index(std::uint32_t id) const { return index_.at(id); }
    std::span<const std::uint32_t> column(std::uint64_t kp) const { return columns_list_.at(kp); }
    std::span<const std::uint32_t> cell(std::uint64_t k, std::uint64_t kp) const {
        return cells_.at(k * columns_ + kp);
    }

    std::int64_t find(const Seq& s) const {
        if (s.size() != n_) return -1;
        for (auto x : s)
            if (x >= card_) return -1;
        const auto it = by_code_.find(seq_code(s, card_));
        return it == by_code_.end() ? -1 : it->second;
    }

    std::int64_t find(BinIndex b) const {
        if (b.k >= keys_ || b.kp >= columns_) return -1;
        for (auto id : cell(b.k, b.kp))
            if (index_[id].kpp == b.kpp) return id;
        return -1;
    }

    void dump(std::ostream& os) const {
        os << "n=" << n_ << " |S|=" << card_ << " bins=" << keys_ << 'x' << columns_ << 'x' << residuals_
           << " seed=" << seed_ << '\n';
        for (std::uint32_t id = 0; id < seqs_.size(); ++id) {
            for (auto x : seqs_[id]) os << static_cast<unsigned>(x);
            os << ' ' << index_[id].k << ' ' << index_[id].kp << ' ' << index_[id].kpp << '\n';
        }
    }

private:
    std::vector<Seq> seqs_;
    std::size_t card_;
    std::size_t n_ = 0;
    std::uint64_t keys_, columns_, residuals_ = 0, seed_;
    std::vector<BinIndex> index_;
    std::vector<std::vector<std::uint32_t>> cells_;
    std::vector<std::vector<std::uint32_t>> columns_list_;
    std::unordered_map<std::uint64_t, std::uint32_t> by_code_;
};

inline std::uint64_t aux_codebook_size(double info, double eps2, std::size_t n) {
    const double e = (info + eps2) * static_cast<double>(n);
    const double size = std::ceil(std::exp2(e) - 1e-9);
    if (size > static_cast<double>(entry_budget())) throw CapacityError("auxiliary codebook", size, entry_budget());
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(size));
}

// i.i.d. codewords u(a). Codewords with equal content are grouped into
// classes: an encoder picking uniformly among covering codewords is the same
// as picking a class by multiplicity and then a member uniformly.
class AuxCodebook {
public:
    AuxCodebook() = default;
    AuxCodebook(const JointPmf& pu, std::size_t n, std::uint64_t count, std::uint64_t seed) : seed_(seed) {
        if (pu.rank() != 1) throw InvalidArgument("auxiliary codebook takes a single-variable pmf");
        card_ = pu.variables()[0].cardinality;
        Rng rng(seed);
        words_.reserve(count);
        for (std::uint64_t a = 0; a < count; ++a) {
            Seq w(n);
            for (auto& x : w) x = static_cast<std::uint8_t>(rng.categorical(pu.table()));
            words_.push_back(std::move(w));
        }
        std::unordered_map<std::uint64_t, std::uint32_t> seen;
        std::vector<std::uint64_t> codes;
        for (const auto& w : words_) codes.push_back(seq_code(w, card_));
        std::vector<std::uint64_t> distinct = codes;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (std::uint32_t c = 0; c < distinct.size(); ++c) {
            seen.emplace(distinct[c], c);
            classes_.push_back(seq_from_code(distinct[c], card_, n));
        }
        members_.assign(classes_.size(), {});
        class_of_.resize(words_.size());
        for (std::uint32_t a = 0; a < words_.size(); ++a) {
            class_of_[a] = seen.at(codes[a]);
            members_[class_of_[a]].push_back(a);
        }
    }

    std::size_t size() const noexcept { return words_.size(); }
    std::size_t classes() const noexcept { return classes_.size(); }
    const Seq& word(std::uint32_t a) const { return words_.at(a); }
    const Seq& class_word(std::uint32_t c) const { return classes_.at(c); }
    std::uint32_t class_of(std::uint32_t a) const { return class_of_.at(a); }
    std::span<const std::uint32_t> members(std::uint32_t c) const { return members_.at(c); }

private:
    std::uint64_t seed_ = 0;
    std::size_t card_ = 1;
    std::vector<Seq> words_;
    std::vector<Seq> classes_;
    std::vector<std::uint32_t> class_of_;
    std::vector<std::vector<std::uint32_t>> members_;
};

enum class EncodeStatus { ok, no_sequence, no_cover };
enum class DecodeStatus { ok, none, ambiguous };

inline const char* to_string(EncodeStatus s) {
    return s == EncodeStatus::ok ? "ok" : s == EncodeStatus::no_sequence ? "EncoderNoSequence" : "EncoderNoCover";
}

inline const char* to_string(DecodeStatus s) {
    return s == DecodeStatus::ok ? "ok" : s == DecodeStatus::none ? "DecodeNone" : "DecodeAmbiguous";
}

// Key and public indices of one encoder run. On failure the key reads 0 and
// aux_class is kNoClass.
struct EncodingResult {
    static constexpr std::uint32_t kNoClass = 0xffffffffU;
    EncodeStatus status = EncodeStatus::ok;
    std::uint64_t key = 0, pub = 0;
    std::uint32_t aux = 0, aux_class = kNoClass;
    std::int64_t seq = -1;
};

struct DecodeResult {
    DecodeStatus status = DecodeStatus::none;
    std::uint32_t first = 0, second = 0;  // sequence ids in the searched codebooks
};

// Weighted choice over (class, multiplicity) pairs, then a member uniformly.
inline std::pair<std::uint32_t, std::uint32_t> pick_cover(const AuxCodebook& aux,
                                                          std::span<const std::pair<std::uint32_t, std::uint32_t>> cover,
                                                          Rng& rng) {
    std::uint64_t total = 0;
    for (const auto& c : cover) total += c.second;
    std::uint64_t r = rng.below(total);
    for (const auto& c : cover) {
        if (r < c.second) return {c.first, aux.members(c.first)[r]};
        r -= c.second;
    }
    return {cover.back().first, aux.members(cover.back().first).back()};
}

// Rates for one binned sequence variable.
struct BinningParams {
    double rate = 0.0;           // R
    double public_rate = 0.0;    // R'
    double residual_rate = 0.0;  // R'' realized by the residual bin count
    std::uint64_t keys = 1, columns = 1, residuals = 1;
    std::size_t typical = 0;
};

inline BinningParams make_binning(double rate, double public_rate, std::size_t n, std::size_t typical) {
    if (rate < -1e-12) throw InfeasibleRates("negative key rate");
    if (public_rate < -1e-12)
        throw InfeasibleRates("key rate " + std::to_string(rate) + " leaves a negative public rate " +
                              std::to_string(public_rate));
    BinningParams b;
    b.rate = std::max(0.0, rate);
    b.public_rate = std::max(0.0, public_rate);
    b.keys = bin_count(b.rate, n);
    b.columns = bin_count(b.public_rate, n);
    b.typical = typical;
    const double kc = static_cast<double>(b.keys) * static_cast<double>(b.columns);
    if (kc > static_cast<double>(typical))
        throw InfeasibleRates(std::to_string(b.keys) + "x" + std::to_string(b.columns) +
                              " key/public bins exceed the " + std::to_string(typical) + " typical sequences at n=" +
                              std::to_string(n));
    b.residuals = (typical + b.keys * b.columns - 1) / (b.keys * b.columns);
    b.residual_rate = std::log2(static_cast<double>(b.residuals)) / static_cast<double>(n);
    return b;
}

struct EpsParams {
    double eps0 = 2.0;  // decoding and wiretap typicality
    double eps1 = 1.0;  // codebook, encoding and covering typicality
    double eps2 = 1.0;  // auxiliary codebook rate slack
};

// One key-carrying sequence variable: its codebook, the source it is drawn
// against, and the covering test for the auxiliary codeword.
struct BinnedVariable {
    std::string var;     // S or T
    std::string source;  // X1, X2 or X3
    Codebook book;
    TypicalityTest encode_test;  // (var, source)
};

// Forward protocol: users 1 and 2 each bin their own sequence and announce
// (k', a) and (l', b); user 3 decodes both.
class ForwardScheme {
public:
    struct User {
        BinnedVariable key;
        std::string aux_var;  // U or V
        BinningParams bins;
        AuxCodebook aux;
        TypicalityTest cover_test;    // (var, aux)
        TypicalityTest prefilter;     // (var, X3, aux)
        TypicalityTest wiretap_test;  // (var, other source, aux)
        std::string other_source;
    };

    // public_rates overrides R' per user; by default R' = H(var | other source, aux) - R.
    ForwardScheme(const JointPmf& full, std::size_t n, double r1, double r2, EpsParams eps, std::uint64_t seed,
                  std::array<std::uint64_t, 2> tags = {1, 2},
                  std::array<std::optional<double>, 2> public_rates = {})
        : n_(n), eps_(eps) {
        InfoCache c(full);
        const char* key[2] = {"S", "T"};
        const char* src[2] = {"X1", "X2"};
        const char* aux[2] = {"U", "V"};
        const double rates[2] = {r1, r2};
        for (int j = 0; j < 2; ++j) {
            const int o = 1 - j;
            const TypicalityParams p1{n, eps.eps1}, p0{n, eps.eps0};
            auto typical = typical_sequences(marginalize(full, {key[j]}), p1);
            const double rp = public_rates[j] ? *public_rates[j]
                                              : c.conditional_entropy(full.mask({key[j]}), full.mask({src[o], aux[j]})) - rates[j];
            auto bins = make_binning(rates[j], rp, n, typical.size());
            const std::uint64_t cb_seed = derive_seed(seed, static_cast<std::uint64_t>(Stream::codebook), tags[j]);
            Codebook book(std::move(typical), full.cardinality(key[j]), bins.keys, bins.columns, cb_seed);
            const double info = c.cmi(full.mask({key[j]}), full.mask({aux[j]}), 0);
            AuxCodebook ab(marginalize(full, {aux[j]}), n, aux_codebook_size(info, eps.eps2, n), derive_seed(cb_seed, 1));
            users_.push_back(User{BinnedVariable{key[j], src[j], std::move(book),
                                            TypicalityTest(marginalize(full, {key[j], src[j]}), p1)},
                             aux[j],
                             bins,
                             std::move(ab),
                             TypicalityTest(marginalize(full, {key[j], aux[j]}), p1),
                             TypicalityTest(marginalize(full, {key[j], "X3", aux[j]}), p0),
                             TypicalityTest(marginalize(full, {key[j], src[o], aux[j]}), p0),
                             src[o]});
        }
        decode_test_ = TypicalityTest(marginalize(full, {"S", "T", "X3", "U", "V"}), {n, eps.eps0});
    }

    std::size_t n() const noexcept { return n_; }
    const EpsParams& eps() const noexcept { return eps_; }
    const User& user(int j) const { return users_.at(j); }

    // Codebook sequences jointly typical with the user's source block.
    std::vector<std::uint32_t> candidates(int j, const Seq& x) const {
        const auto& u = users_[j];
        std::vector<std::uint32_t> out;
        for (std::uint32_t id = 0; id < u.key.book.size(); ++id)
            if (u.key.encode_test({&u.key.book.sequence(id), &x})) out.push_back(id);
        return out;
    }

    // Auxiliary classes covering a sequence, with multiplicities.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> cover_candidates(int j, std::uint32_t id) const {
        const auto& u = users_[j];
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        const Seq& s = u.key.book.sequence(id);
        for (std::uint32_t c = 0; c < u.aux.classes(); ++c)
            if (u.cover_test({&s, &u.aux.class_word(c)}))
                out.emplace_back(c, static_cast<std::uint32_t>(u.aux.members(c).size()));
        return out;
    }

    EncodingResult encode(int j, const Seq& x, Rng& rng) const {
        EncodingResult r;
        const auto cand = candidates(j, x);
        if (cand.empty()) {
            r.status = EncodeStatus::no_sequence;
            return r;
        }
        const std::uint32_t id = cand[rng.below(cand.size())];
        const auto cover = cover_candidates(j, id);
        if (cover.empty()) {
            r.status = EncodeStatus::no_cover;
            return r;
        }
        const auto [cls, a] = pick_cover(users_[j].aux, cover, rng);
        const auto& b = users_[j].key.book.index(id);
        r.key = b.k;
        r.pub = b.kp;
        r.aux = a;
        r.aux_class = cls;
        r.seq = id;
        return r;
    }

    // Column members of user j typical with (x3, aux codeword).
    std::vector<std::uint32_t> prefilter(int j, const Seq& x3, std::uint64_t column, std::uint32_t aux_class) const {
        const auto& u = users_[j];
        std::vector<std::uint32_t> out;
        const Seq& w = u.aux.class_word(aux_class);
        for (auto id : u.key.book.column(column))
            if (u.prefilter({&u.key.book.sequence(id), &x3, &w})) out.push_back(id);
        return out;
    }

    DecodeResult decode_filtered(const Seq& x3, std::span<const std::uint32_t> s_ids, std::span<const std::uint32_t> t_ids,
                                 std::uint32_t a_class, std::uint32_t b_class) const {
        DecodeResult r;
        const Seq& uw = users_[0].aux.class_word(a_class);
        const Seq& vw = users_[1].aux.class_word(b_class);
        int found = 0;
        for (auto s : s_ids)
            for (auto t : t_ids)
                if (decode_test_({&users_[0].key.book.sequence(s), &users_[1].key.book.sequence(t), &x3, &uw, &vw})) {
                    if (++found > 1) {
                        r.status = DecodeStatus::ambiguous;
                        return r;
                    }
                    r.first = s;
                    r.second = t;
                }
        r.status = found == 1 ? DecodeStatus::ok : DecodeStatus::none;
        return r;
    }

    // User 3: the unique (s, t) in columns (k', l') typical with (x3, u(a), v(b)).
    DecodeResult decode(const Seq& x3, std::uint64_t kp, std::uint32_t a, std::uint64_t lp, std::uint32_t b) const {
        const auto ac = users_[0].aux.class_of(a), bc = users_[1].aux.class_of(b);
        const auto s_ids = prefilter(0, x3, kp, ac);
        const auto t_ids = prefilter(1, x3, lp, bc);
        return decode_filtered(x3, s_ids, t_ids, ac, bc);
    }

    // The other user's attempt to resolve k'' from (k, k', own block, u(a)).
    DecodeResult wiretap(int j, std::uint64_t k, std::uint64_t kp, const Seq& other_block, std::uint32_t a) const {
        const auto& u = users_[j];
        const Seq& w = u.aux.word(a);
        DecodeResult r;
        int found = 0;
        for (auto id : u.key.book.cell(k, kp))
            if (u.wiretap_test({&u.key.book.sequence(id), &other_block, &w})) {
                if (++found > 1) {
                    r.status = DecodeStatus::ambiguous;
                    return r;
                }
                r.first = static_cast<std::uint32_t>(u.key.book.index(id).kpp);
            }
        r.status = found == 1 ? DecodeStatus::ok : DecodeStatus::none;
        return r;
    }

private:
    std::size_t n_;
    EpsParams eps_;
    std::vector<User> users_;
    TypicalityTest decode_test_;
};

struct BackwardEncoding {
    EncodeStatus status = EncodeStatus::ok;
    std::array<std::uint64_t, 2> key{0, 0}, pub{0, 0};
    std::uint32_t aux = 0, aux_class = EncodingResult::kNoClass;
    std::int64_t s = -1, t = -1;
};

// Backward protocol: user 3 picks a pair (s, t) typical with its block,
// announces (k', l', a); users 1 and 2 decode their own sequence.
class BackwardScheme {
public:
    BackwardScheme(const JointPmf& full, std::size_t n, double r1, double r2, EpsParams eps, std::uint64_t seed,
                   std::array<std::uint64_t, 2> tags = {1, 2},
                   std::array<std::optional<double>, 2> public_rates = {})
        : n_(n), eps_(eps) {
        InfoCache c(full);
        const char* key[2] = {"S", "T"};
        const char* own[2] = {"X1", "X2"};
        const double rates[2] = {r1, r2};
        const TypicalityParams p1{n, eps.eps1}, p0{n, eps.eps0};
        for (int j = 0; j < 2; ++j) {
            const int o = 1 - j;
            auto typical = typical_sequences(marginalize(full, {key[j]}), p1);
            // R'_1 = H(S | X2, T, U) - R1 and symmetrically for T.
            const double rp = public_rates[j] ? *public_rates[j]
                                              : c.conditional_entropy(full.mask({key[j]}), full.mask({own[o], key[o], "U"})) -
                                                    rates[j];
            bins_[j] = make_binning(rates[j], rp, n, typical.size());
            const std::uint64_t cb_seed = derive_seed(seed, static_cast<std::uint64_t>(Stream::codebook), tags[j]);
            books_[j].emplace_back(std::move(typical), full.cardinality(key[j]), bins_[j].keys, bins_[j].columns,
                                   cb_seed);
            single_[j] = TypicalityTest(marginalize(full, {key[j], "X3"}), p1);
            decode_[j] = TypicalityTest(marginalize(full, {key[j], own[j], "U"}), p0);
            wiretap_[j] = TypicalityTest(marginalize(full, {key[j], own[o], key[o], "U"}), p0);
        }
        pair_test_ = TypicalityTest(marginalize(full, {"S", "T", "X3"}), p1);
        cover_test_ = TypicalityTest(marginalize(full, {"S", "T", "U"}), p1);
        const double info = c.cmi(full.mask({"S", "T"}), full.mask({"U"}), 0);
        aux_ = AuxCodebook(marginalize(full, {"U"}), n, aux_codebook_size(info, eps.eps2, n),
                           derive_seed(seed, static_cast<std::uint64_t>(Stream::codebook), 3));
    }

    std::size_t n() const noexcept { return n_; }
    const EpsParams& eps() const noexcept { return eps_; }
    const Codebook& book(int j) const { return books_.at(j).front(); }
    const BinningParams& bins(int j) const { return bins_.at(j); }
    const AuxCodebook& aux() const noexcept { return aux_; }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> candidates(const Seq& x3) const {
        std::vector<std::uint32_t> ss, ts;
        for (std::uint32_t id = 0; id < book(0).size(); ++id)
            if (single_[0]({&book(0).sequence(id), &x3})) ss.push_back(id);
        for (std::uint32_t id = 0; id < book(1).size(); ++id)
            if (single_[1]({&book(1).sequence(id), &x3})) ts.push_back(id);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        for (auto s : ss)
            for (auto t : ts)
                if (pair_test_({&book(0).sequence(s), &book(1).sequence(t), &x3})) out.emplace_back(s, t);
        return out;
    }

    std::vector<std::pair<std::uint32_t, std::uint32_t>> cover_candidates(std::uint32_t s, std::uint32_t t) const {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        for (std::uint32_t c = 0; c < aux_.classes(); ++c)
            if (cover_test_({&book(0).sequence(s), &book(1).sequence(t), &aux_.class_word(c)}))
                out.emplace_back(c, static_cast<std::uint32_t>(aux_.members(c).size()));
        return out;
    }

    BackwardEncoding encode(const Seq& x3, Rng& rng) const {
        BackwardEncoding r;
        const auto cand = candidates(x3);
        if (cand.empty()) {
            r.status = EncodeStatus::no_sequence;
            return r;
        }
        const auto [s, t] = cand[rng.below(cand.size())];
        const auto cover = cover_candidates(s, t);
        if (cover.empty()) {
            r.status = EncodeStatus::no_cover;
            return r;
        }
        const auto [cls, a] = pick_cover(aux_, cover, rng);
        for (int j = 0; j < 2; ++j) {
            const auto& b = book(j).index(j == 0 ? s : t);
            r.key[j] = b.k;
            r.pub[j] = b.kp;
        }
        r.aux = a;
        r.aux_class = cls;
        r.s = s;
        r.t = t;
        return r;
    }

    DecodeResult decode_class(int j, const Seq& own_block, std::uint64_t column, std::uint32_t aux_class) const {
        DecodeResult r;
        const Seq& w = aux_.class_word(aux_class);
        int found = 0;
        for (auto id : book(j).column(column))
            if (decode_[j]({&book(j).sequence(id), &own_block, &w})) {
                if (++found > 1) {
                    r.status = DecodeStatus::ambiguous;
                    return r;
                }
                r.first = id;
            }
        r.status = found == 1 ? DecodeStatus::ok : DecodeStatus::none;
        return r;
    }

    // User j+1: the unique sequence in its column typical with (own block, u(a)).
    DecodeResult decode(int j, const Seq& own_block, std::uint64_t column, std::uint32_t a) const {
        return decode_class(j, own_block, column, aux_.class_of(a));
    }

    // The other user, knowing its own decoded sequence, resolving k''.
    DecodeResult wiretap(int j, std::uint64_t k, std::uint64_t kp, const Seq& other_block, const Seq& other_seq,
                         std::uint32_t a) const {
        DecodeResult r;
        const Seq& w = aux_.word(a);
        int found = 0;
        for (auto id : book(j).cell(k, kp)) {
            const Seq& s = book(j).sequence(id);
            if (wiretap_[j]({&s, &other_block, &other_seq, &w})) {
                if (++found > 1) {
                    r.status = DecodeStatus::ambiguous;
                    return r;
                }
                r.first = static_cast<std::uint32_t>(book(j).index(id).kpp);
            }
        }
        r.status = found == 1 ? DecodeStatus::ok : DecodeStatus::none;
        return r;
    }

private:
    std::size_t n_;
    EpsParams eps_;
    std::array<BinningParams, 2> bins_;
    std::array<std::vector<Codebook>, 2> books_;  // one entry each; Codebook has no default state
    std::array<TypicalityTest, 2> single_, decode_, wiretap_;
    TypicalityTest pair_test_, cover_test_;
    AuxCodebook aux_;
};

}  // namespace skr

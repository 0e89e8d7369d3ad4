#pragma once

// End-to-end trials of the binning protocols and exact small-n evaluation of
// reliability, leakage and key uniformity.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "skr/codec.hpp"
#include "skr/error.hpp"
#include "skr/parallel.hpp"
#include "skr/pmf.hpp"
#include "skr/region.hpp"
#include "skr/rng.hpp"

namespace skr {

enum class SimMode { monte_carlo, exact };

struct SimConfig {
    JointPmf base = JointPmf::uniform({{"X1", 2}, {"X2", 2}, {"X3", 2}});
    std::vector<Channel> channels;  // produce S, T, U (and V for forward)
    Direction direction = Direction::forward;
    std::size_t n = 8;
    std::optional<double> rate1, rate2;  // absolute rates; default (1 - margin) x the bound vertex
    std::array<std::optional<double>, 2> public_rates;  // R' overrides; default from the rate split
    double margin = 0.5;
    EpsParams eps;
    std::uint64_t trials = 1000;
    std::vector<std::uint64_t> seeds{1};
    SimMode mode = SimMode::monte_carlo;
    bool exact_error = true;  // exact mode: also enumerate X3 blocks for the error probability
    unsigned threads = 1;
    // Labels of the parties holding keys K and L; they select codebook and
    // encoder streams, so swapping users swaps them too.
    std::array<std::uint64_t, 2> party_tags{1, 2};
};

struct SeedReport {
    std::uint64_t seed = 0;
    std::array<double, 2> err{0, 0}, leak{0, 0}, leak_se{0, 0}, gap{0, 0}, key_entropy{0, 0};
    std::array<double, 2> wiretap_success{-1, -1};  // Monte Carlo only
    std::array<double, 2> encoder_failure{0, 0};
    bool err_computed = true;
    double m2_residual = 0.0;  // exact mode: MI change from an independent view variable
};

struct SimReport {
    Direction direction = Direction::forward;
    SimMode mode = SimMode::monte_carlo;
    std::size_t n = 0;
    std::uint64_t trials = 0;
    std::array<double, 2> rate{0, 0};
    RateConstraintSet bound;
    std::array<BinningParams, 2> bins;
    std::array<double, 2> err{0, 0}, leak{0, 0}, leak_se{0, 0}, gap{0, 0}, key_entropy{0, 0};
    std::array<double, 2> wiretap_success{-1, -1};
    bool err_computed = true;
    double m2_residual = 0.0;
    std::vector<SeedReport> per_seed;
    std::vector<std::string> warnings;
};

namespace detail {

inline Family inner_family(Direction d) { return d == Direction::forward ? Family::forward_inner : Family::backward_inner; }

inline std::array<Seq, 3> sample_block(const JointPmf& base, std::size_t n, Rng& rng) {
    std::array<Seq, 3> out{Seq(n), Seq(n), Seq(n)};
    const auto& st = base.strides();
    const std::array<std::size_t, 3> axes{base.axis("X1"), base.axis("X2"), base.axis("X3")};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cell = rng.categorical(base.table());
        for (int v = 0; v < 3; ++v)
            out[v][i] = static_cast<std::uint8_t>(cell / st[axes[v]] % base.variables()[axes[v]].cardinality);
    }
    return out;
}

inline Stream party_stream(std::uint64_t tag) { return tag == 1 ? Stream::user1 : Stream::user2; }

}  // namespace detail

// i.i.d. blocks (x1, x2, x3) from the base joint.
inline std::array<Seq, 3> sample_sources(const JointPmf& base, std::size_t n, Rng& rng) {
    return detail::sample_block(base, n, rng);
}

// Protocol instance shared by the Monte Carlo and exact paths.
struct RatePlan {
    RateConstraintSet bound;
    std::array<double, 2> rate{0, 0};
    std::vector<std::string> warnings;
};

inline JointPmf sim_joint(const SimConfig& cfg) {
    return make_aux_system(cfg.base, cfg.channels, detail::inner_family(cfg.direction)).full;
}

// Default rates sit at (1 - margin) times the corner (min(a, c), min(b, c - min(a, c)))
// of the bound at the configured auxiliaries; explicit rates override.
inline RatePlan plan_rates(const SimConfig& cfg, const JointPmf& full) {
    RatePlan plan;
    InfoCache c(full);
    const bool fwd = cfg.direction == Direction::forward;
    const auto m = detail::masks_of(full, fwd);
    plan.bound = fwd ? detail::forward_inner(c, m) : detail::backward_inner(c, m);
    const double a = std::min(plan.bound.r1_max, plan.bound.sum_max);
    const double b = std::min(plan.bound.r2_max, plan.bound.sum_max - a);
    const double scale = 1.0 - cfg.margin;
    plan.rate[0] = cfg.rate1 ? *cfg.rate1 : scale * a;
    plan.rate[1] = cfg.rate2 ? *cfg.rate2 : scale * b;
    if (plan.rate[0] < 0 || plan.rate[1] < 0) throw InfeasibleRates("rates must be nonnegative");

    // Reliability conditions on the public rates; violating them only makes
    // decoding unreliable, so they are reported rather than refused.
    auto h = [&](AxisMask a_, AxisMask given) { return c.conditional_entropy(a_, given); };
    auto warn = [&](bool ok, const std::string& what) {
        if (!ok) plan.warnings.push_back("reliability condition fails: " + what);
    };
    if (fwd) {
        const double r1p = cfg.public_rates[0].value_or(h(m.s, m.x2 | m.u) - plan.rate[0]);
        const double r2p = cfg.public_rates[1].value_or(h(m.t, m.x1 | m.v) - plan.rate[1]);
        warn(r1p >= h(m.s, m.x3 | m.t | m.u) - 1e-12, "R1' >= H(S|X3,T,U)");
        warn(r2p >= h(m.t, m.x3 | m.s | m.v) - 1e-12, "R2' >= H(T|X3,S,V)");
        warn(r1p + r2p >= h(m.s | m.t, m.x3 | m.u | m.v) - 1e-12, "R1'+R2' >= H(S,T|X3,U,V)");
    } else {
        const double r1p = cfg.public_rates[0].value_or(h(m.s, m.x2 | m.t | m.u) - plan.rate[0]);
        const double r2p = cfg.public_rates[1].value_or(h(m.t, m.x1 | m.s | m.u) - plan.rate[1]);
        warn(r1p >= h(m.s, m.x1 | m.u) - 1e-12, "R1' >= H(S|X1,U)");
        warn(r2p >= h(m.t, m.x2 | m.u) - 1e-12, "R2' >= H(T|X2,U)");
    }
    const double tol = 1e-9;
    if (plan.rate[0] > plan.bound.r1_max + tol || plan.rate[1] > plan.bound.r2_max + tol ||
        plan.rate[0] + plan.rate[1] > plan.bound.sum_max + tol)
        plan.warnings.push_back("rate pair lies outside the inner bound at these auxiliaries");
    return plan;
}

namespace detail {

// Plug-in mutual information with the Miller-Madow correction applied to each
// entropy, and a delta-method standard error.
struct PluginMi {
    double mi = 0.0, se = 0.0, h_key = 0.0;
};

inline PluginMi plugin_mi(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& samples) {
    PluginMi out;
    const double n = static_cast<double>(samples.size());
    if (samples.empty()) return out;
    std::map<std::uint64_t, std::uint64_t> ck, cv;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> ckv;
    for (const auto& s : samples) {
        ++ck[s.first];
        ++cv[s.second];
        ++ckv[s];
    }
    auto ent = [&](const auto& counts) {
        double h = 0.0;
        for (const auto& [key, c] : counts) {
            const double p = static_cast<double>(c) / n;
            h -= p * std::log2(p);
        }
        return h + (static_cast<double>(counts.size()) - 1.0) / (2.0 * n * std::log(2.0));
    };
    const double hk = ent(ck), hv = ent(cv), hkv = ent(ckv);
    out.mi = hk + hv - hkv;
    out.h_key = hk;
    double m1 = 0.0, m2 = 0.0;
    for (const auto& [kv, c] : ckv) {
        const double p = static_cast<double>(c) / n;
        const double l = std::log2(p * n * n / (static_cast<double>(ck[kv.first]) * static_cast<double>(cv[kv.second])));
        m1 += p * l;
        m2 += p * l * l;
    }
    out.se = std::sqrt(std::max(0.0, m2 - m1 * m1) / n);
    return out;
}

// Eavesdropper view packed into one word: public indices, auxiliary class and
// the eavesdropper's block (its code if it fits in 16 bits, else a 16-bit hash).
inline std::uint64_t pack_view(std::uint64_t pub_a, std::uint64_t pub_b, std::uint32_t cls, const Seq& block,
                               std::size_t card) {
    const double space = sequence_space(card, block.size());
    const std::uint64_t code = seq_code(block, card);
    const std::uint64_t x = space <= 65536.0 ? code : (mix64(code) & 0xffffU);
    std::uint64_t h = mix64(pub_a);
    h = mix64(h ^ pub_b);
    h = mix64(h ^ cls);
    return (h << 16) ^ x;
}

struct TrialOutcome {
    std::array<std::uint8_t, 2> error{0, 0}, enc_fail{0, 0}, wiretap_ok{0, 0};
    std::array<std::uint64_t, 2> key{0, 0}, view{0, 0};
};

inline std::array<std::size_t, 3> cards_of(const JointPmf& base) {
    return {base.cardinality("X1"), base.cardinality("X2"), base.cardinality("X3")};
}

}  // namespace detail

inline SeedReport run_seed_mc_forward(const SimConfig& cfg, const ForwardScheme& sch, std::uint64_t seed) {
    const auto cards = detail::cards_of(cfg.base);
    std::vector<detail::TrialOutcome> out(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t i) {
        Rng src(seed, Stream::sources, i);
        const auto x = detail::sample_block(cfg.base, cfg.n, src);
        std::array<EncodingResult, 2> enc;
        for (int j = 0; j < 2; ++j) {
            Rng r(seed, detail::party_stream(cfg.party_tags[j]), i);
            enc[j] = sch.encode(j, x[j], r);
        }
        auto& o = out[i];
        const bool both = enc[0].status == EncodeStatus::ok && enc[1].status == EncodeStatus::ok;
        DecodeResult d;
        if (both) d = sch.decode(x[2], enc[0].pub, enc[0].aux, enc[1].pub, enc[1].aux);
        for (int j = 0; j < 2; ++j) {
            o.enc_fail[j] = enc[j].status != EncodeStatus::ok;
            const std::uint32_t got = j == 0 ? d.first : d.second;
            o.error[j] = !both || d.status != DecodeStatus::ok ||
                         sch.user(j).key.book.index(got).k != enc[j].key;
            o.key[j] = enc[j].key;
            o.view[j] = detail::pack_view(enc[j].pub, 0, enc[j].aux_class, x[1 - j], cards[1 - j]);
            if (enc[j].status == EncodeStatus::ok) {
                const auto& b = sch.user(j).key.book.index(static_cast<std::uint32_t>(enc[j].seq));
                const auto w = sch.wiretap(j, b.k, b.kp, x[1 - j], enc[j].aux);
                o.wiretap_ok[j] = w.status == DecodeStatus::ok && w.first == b.kpp;
            }
        }
    });
    SeedReport r;
    r.seed = seed;
    const double t = static_cast<double>(cfg.trials);
    for (int j = 0; j < 2; ++j) {
        std::uint64_t errs = 0, fails = 0, taps = 0;
        std::vector<std::pair<std::uint64_t, std::uint64_t>> samples;
        samples.reserve(out.size());
        for (const auto& o : out) {
            errs += o.error[j];
            fails += o.enc_fail[j];
            taps += o.wiretap_ok[j];
            samples.emplace_back(o.key[j], o.view[j]);
        }
        r.err[j] = static_cast<double>(errs) / t;
        r.encoder_failure[j] = static_cast<double>(fails) / t;
        r.wiretap_success[j] = static_cast<double>(taps) / t;
        const auto mi = detail::plugin_mi(samples);
        const double keys = static_cast<double>(sch.user(j).bins.keys);
        r.leak[j] = mi.mi / static_cast<double>(cfg.n);
        r.leak_se[j] = mi.se / static_cast<double>(cfg.n);
        r.key_entropy[j] = mi.h_key / static_cast<double>(cfg.n);
        r.gap[j] = (std::log2(keys) - mi.h_key) / static_cast<double>(cfg.n);
    }
    return r;
}

inline SeedReport run_seed_mc_backward(const SimConfig& cfg, const BackwardScheme& sch, std::uint64_t seed) {
    const auto cards = detail::cards_of(cfg.base);
    std::vector<detail::TrialOutcome> out(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t i) {
        Rng src(seed, Stream::sources, i);
        const auto x = detail::sample_block(cfg.base, cfg.n, src);
        Rng r3(seed, Stream::user3, i);
        const auto enc = sch.encode(x[2], r3);
        auto& o = out[i];
        const bool ok = enc.status == EncodeStatus::ok;
        std::array<DecodeResult, 2> d;
        for (int j = 0; j < 2; ++j) {
            if (ok) d[j] = sch.decode(j, x[j], enc.pub[j], enc.aux);
            o.enc_fail[j] = !ok;
            o.error[j] = !ok || d[j].status != DecodeStatus::ok || sch.book(j).index(d[j].first).k != enc.key[j];
            o.key[j] = enc.key[j];
            o.view[j] = detail::pack_view(enc.pub[0], enc.pub[1], enc.aux_class, x[1 - j], cards[1 - j]);
        }
        for (int j = 0; j < 2; ++j) {
            const int other = 1 - j;
            if (!ok || d[other].status != DecodeStatus::ok) continue;
            const auto id = static_cast<std::uint32_t>(j == 0 ? enc.s : enc.t);
            const auto& b = sch.book(j).index(id);
            const auto w = sch.wiretap(j, b.k, b.kp, x[other], sch.book(other).sequence(d[other].first), enc.aux);
            o.wiretap_ok[j] = w.status == DecodeStatus::ok && w.first == b.kpp;
        }
    });
    SeedReport r;
    r.seed = seed;
    const double t = static_cast<double>(cfg.trials);
    for (int j = 0; j < 2; ++j) {
        std::uint64_t errs = 0, fails = 0, taps = 0;
        std::vector<std::pair<std::uint64_t, std::uint64_t>> samples;
        for (const auto& o : out) {
            errs += o.error[j];
            fails += o.enc_fail[j];
            taps += o.wiretap_ok[j];
            samples.emplace_back(o.key[j], o.view[j]);
        }
        r.err[j] = static_cast<double>(errs) / t;
        r.encoder_failure[j] = static_cast<double>(fails) / t;
        r.wiretap_success[j] = static_cast<double>(taps) / t;
        const auto mi = detail::plugin_mi(samples);
        r.leak[j] = mi.mi / static_cast<double>(cfg.n);
        r.leak_se[j] = mi.se / static_cast<double>(cfg.n);
        r.key_entropy[j] = mi.h_key / static_cast<double>(cfg.n);
        r.gap[j] = (std::log2(static_cast<double>(sch.bins(j).keys)) - mi.h_key) / static_cast<double>(cfg.n);
    }
    return r;
}

namespace detail {

// Probability of every length-n block pair under a two-variable marginal,
// laid out [first block code][second block code].
inline std::vector<double> block_pair_probs(const JointPmf& base, const char* a, const char* b, std::size_t n) {
    const auto m = base.marginal_table(std::vector<std::size_t>{base.axis(a), base.axis(b)});
    const std::size_t ca = base.cardinality(a), cb = base.cardinality(b);
    std::vector<double> p{1.0};
    std::vector<std::size_t> da{1}, db{1};
    std::size_t sa = 1, sb = 1;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> next(sa * ca * sb * cb, 0.0);
        for (std::size_t xa = 0; xa < sa; ++xa)
            for (std::size_t xb = 0; xb < sb; ++xb) {
                const double q = p[xa * sb + xb];
                if (q == 0.0) continue;
                for (std::size_t ya = 0; ya < ca; ++ya)
                    for (std::size_t yb = 0; yb < cb; ++yb)
                        next[(xa * ca + ya) * (sb * cb) + xb * cb + yb] = q * m[ya * cb + yb];
            }
        p = std::move(next);
        sa *= ca;
        sb *= cb;
    }
    return p;
}

// Outcome of one encoder run as seen by the leakage computation.
struct Outcome {
    std::uint64_t key, pub_a, pub_b;
    std::uint32_t cls;  // classes() means failure
    double prob;
};

// I(first variable; view) summed directly as p log(p / (p_k p_v)), which
// avoids cancelling large entropies; also returns the change after appending
// an independent ternary variable to the view.
inline double direct_mi(const JointPmf& joint, const VariableSet& view) {
    std::vector<std::size_t> kv{0}, k{0}, v;
    for (const auto& name : view) {
        kv.push_back(joint.axis(name));
        v.push_back(joint.axis(name));
    }
    const auto pkv = joint.marginal_table(kv), pk = joint.marginal_table(k), pv = joint.marginal_table(v);
    const std::size_t nv = pv.size();
    double mi = 0.0;
    for (std::size_t a = 0; a < pk.size(); ++a)
        for (std::size_t b = 0; b < nv; ++b) {
            const double p = pkv[a * nv + b];
            if (p > 0.0) mi += p * std::log2(p / (pk[a] * pv[b]));
        }
    return std::max(0.0, mi);
}

inline std::pair<double, double> table_mi(std::vector<VariableId> vars, std::vector<double> table,
                                          const VariableSet& view) {
    const double total = std::accumulate(table.begin(), table.end(), 0.0);
    for (auto& p : table) p /= total;
    const JointPmf joint(std::move(vars), std::move(table));
    const double mi = direct_mi(joint, view);
    const Channel m2{{}, {{"M2", 3}}, {0.5, 0.25, 0.25}};
    VariableSet view2 = view;
    view2.push_back("M2");
    const double mi2 = direct_mi(extend(joint, m2), view2);
    return {mi, std::abs(mi2 - mi)};
}

inline double key_entropy_of(std::span<const double> table, std::size_t keys) {
    std::vector<double> pk(keys, 0.0);
    const std::size_t stride = table.size() / keys;
    for (std::size_t k = 0; k < keys; ++k)
        for (std::size_t r = 0; r < stride; ++r) pk[k] += table[k * stride + r];
    const double t = std::accumulate(pk.begin(), pk.end(), 0.0);
    for (auto& p : pk) p /= t;
    return JointPmf::table_entropy(pk);
}

inline void check_budget(const char* what, double entries) {
    if (entries > static_cast<double>(entry_budget())) throw CapacityError(what, entries, entry_budget());
}

}  // namespace detail

// Which parts of the eavesdropper's view enter the exact leakage.
struct ViewSelection {
    bool block = true, pub = true, aux = true;
};

struct ExactLeak {
    double leak = 0.0;  // bits per symbol
    double key_entropy = 0.0;
    double gap = 0.0;
    double m2_residual = 0.0;
};

namespace detail {

// Exact I(key; view) from a per-source-block outcome list: the key holder's
// block x_own and the eavesdropper's block x_eve with joint probabilities
// probs[x_own][x_eve]. Layout of the joint: key, block, pub_a, pub_b, class.
inline ExactLeak exact_leak_from(const std::vector<std::vector<Outcome>>& sel, const std::vector<double>& probs,
                                 std::size_t eve_blocks, std::uint64_t keys, std::uint64_t pub_a,
                                 std::uint64_t pub_b, std::uint32_t classes, std::size_t n, ViewSelection view,
                                 unsigned threads) {
    const std::size_t cls = classes + 1;
    const double entries = static_cast<double>(keys) * static_cast<double>(eve_blocks) * static_cast<double>(pub_a) *
                           static_cast<double>(pub_b) * static_cast<double>(cls);
    check_budget("exact leakage joint", entries);
    const std::size_t inner = pub_a * pub_b * cls;
    std::vector<double> table(static_cast<std::size_t>(entries), 0.0);
    // Shard by the eavesdropper's block; each shard owns disjoint entries.
    parallel_for(eve_blocks, threads, [&](std::size_t xe) {
        for (std::size_t xo = 0; xo < sel.size(); ++xo) {
            const double p = probs[xo * eve_blocks + xe];
            if (p == 0.0) continue;
            for (const auto& o : sel[xo]) {
                const std::size_t idx =
                    ((o.key * eve_blocks + xe) * pub_a + o.pub_a) * (pub_b * cls) + o.pub_b * cls + o.cls;
                table[idx] += p * o.prob;
            }
        }
    });
    (void)inner;
    std::vector<VariableId> vars{{"K", static_cast<std::size_t>(keys)},
                                 {"B", eve_blocks},
                                 {"P1", static_cast<std::size_t>(pub_a)},
                                 {"P2", static_cast<std::size_t>(pub_b)},
                                 {"A", cls}};
    VariableSet v;
    if (view.block) v.push_back("B");
    if (view.pub) {
        v.push_back("P1");
        v.push_back("P2");
    }
    if (view.aux) v.push_back("A");
    ExactLeak out;
    out.key_entropy = key_entropy_of(table, keys) / static_cast<double>(n);
    const auto [mi, resid] = table_mi(std::move(vars), std::move(table), v);
    out.leak = mi / static_cast<double>(n);
    out.m2_residual = resid;
    out.gap = (std::log2(static_cast<double>(keys)) / static_cast<double>(n)) - out.key_entropy;
    return out;
}

// Encoder selection distribution of a forward user for one source block.
inline std::vector<Outcome> forward_selection(const ForwardScheme& sch, int j, const Seq& x) {
    const auto& u = sch.user(j);
    const auto fail = static_cast<std::uint32_t>(u.aux.classes());
    std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint32_t>, double> acc;
    const auto cand = sch.candidates(j, x);
    if (cand.empty()) return {{0, 0, 0, fail, 1.0}};
    const double w = 1.0 / static_cast<double>(cand.size());
    for (auto id : cand) {
        const auto cover = sch.cover_candidates(j, id);
        const auto& b = u.key.book.index(id);
        if (cover.empty()) {
            acc[{0, 0, fail}] += w;
            continue;
        }
        double total = 0.0;
        for (const auto& c : cover) total += c.second;
        for (const auto& c : cover) acc[{b.k, b.kp, c.first}] += w * c.second / total;
    }
    std::vector<Outcome> out;
    for (const auto& [k, p] : acc) out.push_back({std::get<0>(k), std::get<1>(k), 0, std::get<2>(k), p});
    return out;
}

struct BackwardOutcome {
    std::array<std::uint64_t, 2> key, pub;
    std::uint32_t cls;
    std::int64_t s, t;  // -1 on failure
    double prob;
};

inline std::vector<BackwardOutcome> backward_selection(const BackwardScheme& sch, const Seq& x3) {
    const auto fail = static_cast<std::uint32_t>(sch.aux().classes());
    const auto cand = sch.candidates(x3);
    if (cand.empty()) return {{{0, 0}, {0, 0}, fail, -1, -1, 1.0}};
    std::vector<BackwardOutcome> out;
    const double w = 1.0 / static_cast<double>(cand.size());
    for (const auto& [s, t] : cand) {
        const auto cover = sch.cover_candidates(s, t);
        if (cover.empty()) {
            out.push_back({{0, 0}, {0, 0}, fail, -1, -1, w});
            continue;
        }
        double total = 0.0;
        for (const auto& c : cover) total += c.second;
        const auto& bs = sch.book(0).index(s);
        const auto& bt = sch.book(1).index(t);
        for (const auto& c : cover)
            out.push_back({{bs.k, bt.k}, {bs.kp, bt.kp}, c.first, s, t, w * c.second / total});
    }
    return out;
}

inline std::vector<Seq> all_blocks(std::size_t card, std::size_t n) {
    const auto total = static_cast<std::uint64_t>(sequence_space(card, n));
    std::vector<Seq> out;
    out.reserve(total);
    for (std::uint64_t c = 0; c < total; ++c) out.push_back(seq_from_code(c, card, n));
    return out;
}

}  // namespace detail

// Exact leakage of user j's key to the other user in the forward protocol.
inline ExactLeak exact_leakage_forward(const SimConfig& cfg, const ForwardScheme& sch, int j,
                                       ViewSelection view = {}) {
    const char* own = j == 0 ? "X1" : "X2";
    const char* eve = j == 0 ? "X2" : "X1";
    const std::size_t co = cfg.base.cardinality(own), ce = cfg.base.cardinality(eve);
    detail::check_budget("exact leakage source pairs", sequence_space(co, cfg.n) * sequence_space(ce, cfg.n));
    const auto own_blocks = detail::all_blocks(co, cfg.n);
    std::vector<std::vector<detail::Outcome>> sel(own_blocks.size());
    parallel_for(own_blocks.size(), cfg.threads,
                 [&](std::size_t x) { sel[x] = detail::forward_selection(sch, j, own_blocks[x]); });
    const auto probs = detail::block_pair_probs(cfg.base, own, eve, cfg.n);
    const auto& u = sch.user(j);
    return detail::exact_leak_from(sel, probs, static_cast<std::size_t>(sequence_space(ce, cfg.n)), u.bins.keys,
                                   u.bins.columns, 1, static_cast<std::uint32_t>(u.aux.classes()), cfg.n, view,
                                   cfg.threads);
}

// Exact leakage of user j's key to the other user in the backward protocol;
// the view holds both public indices and the auxiliary class.
inline ExactLeak exact_leakage_backward(const SimConfig& cfg, const BackwardScheme& sch, int j,
                                        ViewSelection view = {}) {
    const char* eve = j == 0 ? "X2" : "X1";
    const std::size_t c3 = cfg.base.cardinality("X3"), ce = cfg.base.cardinality(eve);
    detail::check_budget("exact leakage source pairs", sequence_space(c3, cfg.n) * sequence_space(ce, cfg.n));
    const auto blocks = detail::all_blocks(c3, cfg.n);
    std::vector<std::vector<detail::Outcome>> sel(blocks.size());
    parallel_for(blocks.size(), cfg.threads, [&](std::size_t x) {
        for (const auto& o : detail::backward_selection(sch, blocks[x]))
            sel[x].push_back({o.key[j], o.pub[0], o.pub[1], o.cls, o.prob});
    });
    const auto probs = detail::block_pair_probs(cfg.base, "X3", eve, cfg.n);
    return detail::exact_leak_from(sel, probs, static_cast<std::size_t>(sequence_space(ce, cfg.n)),
                                   sch.bins(j).keys, sch.bins(0).columns, sch.bins(1).columns,
                                   static_cast<std::uint32_t>(sch.aux().classes()), cfg.n, view, cfg.threads);
}

// Exact error probabilities of both keys, enumerating all three blocks.
inline std::array<double, 2> exact_error_forward(const SimConfig& cfg, const ForwardScheme& sch) {
    const auto cards = detail::cards_of(cfg.base);
    const std::size_t n = cfg.n;
    detail::check_budget("exact error enumeration",
                         sequence_space(cards[0], n) * sequence_space(cards[1], n) * sequence_space(cards[2], n));
    std::array<std::vector<Seq>, 3> blocks;
    for (int v = 0; v < 3; ++v) blocks[v] = detail::all_blocks(cards[v], n);
    std::array<std::vector<std::vector<detail::Outcome>>, 2> sel;
    for (int j = 0; j < 2; ++j) {
        sel[j].resize(blocks[j].size());
        parallel_for(blocks[j].size(), cfg.threads,
                     [&](std::size_t x) { sel[j][x] = detail::forward_selection(sch, j, blocks[j][x]); });
    }
    // Per-letter probabilities, then block probabilities on the fly.
    const auto& base = cfg.base;
    const auto letters = base.marginal_table(std::vector<std::size_t>{base.axis("X1"), base.axis("X2"), base.axis("X3")});
    const std::array<std::uint32_t, 2> fail{static_cast<std::uint32_t>(sch.user(0).aux.classes()),
                                            static_cast<std::uint32_t>(sch.user(1).aux.classes())};
    std::vector<std::array<double, 2>> per_x3(blocks[2].size(), {0.0, 0.0});
    parallel_for(blocks[2].size(), cfg.threads, [&](std::size_t x3i) {
        const Seq& x3 = blocks[2][x3i];
        std::map<std::pair<std::uint64_t, std::uint32_t>, std::vector<std::uint32_t>> pre[2];
        std::map<std::array<std::uint64_t, 4>, DecodeResult> cache;
        auto filtered = [&](int j, std::uint64_t col, std::uint32_t cls) -> const std::vector<std::uint32_t>& {
            auto key = std::pair{col, cls};
            auto it = pre[j].find(key);
            if (it == pre[j].end()) it = pre[j].emplace(key, sch.prefilter(j, x3, col, cls)).first;
            return it->second;
        };
        double e0 = 0.0, e1 = 0.0;
        for (std::size_t x1i = 0; x1i < blocks[0].size(); ++x1i)
            for (std::size_t x2i = 0; x2i < blocks[1].size(); ++x2i) {
                double p = 1.0;
                for (std::size_t i = 0; i < n && p != 0.0; ++i)
                    p *= letters[(blocks[0][x1i][i] * cards[1] + blocks[1][x2i][i]) * cards[2] + x3[i]];
                if (p == 0.0) continue;
                for (const auto& o1 : sel[0][x1i])
                    for (const auto& o2 : sel[1][x2i]) {
                        const double w = p * o1.prob * o2.prob;
                        if (o1.cls == fail[0] || o2.cls == fail[1]) {
                            e0 += w;
                            e1 += w;
                            continue;
                        }
                        const std::array<std::uint64_t, 4> key{o1.pub_a, o1.cls, o2.pub_a, o2.cls};
                        auto it = cache.find(key);
                        if (it == cache.end())
                            it = cache.emplace(key, sch.decode_filtered(x3, filtered(0, o1.pub_a, o1.cls),
                                                                        filtered(1, o2.pub_a, o2.cls), o1.cls, o2.cls))
                                     .first;
                        const auto& d = it->second;
                        const bool ok = d.status == DecodeStatus::ok;
                        if (!ok || sch.user(0).key.book.index(d.first).k != o1.key) e0 += w;
                        if (!ok || sch.user(1).key.book.index(d.second).k != o2.key) e1 += w;
                    }
            }
        per_x3[x3i] = {e0, e1};
    });
    std::array<double, 2> err{0.0, 0.0};
    for (const auto& e : per_x3) {
        err[0] += e[0];
        err[1] += e[1];
    }
    return err;
}

inline std::array<double, 2> exact_error_backward(const SimConfig& cfg, const BackwardScheme& sch) {
    const auto cards = detail::cards_of(cfg.base);
    const std::size_t n = cfg.n;
    detail::check_budget("exact error enumeration",
                         sequence_space(cards[0], n) * sequence_space(cards[1], n) * sequence_space(cards[2], n));
    std::array<std::vector<Seq>, 3> blocks;
    for (int v = 0; v < 3; ++v) blocks[v] = detail::all_blocks(cards[v], n);
    const auto& base = cfg.base;
    const auto letters = base.marginal_table(std::vector<std::size_t>{base.axis("X1"), base.axis("X2"), base.axis("X3")});
    std::vector<std::array<double, 2>> per_x3(blocks[2].size(), {0.0, 0.0});
    parallel_for(blocks[2].size(), cfg.threads, [&](std::size_t x3i) {
        const Seq& x3 = blocks[2][x3i];
        const auto sel = detail::backward_selection(sch, x3);
        // Each user's decoding depends only on its own block and the announcement.
        std::array<std::vector<double>, 2> marg;
        for (int j = 0; j < 2; ++j) {
            marg[j].assign(blocks[j].size(), 0.0);
        }
        double e[2] = {0.0, 0.0};
        for (std::size_t x1i = 0; x1i < blocks[0].size(); ++x1i)
            for (std::size_t x2i = 0; x2i < blocks[1].size(); ++x2i) {
                double p = 1.0;
                for (std::size_t i = 0; i < n && p != 0.0; ++i)
                    p *= letters[(blocks[0][x1i][i] * cards[1] + blocks[1][x2i][i]) * cards[2] + x3[i]];
                marg[0][x1i] += p;
                marg[1][x2i] += p;
            }
        for (int j = 0; j < 2; ++j)
            for (std::size_t xi = 0; xi < blocks[j].size(); ++xi) {
                const double p = marg[j][xi];
                if (p == 0.0) continue;
                for (const auto& o : sel) {
                    if (o.s < 0) {
                        e[j] += p * o.prob;
                        continue;
                    }
                    const auto d = sch.decode_class(j, blocks[j][xi], o.pub[j], o.cls);
                    if (d.status != DecodeStatus::ok || sch.book(j).index(d.first).k != o.key[j]) e[j] += p * o.prob;
                }
            }
        per_x3[x3i] = {e[0], e[1]};
    });
    std::array<double, 2> err{0.0, 0.0};
    for (const auto& e : per_x3) {
        err[0] += e[0];
        err[1] += e[1];
    }
    return err;
}

namespace detail {

inline SeedReport run_seed_exact(const SimConfig& cfg, const JointPmf& full, const RatePlan& plan,
                                 std::uint64_t seed) {
    SeedReport r;
    r.seed = seed;
    const auto cards = cards_of(cfg.base);
    const double err_space =
        sequence_space(cards[0], cfg.n) * sequence_space(cards[1], cfg.n) * sequence_space(cards[2], cfg.n);
    r.err_computed = cfg.exact_error && err_space <= static_cast<double>(entry_budget());
    // Refuse before building codebooks, which is the slow part at large n.
    check_budget("exact leakage source pairs", sequence_space(cards[0], cfg.n) * sequence_space(cards[1], cfg.n));
    std::array<ExactLeak, 2> lk;
    if (cfg.direction == Direction::forward) {
        const ForwardScheme sch(full, cfg.n, plan.rate[0], plan.rate[1], cfg.eps, seed, cfg.party_tags, cfg.public_rates);
        for (int j = 0; j < 2; ++j) lk[j] = exact_leakage_forward(cfg, sch, j);
        if (r.err_computed) {
            const auto e = exact_error_forward(cfg, sch);
            r.err = {e[0], e[1]};
        }
    } else {
        const BackwardScheme sch(full, cfg.n, plan.rate[0], plan.rate[1], cfg.eps, seed, cfg.party_tags, cfg.public_rates);
        for (int j = 0; j < 2; ++j) lk[j] = exact_leakage_backward(cfg, sch, j);
        if (r.err_computed) {
            const auto e = exact_error_backward(cfg, sch);
            r.err = {e[0], e[1]};
        }
    }
    if (!r.err_computed) r.err = {-1.0, -1.0};
    for (int j = 0; j < 2; ++j) {
        r.leak[j] = lk[j].leak;
        r.gap[j] = lk[j].gap;
        r.key_entropy[j] = lk[j].key_entropy;
        r.m2_residual = std::max(r.m2_residual, lk[j].m2_residual);
    }
    return r;
}

}  // namespace detail

// Runs every codebook seed and averages; exact mode enumerates instead of sampling.
inline SimReport run_simulation(const SimConfig& cfg) {
    if (cfg.n == 0) throw InvalidArgument("blocklength must be >= 1");
    if (cfg.seeds.empty()) throw InvalidArgument("at least one codebook seed is required");
    if (cfg.mode == SimMode::monte_carlo && cfg.trials == 0) throw InvalidArgument("trials must be >= 1");
    const JointPmf full = sim_joint(cfg);
    const RatePlan plan = plan_rates(cfg, full);
    SimReport rep;
    rep.direction = cfg.direction;
    rep.mode = cfg.mode;
    rep.n = cfg.n;
    rep.trials = cfg.mode == SimMode::monte_carlo ? cfg.trials : 0;
    rep.rate = plan.rate;
    rep.bound = plan.bound;
    rep.warnings = plan.warnings;
    for (std::uint64_t seed : cfg.seeds) {
        if (cfg.mode == SimMode::exact) {
            rep.per_seed.push_back(detail::run_seed_exact(cfg, full, plan, seed));
        } else if (cfg.direction == Direction::forward) {
            const ForwardScheme sch(full, cfg.n, plan.rate[0], plan.rate[1], cfg.eps, seed, cfg.party_tags, cfg.public_rates);
            rep.per_seed.push_back(run_seed_mc_forward(cfg, sch, seed));
        } else {
            const BackwardScheme sch(full, cfg.n, plan.rate[0], plan.rate[1], cfg.eps, seed, cfg.party_tags, cfg.public_rates);
            rep.per_seed.push_back(run_seed_mc_backward(cfg, sch, seed));
        }
    }
    // Bin counts do not depend on the seed.
    if (cfg.direction == Direction::forward) {
        const ForwardScheme sch(full, cfg.n, plan.rate[0], plan.rate[1], cfg.eps, cfg.seeds.front(), cfg.party_tags, cfg.public_rates);
        rep.bins = {sch.user(0).bins, sch.user(1).bins};
    } else {
        const BackwardScheme sch(full, cfg.n, plan.rate[0], plan.rate[1], cfg.eps, cfg.seeds.front(), cfg.party_tags, cfg.public_rates);
        rep.bins = {sch.bins(0), sch.bins(1)};
    }
    const double s = static_cast<double>(rep.per_seed.size());
    rep.err_computed = true;
    for (int j = 0; j < 2; ++j) {
        double se2 = 0.0, tap = 0.0;
        for (const auto& p : rep.per_seed) {
            rep.err[j] += p.err[j] / s;
            rep.leak[j] += p.leak[j] / s;
            rep.gap[j] += p.gap[j] / s;
            rep.key_entropy[j] += p.key_entropy[j] / s;
            se2 += p.leak_se[j] * p.leak_se[j];
            tap += p.wiretap_success[j] / s;
            rep.err_computed = rep.err_computed && p.err_computed;
            rep.m2_residual = std::max(rep.m2_residual, p.m2_residual);
        }
        rep.leak_se[j] = std::sqrt(se2) / s;
        rep.wiretap_success[j] = cfg.mode == SimMode::monte_carlo ? tap : -1.0;
    }
    if (!rep.err_computed) rep.err = {-1.0, -1.0};
    return rep;
}

// Conditions of the achievability definition at tolerance eps: both error
// probabilities, both leakages, both key rates and both uniformity gaps.
struct Definition1Check {
    bool err_K, err_L, leak_K, leak_L, rate, uniformity;
    bool all() const { return err_K && err_L && leak_K && leak_L && rate && uniformity; }
};

inline Definition1Check check_definition1(const SimReport& r, double eps) {
    return {r.err_computed && r.err[0] < eps,
            r.err_computed && r.err[1] < eps,
            r.leak[0] < eps,
            r.leak[1] < eps,
            r.key_entropy[0] > r.rate[0] - eps && r.key_entropy[1] > r.rate[1] - eps,
            r.gap[0] < eps && r.gap[1] < eps};
}

// The same system with users 1 and 2 exchanged: X1 <-> X2, S <-> T, U <-> V,
// rates and party labels swapped.
inline SimConfig swap_users(const SimConfig& cfg) {
    const bool fwd = cfg.direction == Direction::forward;
    auto rename = [fwd](const std::string& v) -> std::string {
        if (v == "X1") return "X2";
        if (v == "X2") return "X1";
        if (v == "S") return "T";
        if (v == "T") return "S";
        // U and V belong to users 1 and 2 only in the forward protocol.
        if (fwd && v == "U") return "V";
        if (fwd && v == "V") return "U";
        return v;
    };
    SimConfig out = cfg;
    std::vector<VariableId> vars;
    for (const auto& v : cfg.base.variables()) vars.push_back({rename(v.name), v.cardinality});
    const JointPmf renamed(vars, std::vector<double>(cfg.base.table().begin(), cfg.base.table().end()));
    out.base = marginalize(renamed, {"X1", "X2", "X3"});
    out.channels.clear();
    for (const auto& ch : cfg.channels) {
        Channel c = ch;
        for (auto& f : c.from) f = rename(f);
        for (auto& t : c.to) t.name = rename(t.name);
        out.channels.push_back(std::move(c));
    }
    out.rate1 = cfg.rate2;
    out.rate2 = cfg.rate1;
    out.public_rates = {cfg.public_rates[1], cfg.public_rates[0]};
    out.party_tags = {cfg.party_tags[1], cfg.party_tags[0]};
    return out;
}

}  // namespace skr

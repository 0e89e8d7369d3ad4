#pragma once

// Distribution files, number formatting, JSON documents and atomic output.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "skr/cases.hpp"
#include "skr/error.hpp"
#include "skr/frontier.hpp"
#include "skr/pmf.hpp"
#include "skr/region.hpp"
#include "skr/sim.hpp"

namespace skr {

using json = nlohmann::ordered_json;

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

// Fixed 9 decimals; values that would print as zero print as a bare 0.
inline std::string format_rate(double v) {
    if (std::abs(v) < 5e-10) return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}

// Distribution file:
//   vars: X1=<c1> X2=<c2> X3=<c3>
//   <x1> <x2> <x3> <prob>
// with '#' comments; omitted cells are 0.
inline JointPmf parse_distribution(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> cards;
    std::vector<std::string> order;
    std::vector<double> table;
    std::vector<bool> seen;
    auto fail = [&](const std::string& what) {
        throw ParseError("line " + std::to_string(line_no) + ": " + what);
    };
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (!header) {
            if (first != "vars:") fail("expected header 'vars: X1=<c1> X2=<c2> X3=<c3>'");
            std::string item;
            while (ls >> item) {
                const auto eq = item.find('=');
                if (eq == std::string::npos) fail("malformed variable declaration '" + item + "'");
                const std::string name = item.substr(0, eq);
                std::size_t used = 0;
                unsigned long c = 0;
                try {
                    c = std::stoul(item.substr(eq + 1), &used);
                } catch (const std::exception&) {
                    fail("malformed cardinality in '" + item + "'");
                }
                if (used != item.size() - eq - 1 || c == 0 || c > 256) fail("cardinality must be in 1..256");
                if (cards.count(name)) fail("duplicate variable '" + name + "'");
                cards[name] = c;
                order.push_back(name);
            }
            if (order.size() != 3 || !cards.count("X1") || !cards.count("X2") || !cards.count("X3"))
                fail("header must declare exactly X1, X2, X3");
            table.assign(cards["X1"] * cards["X2"] * cards["X3"], 0.0);
            seen.assign(table.size(), false);
            header = true;
            continue;
        }
        std::map<std::string, std::size_t> idx;
        std::string tok = first;
        for (std::size_t k = 0; k < 3; ++k) {
            if (k > 0 && !(ls >> tok)) fail("expected three indices and a probability");
            std::size_t used = 0;
            unsigned long v = 0;
            try {
                v = std::stoul(tok, &used);
            } catch (const std::exception&) {
                fail("malformed index '" + tok + "'");
            }
            if (used != tok.size()) fail("malformed index '" + tok + "'");
            if (v >= cards[order[k]]) fail("index " + tok + " out of range for " + order[k]);
            idx[order[k]] = v;
        }
        std::string ptok;
        if (!(ls >> ptok)) fail("missing probability");
        double p = 0.0;
        std::size_t used = 0;
        try {
            p = std::stod(ptok, &used);
        } catch (const std::exception&) {
            fail("malformed probability '" + ptok + "'");
        }
        if (used != ptok.size() || !(p >= 0.0) || !std::isfinite(p)) fail("malformed probability '" + ptok + "'");
        std::string extra;
        if (ls >> extra) fail("unexpected trailing token '" + extra + "'");
        const std::size_t cell = (idx["X1"] * cards["X2"] + idx["X2"]) * cards["X3"] + idx["X3"];
        if (seen[cell]) fail("cell listed twice");
        seen[cell] = true;
        table[cell] = p;
    }
    if (!header) throw ParseError("empty distribution file");
    double total = 0.0;
    for (double p : table) total += p;
    if (std::abs(total - 1.0) > kNormalizationTol)
        throw ParseError("probabilities sum to " + std::to_string(total) + ", not 1");
    return JointPmf({{"X1", cards["X1"]}, {"X2", cards["X2"]}, {"X3", cards["X3"]}}, std::move(table));
}

inline JointPmf parse_distribution(const std::string& text) {
    std::istringstream in(text);
    return parse_distribution(in);
}

inline std::string format_distribution(const JointPmf& base) {
    detail::check_base(base);
    const JointPmf p = marginalize(base, {"X1", "X2", "X3"});
    const auto& v = p.variables();
    std::ostringstream os;
    os << "vars: X1=" << v[0].cardinality << " X2=" << v[1].cardinality << " X3=" << v[2].cardinality << '\n';
    os << std::setprecision(17);
    for (std::size_t a = 0; a < v[0].cardinality; ++a)
        for (std::size_t b = 0; b < v[1].cardinality; ++b)
            for (std::size_t c = 0; c < v[2].cardinality; ++c) {
                const double q = p.at({a, b, c});
                if (q > 0.0) os << a << ' ' << b << ' ' << c << ' ' << q << '\n';
            }
    return os.str();
}

inline std::string frontier_csv(const Frontier& f) {
    std::string out = "R1,R2\n";
    for (const auto& v : f.vertices) out += format_rate(v.r1) + "," + format_rate(v.r2) + "\n";
    return out;
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const RateConstraintSet& s) {
    return json{{"r1_max", s.r1_max}, {"r2_max", s.r2_max}, {"sum_max", number_or_null(s.sum_max)}};
}

inline json to_json(const Frontier& f) {
    json v = json::array();
    for (const auto& p : f.vertices) v.push_back({p.r1, p.r2});
    return v;
}

inline json channel_json(const Channel& ch, std::uint32_t q) {
    json to = json::array();
    for (const auto& t : ch.to) to.push_back({{"name", t.name}, {"card", t.cardinality}});
    json num = json::array();
    for (double m : ch.matrix) num.push_back(static_cast<long long>(std::llround(m * q)));
    return {{"from", ch.from}, {"to", to}, {"numerators", num}, {"q", q}};
}

// Channels from JSON: [{"from": [...], "to": [{"name":..,"card":..}], "matrix": [...]}].
inline std::vector<Channel> channels_from_json(const json& j) {
    if (!j.is_array()) throw ParseError("channel list must be a JSON array");
    std::vector<Channel> out;
    for (const auto& c : j) {
        Channel ch;
        try {
            ch.from = c.at("from").get<std::vector<std::string>>();
            for (const auto& t : c.at("to")) ch.to.push_back({t.at("name").get<std::string>(), t.at("card").get<std::size_t>()});
            ch.matrix = c.at("matrix").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed channel: ") + e.what());
        }
        out.push_back(std::move(ch));
    }
    return out;
}

inline json to_json(const BinningParams& b) {
    return {{"rate", b.rate},         {"public_rate", b.public_rate}, {"residual_rate", b.residual_rate},
            {"keys", b.keys},         {"columns", b.columns},         {"residuals", b.residuals},
            {"typical", b.typical}};
}

inline json prob_or_null(double v) { return v < 0.0 ? json(nullptr) : json(v); }

inline json to_json(const SimReport& r) {
    json seeds = json::array();
    for (const auto& s : r.per_seed) {
        seeds.push_back({{"seed", s.seed},
                         {"err_K", prob_or_null(s.err[0])},
                         {"err_L", prob_or_null(s.err[1])},
                         {"leak_K", s.leak[0]},
                         {"leak_L", s.leak[1]},
                         {"leak_K_se", s.leak_se[0]},
                         {"leak_L_se", s.leak_se[1]},
                         {"uniformity_gap_K", s.gap[0]},
                         {"uniformity_gap_L", s.gap[1]},
                         {"key_entropy_K", s.key_entropy[0]},
                         {"key_entropy_L", s.key_entropy[1]},
                         {"encoder_failure_K", s.encoder_failure[0]},
                         {"encoder_failure_L", s.encoder_failure[1]},
                         {"wiretap_success_K", prob_or_null(s.wiretap_success[0])},
                         {"wiretap_success_L", prob_or_null(s.wiretap_success[1])}});
    }
    return {{"schema", 1},
            {"direction", to_string(r.direction)},
            {"mode", r.mode == SimMode::exact ? "exact" : "mc"},
            {"n", r.n},
            {"trials", r.trials},
            {"rate1", r.rate[0]},
            {"rate2", r.rate[1]},
            {"bound", to_json(r.bound)},
            {"bins_K", to_json(r.bins[0])},
            {"bins_L", to_json(r.bins[1])},
            {"err_K", prob_or_null(r.err[0])},
            {"err_L", prob_or_null(r.err[1])},
            {"err_computed", r.err_computed},
            {"leak_K", r.leak[0]},
            {"leak_L", r.leak[1]},
            {"leak_K_se", r.leak_se[0]},
            {"leak_L_se", r.leak_se[1]},
            {"uniformity_gap_K", r.gap[0]},
            {"uniformity_gap_L", r.gap[1]},
            {"key_entropy_K", r.key_entropy[0]},
            {"key_entropy_L", r.key_entropy[1]},
            {"wiretap_success_K", prob_or_null(r.wiretap_success[0])},
            {"wiretap_success_L", prob_or_null(r.wiretap_success[1])},
            {"m2_residual", r.m2_residual},
            {"per_seed", seeds},
            {"warnings", r.warnings}};
}

// Collects output files and publishes them only once everything succeeded:
// each file goes to a temporary name first and is renamed into place.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

    void commit() const {
        std::filesystem::create_directories(dir_);
        std::vector<std::filesystem::path> temps;
        for (const auto& [name, content] : files_) {
            const auto tmp = dir_ / (name + ".tmp");
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            os << content;
            os.close();
            if (!os) {
                for (const auto& t : temps) std::filesystem::remove(t);
                std::filesystem::remove(tmp);
                throw Error("cannot write " + tmp.string());
            }
            temps.push_back(tmp);
        }
        for (std::size_t i = 0; i < files_.size(); ++i) std::filesystem::rename(temps[i], dir_ / files_[i].first);
    }

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

}  // namespace skr

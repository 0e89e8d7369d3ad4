#pragma once

// Subcommands of the skregion tool, callable in-process so tests can drive them.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skr/cases.hpp"
#include "skr/codec.hpp"
#include "skr/error.hpp"
#include "skr/io.hpp"
#include "skr/presets.hpp"
#include "skr/random.hpp"
#include "skr/region.hpp"
#include "skr/sim.hpp"

namespace skr::cli {

inline constexpr const char* kToolName = "skregion";
inline constexpr const char* kToolVersion = "1.0.0";

enum Exit : int {
    ok = 0,
    usage = 1,
    malformed = 2,
    budget = 3,
    infeasible = 4,
    verify_failed = 5,
    lemma_violation = 6,
};

struct Input {
    JointPmf base;
    std::string digest;
};

inline Input load_distribution(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open distribution file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    return {parse_distribution(text), "fnv1a64:" + hex64(fnv1a64(text))};
}

// "S=3,T=3,U=2" style key=value lists.
inline std::map<std::string, std::string> parse_assignments(const std::string& spec) {
    std::map<std::string, std::string> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw ParseError("expected NAME=VALUE, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

inline GridSpec parse_cards(const std::string& spec, std::uint32_t q) {
    GridSpec g;
    g.q = q;
    for (const auto& [k, v] : parse_assignments(spec)) {
        std::size_t c = 0;
        try {
            c = std::stoul(v);
        } catch (const std::exception&) {
            throw ParseError("bad cardinality '" + v + "'");
        }
        if (c == 0) throw ParseError("cardinalities must be >= 1");
        if (k == "S") g.card_s = c;
        else if (k == "T") g.card_t = c;
        else if (k == "U") g.card_u = c;
        else if (k == "V") g.card_v = c;
        else throw ParseError("unknown auxiliary '" + k + "' in --cards");
    }
    return g;
}

inline std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError("bad seed '" + item + "'");
        }
    }
    if (out.empty()) throw ParseError("no seeds given");
    return out;
}

// Auxiliaries as copies or constants, e.g. "S=X1,T=X2,U=const,V=T" (forward)
// or "S=X3,T=const,U=const" (backward).
inline std::vector<Channel> aux_from_spec(const JointPmf& base, Direction dir, const std::string& spec) {
    auto a = parse_assignments(spec);
    auto get = [&](const char* k, const char* def) { return a.count(k) ? a[k] : std::string(def); };
    for (const auto& [k, v] : a)
        if (k != "S" && k != "T" && k != "U" && !(k == "V" && dir == Direction::forward))
            throw ParseError("unknown auxiliary '" + k + "' in --aux");
    if (dir == Direction::forward) {
        const std::string s = get("S", "X1"), t = get("T", "X2"), u = get("U", "const"), v = get("V", "const");
        auto check = [](const std::string& val, const char* parent, const char* var) {
            if (val != parent && val != "const")
                throw ParseError(std::string(var) + " must be " + parent + " or const, got '" + val + "'");
        };
        check(s, "X1", "S");
        check(t, "X2", "T");
        check(u, "S", "U");
        check(v, "T", "V");
        return forward_channels(base, s == "X1", t == "X2", u == "S", v == "T");
    }
    const std::string s = get("S", "X3"), t = get("T", "const"), u = get("U", "const");
    if ((s != "X3" && s != "const") || (t != "X3" && t != "const"))
        throw ParseError("backward S and T must be X3 or const");
    if (u != "S" && u != "T" && u != "const") throw ParseError("backward U must be S, T or const");
    return backward_channels(base, s == "X3", t == "X3", u == "S" ? UCopy::s : u == "T" ? UCopy::t : UCopy::none);
}

inline json manifest(const std::string& sub, json flags, const std::vector<std::uint64_t>& seeds,
                     const std::string& digest) {
    return {{"schema", 1},   {"tool", kToolName},     {"version", kToolVersion}, {"subcommand", sub},
            {"flags", flags}, {"seeds", seeds},        {"input_digest", digest}};
}

inline Direction parse_direction(const std::string& s) {
    if (s == "forward") return Direction::forward;
    if (s == "backward") return Direction::backward;
    throw ParseError("direction must be forward or backward");
}

// ---- region ----

struct RegionArgs {
    std::string dist, direction = "forward", bound = "inner", cards, out = ".";
    std::uint32_t q = 1;
    bool hull = false;
    unsigned threads = 0;
};

inline json region_json(const RateRegion& r, const JointPmf& base, const RegionArgs& a, const GridSpec& g,
                        bool grid) {
    json points = json::array();
    std::optional<LatticeProduct> lattice;
    if (grid) lattice.emplace(grid_lattice(base, r.family, g));
    for (const auto& p : r.points) {
        json pj = to_json(p.rates);
        if (p.grid_index >= 0) {
            pj["index"] = p.grid_index;
            json chs = json::array();
            for (const auto& ch : lattice->channels(static_cast<std::uint64_t>(p.grid_index)))
                chs.push_back(channel_json(ch, g.q));
            pj["channels"] = chs;
        }
        points.push_back(pj);
    }
    json j{{"schema", 1}, {"direction", a.direction}, {"bound", a.bound}};
    if (grid) {
        const GridSpec rg = resolve_grid(base, r.family, g);
        j["family"] = to_string(r.family);
        j["grid"] = {{"q", rg.q}, {"S", rg.card_s}, {"T", rg.card_t}, {"U", rg.card_u}};
        if (is_forward(r.family)) j["grid"]["V"] = rg.card_v;
        j["rejected"] = r.rejected;
    }
    j["point_count"] = r.points.size();
    j["frontier"] = to_json(r.frontier);
    j["points"] = points;
    return j;
}

inline int cmd_region(const RegionArgs& a, std::ostream& out) {
    const auto in = load_distribution(a.dist);
    const Direction dir = parse_direction(a.direction);
    const GridSpec g = parse_cards(a.cards, a.q);
    RateRegion r;
    bool grid = true;
    if (a.bound == "explicit") {
        r = region_from_sets(dir == Direction::forward ? Family::forward_outer : Family::backward_outer,
                             {explicit_outer(in.base)});
        grid = false;
    } else if (a.bound == "inner" || a.bound == "outer") {
        const bool inner = a.bound == "inner";
        const Family f = dir == Direction::forward ? (inner ? Family::forward_inner : Family::forward_outer)
                                                   : (inner ? Family::backward_inner : Family::backward_outer);
        r = enumerate_region(in.base, f, g, {a.threads, {}});
    } else {
        throw ParseError("bound must be inner, outer or explicit");
    }
    OutputSet files(a.out);
    files.add("frontier.csv", frontier_csv(r.frontier));
    if (a.hull) files.add("frontier_hull.csv", frontier_csv(concave_hull(r.frontier)));
    files.add("region.json", dump_json(region_json(r, in.base, a, g, grid)));
    json flags{{"dist", a.dist},   {"direction", a.direction}, {"bound", a.bound},
               {"grid_q", a.q},    {"cards", a.cards},         {"hull", a.hull}};
    files.add("manifest.json", dump_json(manifest("region", flags, {}, in.digest)));
    files.commit();
    out << "frontier vertices=" << r.frontier.vertices.size() << " points=" << r.points.size() << '\n';
    return ok;
}

// ---- simulate ----

struct SimulateArgs {
    std::string dist, preset, aux, aux_file, direction, mode = "mc", seeds = "1", out = ".";
    std::size_t n = 8;
    std::optional<double> rate1, rate2, public_rate1, public_rate2;
    double margin = 0.5;
    std::uint64_t trials = 1000;
    EpsParams eps;
    bool no_exact_error = false, dump_codebook = false;
    unsigned threads = 0;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    SimConfig cfg;
    std::string digest;
    if (!a.preset.empty() && !a.dist.empty()) throw ParseError("--dist and --preset are exclusive");
    if (!a.preset.empty()) {
        auto p = make_preset(a.preset);
        cfg.base = p.base;
        cfg.channels = p.channels;
        cfg.direction = a.direction.empty() ? p.direction : parse_direction(a.direction);
        if (cfg.direction != p.direction && a.aux.empty() && a.aux_file.empty())
            throw ParseError("preset '" + a.preset + "' is defined for the " + to_string(p.direction) +
                             " direction; give --aux for the other one");
        digest = "fnv1a64:" + hex64(fnv1a64(format_distribution(p.base)));
    } else if (!a.dist.empty()) {
        auto in = load_distribution(a.dist);
        cfg.base = in.base;
        digest = in.digest;
        cfg.direction = parse_direction(a.direction.empty() ? "forward" : a.direction);
        cfg.channels = aux_from_spec(cfg.base, cfg.direction, "");
    } else {
        throw ParseError("one of --dist or --preset is required");
    }
    if (!a.aux.empty()) cfg.channels = aux_from_spec(cfg.base, cfg.direction, a.aux);
    if (!a.aux_file.empty()) {
        std::ifstream in(a.aux_file);
        if (!in) throw ParseError("cannot open aux file '" + a.aux_file + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ParseError(std::string("aux file: ") + e.what());
        }
        cfg.channels = channels_from_json(j);
    }
    cfg.n = a.n;
    cfg.rate1 = a.rate1;
    cfg.rate2 = a.rate2;
    cfg.public_rates = {a.public_rate1, a.public_rate2};
    cfg.margin = a.margin;
    cfg.trials = a.trials;
    cfg.eps = a.eps;
    cfg.seeds = parse_seeds(a.seeds);
    if (a.mode == "mc") cfg.mode = SimMode::monte_carlo;
    else if (a.mode == "exact") cfg.mode = SimMode::exact;
    else throw ParseError("mode must be mc or exact");
    cfg.exact_error = !a.no_exact_error;
    cfg.threads = a.threads;

    const auto start = std::chrono::steady_clock::now();
    const SimReport rep = run_simulation(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    OutputSet files(a.out);
    files.add("report.json", dump_json(to_json(rep)));
    if (a.dump_codebook) {
        const JointPmf full = sim_joint(cfg);
        std::ostringstream k, l;
        if (cfg.direction == Direction::forward) {
            const ForwardScheme sch(full, cfg.n, rep.rate[0], rep.rate[1], cfg.eps, cfg.seeds.front(), cfg.party_tags,
                                    cfg.public_rates);
            sch.user(0).key.book.dump(k);
            sch.user(1).key.book.dump(l);
        } else {
            const BackwardScheme sch(full, cfg.n, rep.rate[0], rep.rate[1], cfg.eps, cfg.seeds.front(), cfg.party_tags,
                                    cfg.public_rates);
            sch.book(0).dump(k);
            sch.book(1).dump(l);
        }
        files.add("codebook_K.txt", k.str());
        files.add("codebook_L.txt", l.str());
    }
    json flags{{"dist", a.dist},
               {"preset", a.preset},
               {"aux", a.aux},
               {"aux_file", a.aux_file},
               {"direction", to_string(cfg.direction)},
               {"n", a.n},
               {"rate1", a.rate1 ? json(*a.rate1) : json(nullptr)},
               {"rate2", a.rate2 ? json(*a.rate2) : json(nullptr)},
               {"public_rate1", a.public_rate1 ? json(*a.public_rate1) : json(nullptr)},
               {"public_rate2", a.public_rate2 ? json(*a.public_rate2) : json(nullptr)},
               {"margin", a.margin},
               {"trials", a.trials},
               {"mode", a.mode},
               {"eps0", a.eps.eps0},
               {"eps1", a.eps.eps1},
               {"eps2", a.eps.eps2},
               {"exact_error", !a.no_exact_error},
               {"dump_codebook", a.dump_codebook}};
    files.add("manifest.json", dump_json(manifest("simulate", flags, cfg.seeds, digest)));
    files.commit();

    for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
    err << "wall_clock_seconds=" << secs << '\n';
    auto fmt = [](double v) { return v < 0 ? std::string("n/a") : format_rate(v); };
    out << "err_K=" << fmt(rep.err[0]) << " err_L=" << fmt(rep.err[1]) << " leak_K=" << format_rate(rep.leak[0])
        << " leak_L=" << format_rate(rep.leak[1]) << '\n';
    return ok;
}

// ---- verify ----

struct VerifyArgs {
    std::string dist, cards, out = ".";
    double tol = 1e-9, slack = 0.0;
    std::uint32_t q = 1;
    unsigned threads = 0;
};

struct VerifyOutcome {
    json doc;
    bool pass = true;
};

inline json coincidence_json(const Coincidence& c) {
    return {{"pass", c.pass}, {"gap", c.gap}, {"worst_probe", {c.worst.r1, c.worst.r2}}};
}

// Every inner frontier vertex must lie in the outer region (within tol).
inline double containment_excess(const RateRegion& inner, const RateConstraintSet& outer) {
    double worst = 0.0;
    for (const auto& v : inner.frontier.vertices) worst = std::max(worst, linf_distance(outer, v));
    return worst;
}

inline VerifyOutcome run_verify(const JointPmf& base, const VerifyArgs& a) {
    VerifyOutcome o;
    const double allowed = a.tol + a.slack;
    const auto d = diagnose(base, a.tol);
    const GridSpec g = parse_cards(a.cards, a.q);
    o.doc["schema"] = 1;
    o.doc["residuals"] = {{"X1-X2-X3", d.x1_x2_x3}, {"X2-X1-X3", d.x2_x1_x3}, {"X1-X3-X2", d.x1_x3_x2}};
    o.doc["chains"] = {{"X1-X2-X3", d.chain_x1_x2_x3}, {"X2-X1-X3", d.chain_x2_x1_x3}, {"X1-X3-X2", d.chain_x1_x3_x2}};
    o.doc["tol"] = a.tol;
    o.doc["grid_slack"] = a.slack;
    o.doc["grid_q"] = a.q;
    json cases = json::array();
    const auto outer = explicit_outer(base);
    const RateRegion outer_region = region_from_sets(Family::forward_outer, {outer});
    std::optional<RateRegion> fwd, bwd;
    auto forward = [&]() -> const RateRegion& {
        if (!fwd) fwd = enumerate_region(base, Family::forward_inner, g, {a.threads, {}});
        return *fwd;
    };
    auto backward = [&]() -> const RateRegion& {
        if (!bwd) bwd = enumerate_region(base, Family::backward_inner, g, {a.threads, {}});
        return *bwd;
    };
    auto sandwich = [&](const char* name, const RateRegion& closed, std::vector<std::pair<const char*, const RateRegion*>> inners) {
        json c{{"case", name}};
        bool pass = true;
        // The closed form must match the explicit outer bound, and every
        // enumerated inner region must reach it without leaving it.
        const auto outer_vs_closed = verify_coincidence(closed, outer_region, allowed);
        c["closed_form_frontier"] = to_json(closed.frontier);
        c["outer_vs_closed_form"] = coincidence_json(outer_vs_closed);
        pass = pass && outer_vs_closed.pass;
        for (const auto& [label, inner] : inners) {
            const auto co = verify_coincidence(*inner, closed, allowed);
            const double excess = containment_excess(*inner, closed.points.front().rates);
            c[label] = coincidence_json(co);
            c[label]["containment_excess"] = excess;
            pass = pass && co.pass && excess <= allowed;
        }
        c["pass"] = pass;
        o.pass = o.pass && pass;
        cases.push_back(c);
    };
    if (d.chain_x1_x2_x3) {
        const auto c1 = case1_region(base, a.tol);
        sandwich("case1", c1, {{"forward_inner", &forward()}, {"backward_inner", &backward()}});
    }
    if (d.chain_x2_x1_x3) {
        const auto c1 = case1_mirror_region(base, a.tol);
        sandwich("case1-mirror", c1, {{"forward_inner", &forward()}, {"backward_inner", &backward()}});
    }
    if (d.chain_x1_x3_x2) {
        const auto c2 = case2_region(base, a.tol);
        sandwich("case2", c2, {{"forward_inner", &forward()}});
        const auto c3 = case3_region(base, g, a.tol, a.threads);
        json c{{"case", "case3"},
               {"label", "lower bound of the case-3 region (grid search)"},
               {"accepted_points", c3.region.points.size()},
               {"rejected_points", c3.rejected},
               {"assertion_rejections", c3.asserted},
               {"frontier", to_json(c3.region.frontier)},
               {"max_pointwise_inner_outer_gap", c3.max_pointwise_gap}};
        const auto co = verify_coincidence(c3.inner, c3.outer, allowed);
        c["inner_vs_outer"] = coincidence_json(co);
        const bool pass = c3.max_pointwise_gap <= allowed && co.pass;
        c["pass"] = pass;
        o.pass = o.pass && pass;
        cases.push_back(c);
    }
    o.doc["cases"] = cases;
    if (cases.empty()) o.doc["note"] = "no special case applies";
    o.doc["pass"] = o.pass;
    return o;
}

inline int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    const auto in = load_distribution(a.dist);
    const auto o = run_verify(in.base, a);
    OutputSet files(a.out);
    files.add("verify.json", dump_json(o.doc));
    json flags{{"dist", a.dist}, {"tol", a.tol}, {"grid_q", a.q}, {"grid_slack", a.slack}, {"cards", a.cards}};
    files.add("manifest.json", dump_json(manifest("verify", flags, {}, in.digest)));
    files.commit();
    if (o.doc["cases"].empty()) out << "no special case applies\n";
    for (const auto& c : o.doc["cases"]) out << c["case"].get<std::string>() << ": " << (c["pass"].get<bool>() ? "pass" : "FAIL") << '\n';
    return o.pass ? ok : verify_failed;
}

// ---- lemmas ----

struct LemmasArgs {
    std::uint64_t draws = 1000, seed = 1;
    std::size_t n = 2;
    std::string out = ".";
    unsigned threads = 0;
};

struct LemmaStats {
    std::uint64_t draws = 0, violations = 0;
    double min_slack = 0.0, mean_slack = 0.0;
};

// Random joints over K, F1, F2, X2^n, X3^n with binary or ternary alphabets.
inline LemmaStats lemma_fuzz(std::uint64_t draws, std::uint64_t seed, std::size_t n, unsigned threads) {
    if (n < 1 || n > 3) throw InvalidArgument("lemma fuzzing supports n in 1..3");
    std::vector<double> slack(draws);
    parallel_for(draws, threads, [&](std::size_t d) {
        Rng rng(seed, Stream::fuzz, d);
        auto card = [&] { return static_cast<std::size_t>(2 + rng.below(2)); };
        const std::size_t ck = card(), cf1 = card(), cf2 = card(), cx2 = card(), cx3 = card();
        slack[d] = lemma3_check(random_pmf(lemma3_variables(n, ck, cf1, cf2, cx2, cx3), rng), n).slack;
    });
    LemmaStats s;
    s.draws = draws;
    if (draws == 0) return s;
    s.min_slack = slack.front();
    double total = 0.0;
    for (double v : slack) {
        s.min_slack = std::min(s.min_slack, v);
        total += v;
        s.violations += v < -1e-10;
    }
    s.mean_slack = total / static_cast<double>(draws);
    return s;
}

inline int cmd_lemmas(const LemmasArgs& a, std::ostream& out) {
    const auto s = lemma_fuzz(a.draws, a.seed, a.n, a.threads);
    json doc{{"schema", 1},
             {"draws", s.draws},
             {"n", a.n},
             {"seed", a.seed},
             {"min_slack", s.draws ? json(s.min_slack) : json(nullptr)},
             {"mean_slack", s.draws ? json(s.mean_slack) : json(nullptr)},
             {"violations", s.violations}};
    OutputSet files(a.out);
    files.add("lemmas.json", dump_json(doc));
    files.add("manifest.json", dump_json(manifest("lemmas", {{"draws", a.draws}, {"n", a.n}}, {a.seed}, "none")));
    files.commit();
    out << "draws=" << s.draws << " violations=" << s.violations << " min_slack=" << s.min_slack << '\n';
    return s.violations ? lemma_violation : ok;
}

// ---- entry point ----

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Secret-key rate regions and binning-protocol simulation for three-user source models"};
    app.name(kToolName);
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    RegionArgs ra;
    auto* region = app.add_subcommand("region", "Enumerate an inner or outer bound and write its frontier");
    region->add_option("--dist", ra.dist, "Distribution file")->required();
    region->add_option("--direction", ra.direction, "forward or backward")->check(CLI::IsMember({"forward", "backward"}));
    region->add_option("--bound", ra.bound, "inner, outer or explicit")->check(CLI::IsMember({"inner", "outer", "explicit"}));
    region->add_option("--grid-q", ra.q, "Channel entries are multiples of 1/q")->check(CLI::PositiveNumber);
    region->add_option("--cards", ra.cards, "Auxiliary alphabet sizes, e.g. S=3,T=3,U=2,V=2");
    region->add_flag("--hull", ra.hull, "Also write the concave hull (time sharing)");
    region->add_option("--out", ra.out, "Output directory");
    region->add_option("--threads", ra.threads, "Worker threads (0 = auto)");

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "Run the binning protocol");
    sim->add_option("--dist", sa.dist, "Distribution file");
    sim->add_option("--preset", sa.preset, "Named setup")->check(CLI::IsMember(preset_names()));
    sim->add_option("--aux", sa.aux, "Auxiliaries as copies or constants, e.g. S=X1,T=X2,U=const,V=const");
    sim->add_option("--aux-file", sa.aux_file, "Auxiliary channels as JSON");
    sim->add_option("--direction", sa.direction, "forward or backward")->check(CLI::IsMember({"forward", "backward"}));
    sim->add_option("--n", sa.n, "Blocklength")->check(CLI::PositiveNumber);
    sim->add_option("--rate1", sa.rate1, "Key rate of user 1 (default: scaled bound)");
    sim->add_option("--rate2", sa.rate2, "Key rate of user 2 (default: scaled bound)");
    sim->add_option("--public-rate1", sa.public_rate1, "Public message rate of user 1 (default: split of the source entropy)");
    sim->add_option("--public-rate2", sa.public_rate2, "Public message rate of user 2");
    sim->add_option("--margin", sa.margin, "Default rates are (1 - margin) x the bound corner");
    sim->add_option("--trials", sa.trials, "Monte Carlo trials per seed");
    sim->add_option("--seeds", sa.seeds, "Comma-separated codebook seeds");
    sim->add_option("--mode", sa.mode, "mc or exact")->check(CLI::IsMember({"mc", "exact"}));
    sim->add_option("--eps0", sa.eps.eps0, "Decoding typicality tolerance");
    sim->add_option("--eps1", sa.eps.eps1, "Codebook and encoding typicality tolerance");
    sim->add_option("--eps2", sa.eps.eps2, "Auxiliary codebook rate slack");
    sim->add_flag("--no-exact-error", sa.no_exact_error, "Exact mode: skip the error enumeration over X3 blocks");
    sim->add_flag("--dump-codebook", sa.dump_codebook, "Write the first seed's codebooks");
    sim->add_option("--out", sa.out, "Output directory");
    sim->add_option("--threads", sa.threads, "Worker threads (0 = auto)");

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "Check special-case coincidence of inner and outer bounds");
    ver->add_option("--dist", va.dist, "Distribution file")->required();
    ver->add_option("--tol", va.tol, "Tolerance for chains and gaps");
    ver->add_option("--grid-q", va.q, "Channel entries are multiples of 1/q")->check(CLI::PositiveNumber);
    ver->add_option("--grid-slack", va.slack, "Extra gap allowed for grid coarseness");
    ver->add_option("--cards", va.cards, "Auxiliary alphabet sizes");
    ver->add_option("--out", va.out, "Output directory");
    ver->add_option("--threads", va.threads, "Worker threads (0 = auto)");

    LemmasArgs la;
    auto* lem = app.add_subcommand("lemmas", "Fuzz the single-letterization inequality");
    lem->add_option("--draws", la.draws, "Number of random joints");
    lem->add_option("--seed", la.seed, "Seed");
    lem->add_option("--n", la.n, "Blocklength 1, 2 or 3")->check(CLI::Range(1, 3));
    lem->add_option("--out", la.out, "Output directory");
    lem->add_option("--threads", la.threads, "Worker threads (0 = auto)");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << '\n';
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
    try {
        if (*region) return cmd_region(ra, out);
        if (*sim) return cmd_simulate(sa, out, err);
        if (*ver) return cmd_verify(va, out);
        if (*lem) return cmd_lemmas(la, out);
    } catch (const CapacityError& e) {
        err << "error: " << e.what() << '\n';
        return budget;
    } catch (const InfeasibleRates& e) {
        err << "error: infeasible rates: " << e.what() << '\n';
        return infeasible;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return malformed;
    } catch (const FactorizationError& e) {
        err << "error: " << e.what() << '\n';
        return malformed;
    } catch (const ChainViolated& e) {
        err << "error: " << e.what() << '\n';
        return malformed;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return malformed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
    return usage;
}

}  // namespace skr::cli

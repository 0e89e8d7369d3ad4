#pragma once

// Dense joint distributions over named finite-alphabet variables and the
// information measures computed from them. All logarithms are base 2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "skr/error.hpp"

namespace skr {

inline constexpr std::size_t kDefaultEntryBudget = std::size_t{1} << 26;
inline constexpr double kNormalizationTol = 1e-9;
inline constexpr double kClampTol = 1e-12;

// Maximum number of dense entries any table or enumeration may hold.
// SKREGION_BUDGET overrides the default.
inline std::size_t entry_budget() {
    if (const char* env = std::getenv("SKREGION_BUDGET")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return kDefaultEntryBudget;
}

struct VariableId {
    std::string name;
    std::size_t cardinality = 1;

    friend bool operator==(const VariableId&, const VariableId&) = default;
};

using VariableSet = std::vector<std::string>;
using AxisMask = std::uint64_t;

class JointPmf {
public:
    JointPmf(std::vector<VariableId> variables, std::vector<double> table)
        : vars_(std::move(variables)), table_(std::move(table)) {
        if (vars_.size() > 63) throw InvalidArgument("at most 63 variables per joint");
        double size = 1.0;
        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i].cardinality == 0)
                throw InvalidArgument("variable '" + vars_[i].name + "' has empty alphabet");
            for (std::size_t j = 0; j < i; ++j)
                if (vars_[j].name == vars_[i].name)
                    throw InvalidArgument("duplicate variable '" + vars_[i].name + "'");
            size *= static_cast<double>(vars_[i].cardinality);
        }
        if (size != static_cast<double>(table_.size()))
            throw DimensionMismatch("table has " + std::to_string(table_.size()) + " entries, alphabet product is " +
                                    std::to_string(static_cast<unsigned long long>(size)));
        double total = 0.0;
        for (double p : table_) {
            if (!(p >= 0.0)) throw InvalidArgument("negative or NaN probability");
            total += p;
        }
        if (std::abs(total - 1.0) > kNormalizationTol)
            throw InvalidArgument("probabilities sum to " + std::to_string(total));
        strides_.assign(vars_.size(), 1);
        for (std::size_t i = vars_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * vars_[i].cardinality;
    }

    static JointPmf uniform(std::vector<VariableId> variables) {
        std::size_t n = 1;
        for (const auto& v : variables) n *= v.cardinality;
        return JointPmf(std::move(variables), std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    const std::vector<VariableId>& variables() const noexcept { return vars_; }
    std::span<const double> table() const noexcept { return table_; }
    std::size_t size() const noexcept { return table_.size(); }
    std::size_t rank() const noexcept { return vars_.size(); }
    const std::vector<std::size_t>& strides() const noexcept { return strides_; }

    bool contains(std::string_view name) const noexcept {
        return std::any_of(vars_.begin(), vars_.end(), [&](const VariableId& v) { return v.name == name; });
    }

    std::size_t axis(std::string_view name) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i].name == name) return i;
        throw UnknownVariable(std::string(name));
    }

    std::size_t cardinality(std::string_view name) const { return vars_[axis(name)].cardinality; }

    AxisMask mask(const VariableSet& set) const {
        AxisMask m = 0;
        for (const auto& name : set) m |= AxisMask{1} << axis(name);
        return m;
    }

    std::size_t flat_index(std::span<const std::size_t> digits) const {
        if (digits.size() != vars_.size()) throw DimensionMismatch("index rank mismatch");
        std::size_t f = 0;
        for (std::size_t i = 0; i < digits.size(); ++i) {
            if (digits[i] >= vars_[i].cardinality) throw DimensionMismatch("index out of range");
            f += digits[i] * strides_[i];
        }
        return f;
    }

    double at(std::initializer_list<std::size_t> digits) const {
        return table_[flat_index(std::span<const std::size_t>(digits.begin(), digits.size()))];
    }

    // Marginal table over the axes in `axes`, laid out in that order.
    std::vector<double> marginal_table(std::span<const std::size_t> axes) const {
        const std::size_t r = vars_.size();
        std::vector<std::size_t> out_mult(r, 0);
        std::size_t out_size = 1;
        for (std::size_t k = axes.size(); k-- > 0;) {
            if (axes[k] >= r) throw DimensionMismatch("axis out of range");
            if (out_mult[axes[k]] != 0) throw InvalidArgument("repeated axis in marginal");
            out_mult[axes[k]] = out_size;
            out_size *= vars_[axes[k]].cardinality;
        }
        std::vector<double> out(out_size, 0.0);
        if (r == 0) {
            out[0] = table_[0];
            return out;
        }
        std::vector<std::size_t> digit(r, 0);
        std::size_t t = 0;
        for (std::size_t f = 0; f < table_.size(); ++f) {
            out[t] += table_[f];
            for (std::size_t a = r; a-- > 0;) {
                if (++digit[a] < vars_[a].cardinality) {
                    t += out_mult[a];
                    break;
                }
                t -= out_mult[a] * (vars_[a].cardinality - 1);
                digit[a] = 0;
            }
        }
        return out;
    }

    std::vector<double> marginal_table(AxisMask m) const { return marginal_table(axes_of(m)); }

    std::vector<std::size_t> axes_of(AxisMask m) const {
        std::vector<std::size_t> axes;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (m >> i & 1U) axes.push_back(i);
        return axes;
    }

    double entropy(AxisMask m) const {
        if (m == 0) return 0.0;
        return table_entropy(marginal_table(m));
    }

    static double table_entropy(std::span<const double> t) {
        double h = 0.0;
        for (double p : t)
            if (p > 0.0) h -= p * std::log2(p);
        // A point mass summing to 1 + ulp would come out slightly negative.
        return h > 0.0 ? h : 0.0;
    }

private:
    std::vector<VariableId> vars_;
    std::vector<double> table_;
    std::vector<std::size_t> strides_;
};

// p(to | from) as a row-stochastic matrix; rows enumerate `from` assignments
// and columns enumerate `to` assignments, both row-major in listed order.
struct Channel {
    VariableSet from;
    std::vector<VariableId> to;
    std::vector<double> matrix;

    std::size_t columns() const {
        std::size_t c = 1;
        for (const auto& v : to) c *= v.cardinality;
        return c;
    }
};

// Deterministic channel given by a symbol map from a single input variable.
inline Channel deterministic_channel(std::string from, std::size_t from_card, VariableId to,
                                     const std::vector<std::size_t>& map) {
    if (map.size() != from_card) throw DimensionMismatch("map length differs from input alphabet");
    Channel ch{{std::move(from)}, {to}, std::vector<double>(from_card * to.cardinality, 0.0)};
    for (std::size_t x = 0; x < from_card; ++x) {
        if (map[x] >= to.cardinality) throw DimensionMismatch("map target out of range");
        ch.matrix[x * to.cardinality + map[x]] = 1.0;
    }
    return ch;
}

inline Channel identity_channel(std::string from, std::size_t card, std::string to) {
    std::vector<std::size_t> map(card);
    std::iota(map.begin(), map.end(), std::size_t{0});
    return deterministic_channel(std::move(from), card, VariableId{std::move(to), card}, map);
}

inline Channel constant_channel(std::string from, std::size_t card, std::string to) {
    return deterministic_channel(std::move(from), card, VariableId{std::move(to), 1}, std::vector<std::size_t>(card, 0));
}

inline JointPmf marginalize(const JointPmf& pmf, const VariableSet& keep) {
    std::vector<std::size_t> axes;
    std::vector<VariableId> vars;
    for (const auto& name : keep) {
        axes.push_back(pmf.axis(name));
        vars.push_back(pmf.variables()[axes.back()]);
    }
    return JointPmf(std::move(vars), pmf.marginal_table(axes));
}

// Appends ch.to to the joint: p(old) * p(new | from).
inline JointPmf extend(const JointPmf& pmf, const Channel& ch) {
    std::vector<std::size_t> from_axes;
    for (const auto& name : ch.from) from_axes.push_back(pmf.axis(name));
    for (const auto& v : ch.to)
        if (pmf.contains(v.name)) throw DimensionMismatch("channel output '" + v.name + "' already in joint");
    std::size_t rows = 1;
    for (auto a : from_axes) rows *= pmf.variables()[a].cardinality;
    const std::size_t cols = ch.columns();
    if (ch.matrix.size() != rows * cols)
        throw DimensionMismatch("channel matrix is " + std::to_string(ch.matrix.size()) + " entries, expected " +
                                std::to_string(rows * cols));
    for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = ch.matrix[r * cols + c];
            if (!(v >= 0.0)) throw InvalidArgument("negative channel entry");
            s += v;
        }
        if (std::abs(s - 1.0) > kNormalizationTol) throw InvalidArgument("channel row does not sum to 1");
    }
    if (static_cast<double>(pmf.size()) * static_cast<double>(cols) > static_cast<double>(entry_budget()))
        throw CapacityError("extend", static_cast<double>(pmf.size()) * static_cast<double>(cols), entry_budget());

    const auto& vars = pmf.variables();
    const std::size_t r = vars.size();
    std::vector<std::size_t> row_mult(r, 0);
    {
        std::size_t m = 1;
        for (std::size_t k = from_axes.size(); k-- > 0;) {
            row_mult[from_axes[k]] = m;
            m *= vars[from_axes[k]].cardinality;
        }
    }
    std::vector<double> out(pmf.size() * cols, 0.0);
    std::vector<std::size_t> digit(r, 0);
    std::size_t row = 0;
    const auto table = pmf.table();
    for (std::size_t f = 0; f < table.size(); ++f) {
        const double p = table[f];
        if (p != 0.0) {
            const double* crow = ch.matrix.data() + row * cols;
            double* o = out.data() + f * cols;
            for (std::size_t c = 0; c < cols; ++c) o[c] = p * crow[c];
        }
        for (std::size_t a = r; a-- > 0;) {
            if (++digit[a] < vars[a].cardinality) {
                row += row_mult[a];
                break;
            }
            row -= row_mult[a] * (vars[a].cardinality - 1);
            digit[a] = 0;
        }
    }
    auto new_vars = vars;
    new_vars.insert(new_vars.end(), ch.to.begin(), ch.to.end());
    return JointPmf(std::move(new_vars), std::move(out));
}

inline double entropy(const JointPmf& pmf, const VariableSet& a) { return pmf.entropy(pmf.mask(a)); }

namespace detail {

inline double clamp_information(double raw, double scale) {
    if (raw >= 0.0) return raw;
    if (raw >= -kClampTol * std::max(1.0, scale)) return 0.0;
    throw ConsistencyError("conditional mutual information " + std::to_string(raw) + " below rounding tolerance");
}

}  // namespace detail

// Memoizes marginal entropies of one joint, keyed by axis mask.
class InfoCache {
public:
    explicit InfoCache(const JointPmf& pmf) : pmf_(pmf) {}

    const JointPmf& pmf() const noexcept { return pmf_; }

    double entropy(AxisMask m) {
        if (m == 0) return 0.0;
        if (auto it = cache_.find(m); it != cache_.end()) return it->second;
        const double h = pmf_.entropy(m);
        cache_.emplace(m, h);
        return h;
    }

    double cmi(AxisMask a, AxisMask b, AxisMask c) {
        if ((a & b) || (a & c) || (b & c)) throw InvalidArgument("overlapping variable sets in mutual information");
        if (a == 0 || b == 0) return 0.0;
        const double hac = entropy(a | c), hbc = entropy(b | c), habc = entropy(a | b | c), hc = entropy(c);
        return detail::clamp_information(hac + hbc - habc - hc, habc);
    }

    double cmi(const VariableSet& a, const VariableSet& b, const VariableSet& c = {}) {
        return cmi(pmf_.mask(a), pmf_.mask(b), pmf_.mask(c));
    }

    double conditional_entropy(AxisMask a, AxisMask given) { return entropy(a | given) - entropy(given); }

private:
    const JointPmf& pmf_;
    std::unordered_map<AxisMask, double> cache_;
};

inline double cond_mutual_information(const JointPmf& pmf, const VariableSet& a, const VariableSet& b,
                                      const VariableSet& c = {}) {
    InfoCache cache(pmf);
    return cache.cmi(a, b, c);
}

inline double mutual_information(const JointPmf& pmf, const VariableSet& a, const VariableSet& b) {
    return cond_mutual_information(pmf, a, b, {});
}

inline double conditional_entropy(const JointPmf& pmf, const VariableSet& a, const VariableSet& given) {
    InfoCache cache(pmf);
    return cache.conditional_entropy(pmf.mask(a), pmf.mask(given));
}

// A - B - C holds iff I(A; C | B) <= tol.
inline bool is_markov_chain(const JointPmf& pmf, const VariableSet& a, const VariableSet& b, const VariableSet& c,
                            double tol) {
    return cond_mutual_information(pmf, a, c, b) <= tol;
}

inline std::string iid_name(const std::string& base, std::size_t position) {
    return base + "[" + std::to_string(position) + "]";
}

// n-fold product distribution; variables are named "X[i]" for i = 1..n and
// grouped by position.
inline JointPmf iid_extension(const JointPmf& pmf, std::size_t n) {
    if (n == 0) throw InvalidArgument("iid extension needs n >= 1");
    const double requested = std::pow(static_cast<double>(pmf.size()), static_cast<double>(n));
    if (requested > static_cast<double>(entry_budget())) throw CapacityError("iid_extension", requested, entry_budget());
    std::vector<VariableId> vars;
    for (std::size_t i = 1; i <= n; ++i)
        for (const auto& v : pmf.variables()) vars.push_back({iid_name(v.name, i), v.cardinality});
    std::vector<double> table{1.0};
    const auto base = pmf.table();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> next(table.size() * base.size());
        for (std::size_t a = 0; a < table.size(); ++a)
            for (std::size_t b = 0; b < base.size(); ++b) next[a * base.size() + b] = table[a] * base[b];
        table = std::move(next);
    }
    // Renormalize the accumulated rounding of long products.
    const double total = std::accumulate(table.begin(), table.end(), 0.0);
    for (auto& p : table) p /= total;
    return JointPmf(std::move(vars), std::move(table));
}

// Names of the n position copies of each base variable.
inline VariableSet iid_names(const VariableSet& base, std::size_t n) {
    VariableSet out;
    for (std::size_t i = 1; i <= n; ++i)
        for (const auto& b : base) out.push_back(iid_name(b, i));
    return out;
}

}  // namespace skr

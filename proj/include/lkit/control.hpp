#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lkit/error.hpp"

namespace lkit {

/// Every control key accepted by the feature sets.
inline constexpr std::array<std::string_view, 28> known_control_keys{
    "ela_conv.nsample",     "ela_conv.threshold",    "ela_curv.sample_size", "ela_curv.step",
    "ela_distr.peak_prominence",
    "ela_level.quantiles",  "ela_level.classifiers", "ela_level.folds",      "ela_local.n_starts",
    "ela_local.budget",     "ela_local.clust_cut",   "gcm.approaches",       "gcm.weighting",
    "bt.approaches",        "disp.quantiles",        "disp.dist_method",     "nbc.tie_breaking",
    "ic.epsilon_min",       "ic.epsilon_max",        "ic.epsilon_steps",     "ic.settling_threshold",
    "ic.partial_ratio",     "ic.seed",               "pca.cov_x",            "pca.cor_x",
    "pca.cov_init",         "pca.cor_init",          "seed"};

namespace detail {

inline std::string trim(std::string_view s) {
    auto b = s.begin();
    auto e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return std::string(b, e);
}

inline double parse_double(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("control '" + key + "': expected a number, got '" + text + "'");
    }
}

} // namespace detail

/// Flat key -> value configuration with set-prefixed keys (e.g. disp.dist_method).
/// Values are kept as text and parsed on access; lists accept "a,b" as well as
/// the R-style "c('a', 'b')".
class ControlParams {
public:
    ControlParams() = default;

    static bool is_known(std::string_view key) {
        return std::find(known_control_keys.begin(), known_control_keys.end(), key) != known_control_keys.end();
    }

    void set(const std::string& key, std::string value) {
        if (!is_known(key)) throw InvalidArgument("unknown control key '" + key + "'");
        values_[key] = std::move(value);
    }

    /// Parses "key=value".
    void set_assignment(std::string_view assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string_view::npos) throw InvalidArgument("control override must look like key=value: '" + std::string(assignment) + "'");
        set(detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    double number(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : detail::parse_double(key, it->second);
    }

    long long integer(const std::string& key, long long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const double v = detail::parse_double(key, it->second);
        if (v != static_cast<double>(static_cast<long long>(v)))
            throw InvalidArgument("control '" + key + "': expected an integer, got '" + it->second + "'");
        return static_cast<long long>(v);
    }

    std::string text(const std::string& key, std::string fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : strip_quotes(it->second);
    }

    std::vector<std::string> list(const std::string& key, std::vector<std::string> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::string s = detail::trim(it->second);
        if (s.size() >= 3 && s.rfind("c(", 0) == 0 && s.back() == ')') s = s.substr(2, s.size() - 3);
        std::vector<std::string> out;
        std::size_t start = 0;
        while (start <= s.size()) {
            const auto comma = s.find(',', start);
            const auto item = strip_quotes(detail::trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
            if (!item.empty()) out.push_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (out.empty()) throw InvalidArgument("control '" + key + "': empty list");
        return out;
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const {
        if (!has(key)) return fallback;
        std::vector<double> out;
        for (const auto& item : list(key, {})) out.push_back(detail::parse_double(key, item));
        return out;
    }

    friend bool operator==(const ControlParams&, const ControlParams&) = default;

private:
    static std::string strip_quotes(std::string s) {
        if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) return s.substr(1, s.size() - 2);
        return s;
    }

    std::map<std::string, std::string> values_;
};

} // namespace lkit

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lkit/error.hpp"

namespace lkit {

/// A single feature: real, integer, or explicitly missing.
class FeatureValue {
public:
    enum class Kind { missing, integer, real };

    FeatureValue() = default;

    /// NaN becomes missing; infinities stay real.
    static FeatureValue real(double v) {
        FeatureValue f;
        if (!std::isnan(v)) {
            f.kind_ = Kind::real;
            f.real_ = v;
        }
        return f;
    }
    static FeatureValue integer(std::int64_t v) {
        FeatureValue f;
        f.kind_ = Kind::integer;
        f.int_ = v;
        return f;
    }
    static FeatureValue missing() { return {}; }

    Kind kind() const { return kind_; }
    bool is_missing() const { return kind_ == Kind::missing; }
    bool is_integer() const { return kind_ == Kind::integer; }

    /// NaN for missing values.
    double as_double() const {
        switch (kind_) {
        case Kind::integer: return static_cast<double>(int_);
        case Kind::real: return real_;
        case Kind::missing: break;
        }
        return std::nan("");
    }

    std::int64_t as_integer() const {
        if (kind_ != Kind::integer) throw Error("feature value is not an integer");
        return int_;
    }

    /// Round-trippable text: integers verbatim, reals with 17 significant
    /// digits, "NA" for missing, "Inf"/"-Inf" for infinities.
    std::string to_string() const {
        switch (kind_) {
        case Kind::missing: return "NA";
        case Kind::integer: return std::to_string(int_);
        case Kind::real: break;
        }
        if (std::isinf(real_)) return real_ > 0 ? "Inf" : "-Inf";
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", real_);
        return buf;
    }

    friend bool operator==(const FeatureValue& a, const FeatureValue& b) {
        if (a.kind_ != b.kind_) return false;
        switch (a.kind_) {
        case Kind::missing: return true;
        case Kind::integer: return a.int_ == b.int_;
        case Kind::real: return a.real_ == b.real_;
        }
        return false;
    }

private:
    Kind kind_ = Kind::missing;
    std::int64_t int_ = 0;
    double real_ = 0.0;
};

/// Ordered feature entries of one feature set. Every name carries the set id as prefix.
class FeatureVector {
public:
    FeatureVector() = default;
    explicit FeatureVector(std::string set_id) : set_id_(std::move(set_id)) {}

    const std::string& set_id() const { return set_id_; }

    /// Appends `<set_id>.<suffix>`.
    void add(const std::string& suffix, FeatureValue v) { entries_.emplace_back(set_id_ + "." + suffix, v); }
    void add(const std::string& suffix, double v) { add(suffix, FeatureValue::real(v)); }
    void add_count(const std::string& suffix, std::int64_t v) { add(suffix, FeatureValue::integer(v)); }

    /// Appends a fully qualified name as is.
    void add_qualified(std::string name, FeatureValue v) { entries_.emplace_back(std::move(name), v); }

    void append(const FeatureVector& other) {
        entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
    }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<std::pair<std::string, FeatureValue>>& entries() const { return entries_; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back(e.first);
        return out;
    }

    std::optional<FeatureValue> find(const std::string& name) const {
        for (const auto& [n, v] : entries_)
            if (n == name) return v;
        return std::nullopt;
    }

    /// Throws when the name is absent.
    FeatureValue at(const std::string& name) const {
        if (auto v = find(name)) return *v;
        throw InvalidArgument("no feature named '" + name + "'");
    }

    /// Shorthand for at(name).as_double().
    double operator[](const std::string& name) const { return at(name).as_double(); }

private:
    std::string set_id_;
    std::vector<std::pair<std::string, FeatureValue>> entries_;
};

} // namespace lkit

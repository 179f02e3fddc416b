#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "lkit/control.hpp"
#include "lkit/feature_object.hpp"
#include "lkit/feature_vector.hpp"
#include "lkit/rng.hpp"
#include "lkit/stats.hpp"

namespace lkit {

/// Everything a feature set sees while it runs. Function evaluations go
/// through evaluate() so the set's own cost is counted separately from the
/// object's shared counter.
struct SetContext {
    const FeatureObject& fo;
    const ControlParams& control;
    Rng rng;
    std::uint64_t evaluations = 0;

    double evaluate(const Vector& x) {
        ++evaluations;
        return fo.evaluate(x);
    }

    void require_function(const char* set) const {
        if (!fo.has_function()) throw Unavailable(std::string(set) + " requires function evaluations");
    }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

inline void add_costs(FeatureVector& out, const std::string& prefix, std::uint64_t evals, double runtime) {
    out.add_qualified(prefix + ".costs_fun_evals", FeatureValue::integer(static_cast<std::int64_t>(evals)));
    out.add_qualified(prefix + ".costs_runtime", FeatureValue::real(runtime));
}

/// Runs `body` with a fresh context whose random stream is keyed by the set
/// name, then appends `<set>.costs_fun_evals` and `<set>.costs_runtime`.
/// Sets that account for their costs themselves pass append_costs = false.
template <typename Body>
FeatureVector run_set(const std::string& set, const FeatureObject& fo, const ControlParams& control, std::uint64_t seed,
                      Body&& body, bool append_costs = true) {
    const auto start = Clock::now();
    SetContext ctx{fo, control, Rng(seed).child(set)};
    FeatureVector out = body(ctx);
    if (append_costs) add_costs(out, set, ctx.evaluations, seconds_since(start));
    return out;
}

inline void add_stats(FeatureVector& out, const std::string& prefix, std::span<const double> values,
                      std::initializer_list<stats::Stat> which) {
    const auto finite = stats::finite_only(values);
    for (auto s : which) out.add(prefix + "." + stats::suffix(s), stats::compute(s, finite));
}

inline const std::initializer_list<stats::Stat> five_stats{stats::Stat::min, stats::Stat::mean, stats::Stat::median,
                                                            stats::Stat::max, stats::Stat::sd};
inline const std::initializer_list<stats::Stat> seven_stats{stats::Stat::min, stats::Stat::q25, stats::Stat::mean,
                                                             stats::Stat::median, stats::Stat::q75, stats::Stat::max,
                                                             stats::Stat::sd};

/// 0.1 -> "10", 0.02 -> "02", 0.125 -> "12.5".
inline std::string percent_label(double q) {
    const double pct = q * 100.0;
    char buf[32];
    if (std::abs(pct - std::round(pct)) < 1e-9)
        std::snprintf(buf, sizeof buf, "%02d", static_cast<int>(std::round(pct)));
    else
        std::snprintf(buf, sizeof buf, "%g", pct);
    return buf;
}

/// Euclidean length of the bounding box diagonal, falling back to the sample
/// range along dimensions with infinite bounds.
inline double domain_diagonal(const FeatureObject& fo) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(fo.dim()); ++j) {
        double r = fo.upper()[j] - fo.lower()[j];
        if (!std::isfinite(r)) r = fo.points().col(j).maxCoeff() - fo.points().col(j).minCoeff();
        s += r * r;
    }
    return std::sqrt(s);
}

inline Vector row(const Matrix& m, std::size_t i) { return m.row(static_cast<Eigen::Index>(i)).transpose(); }

} // namespace detail
} // namespace lkit

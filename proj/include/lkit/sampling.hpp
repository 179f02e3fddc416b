#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "lkit/error.hpp"
#include "lkit/linalg.hpp"
#include "lkit/rng.hpp"

namespace lkit {

enum class SampleMethod { uniform, lhs };

inline SampleMethod parse_sample_method(std::string_view s) {
    if (s == "uniform" || s == "random") return SampleMethod::uniform;
    if (s == "lhs") return SampleMethod::lhs;
    throw InvalidArgument("unknown sample method '" + std::string(s) + "' (expected uniform or lhs)");
}

struct SampleSpec {
    std::size_t n_obs = 0;
    std::size_t dim = 0;
    Vector lower;
    Vector upper;
    SampleMethod method = SampleMethod::uniform;
    std::uint64_t seed = 0;
    /// Coordinate-swap proposals of the maximin improvement (lhs only).
    int improvement_proposals = 100;
};

namespace detail {

inline double min_pairwise_distance2(const Matrix& unit) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < unit.rows(); ++i)
        for (Eigen::Index j = i + 1; j < unit.rows(); ++j) best = std::min(best, (unit.row(i) - unit.row(j)).squaredNorm());
    return best;
}

} // namespace detail

/// Uniform or Latin hypercube sample in [lower, upper]. The Latin hypercube
/// variant places one point per stratum and axis, then tries random swaps of a
/// single coordinate between two rows and keeps each swap that increases the
/// minimum pairwise distance (measured in the unit cube).
inline Matrix create_initial_sample(const SampleSpec& spec) {
    if (spec.n_obs < 1) throw InvalidArgument("sample size must be at least 1");
    if (spec.dim < 1) throw InvalidArgument("sample dimension must be at least 1");
    const auto d = static_cast<Eigen::Index>(spec.dim);
    if (spec.lower.size() != d || spec.upper.size() != d) throw InvalidArgument("bounds must have one entry per dimension");
    for (Eigen::Index j = 0; j < d; ++j) {
        if (!std::isfinite(spec.lower[j]) || !std::isfinite(spec.upper[j])) throw InvalidArgument("unbounded sample domain");
        if (!(spec.lower[j] < spec.upper[j])) throw InvalidArgument("sample bounds need lower < upper");
    }
    const auto n = static_cast<Eigen::Index>(spec.n_obs);
    Rng rng = Rng(spec.seed).child("sample");
    Matrix unit(n, d);

    if (spec.method == SampleMethod::uniform) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < d; ++j) unit(i, j) = rng.uniform();
    } else {
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto perm = rng.permutation(spec.n_obs);
            for (Eigen::Index i = 0; i < n; ++i)
                unit(i, j) = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + rng.uniform()) / static_cast<double>(n);
        }
        if (n >= 2) {
            double current = detail::min_pairwise_distance2(unit);
            for (int p = 0; p < spec.improvement_proposals; ++p) {
                const auto j = static_cast<Eigen::Index>(rng.below(spec.dim));
                const auto a = static_cast<Eigen::Index>(rng.below(spec.n_obs));
                auto b = static_cast<Eigen::Index>(rng.below(spec.n_obs - 1));
                if (b >= a) ++b;
                std::swap(unit(a, j), unit(b, j));
                const double candidate = detail::min_pairwise_distance2(unit);
                if (candidate > current)
                    current = candidate;
                else
                    std::swap(unit(a, j), unit(b, j));
            }
        }
    }

    Matrix x(n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double span = spec.upper[j] - spec.lower[j];
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = std::min(spec.upper[j], spec.lower[j] + unit(i, j) * span);
    }
    return x;
}

} // namespace lkit

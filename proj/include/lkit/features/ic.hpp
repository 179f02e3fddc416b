#pragma once

// Information content of the fitness sequence along a nearest-neighbour tour
// through the sample.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lkit/features/common.hpp"

namespace lkit {

struct SymbolSequence {
    std::vector<std::size_t> tour;
    /// One slope per step of non-zero length.
    std::vector<double> slopes;

    /// 1 for slope > eps, -1 for slope < -eps, 0 otherwise.
    std::vector<int> symbols(double eps) const {
        std::vector<int> s(slopes.size());
        for (std::size_t i = 0; i < slopes.size(); ++i) s[i] = slopes[i] > eps ? 1 : (slopes[i] < -eps ? -1 : 0);
        return s;
    }
};

/// Slopes along a given visiting order. Steps between coinciding points are skipped.
inline SymbolSequence sequence_from_tour(const Matrix& x, const Vector& y, std::vector<std::size_t> tour) {
    SymbolSequence s;
    s.tour = std::move(tour);
    for (std::size_t k = 0; k + 1 < s.tour.size(); ++k) {
        const auto a = static_cast<Eigen::Index>(s.tour[k]);
        const auto b = static_cast<Eigen::Index>(s.tour[k + 1]);
        const double len = (x.row(b) - x.row(a)).norm();
        if (len > 0.0) s.slopes.push_back((y[b] - y[a]) / len);
    }
    return s;
}

/// Greedy nearest-neighbour tour from a random start; ties go to the lower index.
inline SymbolSequence build_symbol_sequence(const Matrix& x, const Vector& y, Rng& rng) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < 3) throw InvalidArgument("a symbol sequence needs at least 3 points");
    std::vector<bool> used(n, false);
    std::vector<std::size_t> tour;
    tour.reserve(n);
    std::size_t cur = static_cast<std::size_t>(rng.below(n));
    used[cur] = true;
    tour.push_back(cur);
    while (tour.size() < n) {
        std::size_t next = n;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (used[j]) continue;
            const double d2 = (x.row(static_cast<Eigen::Index>(j)) - x.row(static_cast<Eigen::Index>(cur))).squaredNorm();
            if (d2 < best) {
                best = d2;
                next = j;
            }
        }
        used[next] = true;
        tour.push_back(next);
        cur = next;
    }
    return sequence_from_tour(x, y, std::move(tour));
}

inline SymbolSequence build_symbol_sequence(const FeatureObject& fo, std::uint64_t seed) {
    Rng rng = Rng(seed).child("ic");
    return build_symbol_sequence(fo.points(), fo.fitness(), rng);
}

struct InformationContent {
    double h = 0.0;
    double m = 0.0;
};

/// H = -sum over blocks ab with a != b of p_ab log6 p_ab; M = length of the
/// sequence without zeros and repeats, relative to the sequence length.
inline InformationContent information_content(const std::vector<int>& symbols) {
    InformationContent ic;
    if (symbols.empty()) return ic;
    if (symbols.size() >= 2) {
        double count[3][3] = {};
        for (std::size_t k = 0; k + 1 < symbols.size(); ++k) count[symbols[k] + 1][symbols[k + 1] + 1] += 1.0;
        const double blocks = static_cast<double>(symbols.size() - 1);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (a == b || count[a][b] == 0.0) continue;
                const double p = count[a][b] / blocks;
                ic.h -= p * std::log(p) / std::log(6.0);
            }
    }
    std::size_t len = 0;
    int last = 0;
    for (int s : symbols) {
        if (s == 0 || s == last) continue;
        ++len;
        last = s;
    }
    ic.m = static_cast<double>(len) / static_cast<double>(symbols.size());
    return ic;
}

struct ICCurves {
    std::vector<double> epsilon;
    std::vector<double> h;
    std::vector<double> m;
    double h_max = stats::nan;
    double eps_s = stats::nan;    // log10 of the settling sensitivity
    double eps_max = stats::nan;  // epsilon where H peaks
    double m0 = stats::nan;
    double eps_ratio = stats::nan;  // log10 of the partial information sensitivity
};

/// Curves over {0} and a log-spaced epsilon grid, with the derived markers.
inline ICCurves ic_curves(const SymbolSequence& seq, const ControlParams& control = {}) {
    const double lo = control.number("ic.epsilon_min", 1e-5);
    const double hi = control.number("ic.epsilon_max", 1e15);
    const auto steps = control.integer("ic.epsilon_steps", 1000);
    const double s = control.number("ic.settling_threshold", 0.05);
    const double r = control.number("ic.partial_ratio", 0.5);
    if (!(lo > 0.0 && hi > lo) || steps < 2) throw InvalidArgument("ic epsilon grid needs 0 < epsilon_min < epsilon_max and at least 2 steps");

    ICCurves c;
    c.epsilon.push_back(0.0);
    const double a = std::log10(lo);
    const double b = std::log10(hi);
    for (long long k = 0; k < steps; ++k)
        c.epsilon.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(steps - 1)));
    for (double eps : c.epsilon) {
        const auto ic = information_content(seq.symbols(eps));
        c.h.push_back(ic.h);
        c.m.push_back(ic.m);
    }

    std::size_t arg = 0;
    for (std::size_t k = 1; k < c.h.size(); ++k)
        if (c.h[k] > c.h[arg]) arg = k;
    c.h_max = c.h[arg];
    c.eps_max = c.epsilon[arg];
    auto log10_or_nan = [](double v) { return v > 0.0 ? std::log10(v) : stats::nan; };
    for (std::size_t k = 0; k < c.h.size(); ++k)
        if (c.h[k] < s) {
            c.eps_s = log10_or_nan(c.epsilon[k]);
            break;
        }
    c.m0 = c.m.front();
    for (std::size_t k = c.m.size(); k-- > 0;)
        if (c.m[k] > r * c.m0) {
            c.eps_ratio = log10_or_nan(c.epsilon[k]);
            break;
        }
    return c;
}

namespace detail {

inline std::uint64_t ic_seed(const ControlParams& control, std::uint64_t seed) {
    return control.has("ic.seed") ? static_cast<std::uint64_t>(control.integer("ic.seed", 0)) : seed;
}

} // namespace detail

inline ICCurves ic_curves(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return ic_curves(build_symbol_sequence(fo, detail::ic_seed(control, seed)), control);
}

inline FeatureVector ic_features(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("ic", fo, control, seed, [seed](SetContext& ctx) {
        const auto c = ic_curves(ctx.fo, ctx.control, seed);
        FeatureVector out("ic");
        out.add("h.max", c.h_max);
        out.add("eps.s", c.eps_s);
        out.add("eps.max", c.eps_max);
        out.add("m0", c.m0);
        out.add("eps.ratio", c.eps_ratio);
        return out;
    });
}

} // namespace lkit

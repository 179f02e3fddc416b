#pragma once

// Cell-mapping features on the block grid: angle, gradient homogeneity and
// convexity of successive cells.

#include <cmath>
#include <limits>
#include <vector>

#include "lkit/features/common.hpp"

namespace lkit {

/// Per non-empty cell: its members and the best, worst and most central one.
struct CellSummary {
    std::size_t cell = 0;
    std::vector<std::size_t> members;
    std::size_t best = 0;
    std::size_t worst = 0;
    std::size_t central = 0;
};

/// Ties go to the lower sample index.
inline std::vector<CellSummary> cell_summaries(const FeatureObject& fo) {
    const auto& grid = fo.grid();
    const auto& y = fo.fitness();
    const auto& x = fo.points();
    std::vector<CellSummary> out;
    for (std::size_t c = 0; c < fo.cells().size(); ++c) {
        const auto& m = fo.cells()[c];
        if (m.empty()) continue;
        CellSummary s{c, m, m.front(), m.front(), m.front()};
        const Vector ctr = grid.center(c);
        double best_dist = std::numeric_limits<double>::infinity();
        for (auto i : m) {
            const auto ii = static_cast<Eigen::Index>(i);
            if (y[ii] < y[static_cast<Eigen::Index>(s.best)]) s.best = i;
            if (y[ii] > y[static_cast<Eigen::Index>(s.worst)]) s.worst = i;
            const double dist = (x.row(ii).transpose() - ctr).norm();
            if (dist < best_dist) {
                best_dist = dist;
                s.central = i;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline FeatureVector cm_angle(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("cm_angle", fo, control, seed, [](SetContext& ctx) {
        const auto& grid = ctx.fo.grid();
        const auto& x = ctx.fo.points();
        const auto& y = ctx.fo.fitness();
        const double span = y.maxCoeff() - y.minCoeff();
        std::vector<double> d_best, d_worst, angle, y_ratio;
        for (const auto& s : cell_summaries(ctx.fo)) {
            if (s.members.size() < 2) continue;
            const Vector ctr = grid.center(s.cell);
            const Vector b = detail::row(x, s.best) - ctr;
            const Vector w = detail::row(x, s.worst) - ctr;
            if (s.best == s.worst || (b - w).norm() == 0.0) continue;
            d_best.push_back(b.norm());
            d_worst.push_back(w.norm());
            if (b.norm() > 0.0 && w.norm() > 0.0) {
                const double c = std::clamp(b.dot(w) / (b.norm() * w.norm()), -1.0, 1.0);
                angle.push_back(std::acos(c) * 180.0 / 3.14159265358979323846);
            }
            y_ratio.push_back(stats::ratio(y[static_cast<Eigen::Index>(s.worst)] - y[static_cast<Eigen::Index>(s.best)], span));
        }
        FeatureVector out("cm_angle");
        const std::initializer_list<stats::Stat> agg{stats::Stat::mean, stats::Stat::sd};
        detail::add_stats(out, "dist_ctr2best", d_best, agg);
        detail::add_stats(out, "dist_ctr2worst", d_worst, agg);
        detail::add_stats(out, "angle", angle, agg);
        detail::add_stats(out, "y_ratio_best2worst", y_ratio, agg);
        return out;
    });
}

/// Length of the summed, oriented unit vectors to each member's nearest
/// neighbour within the cell, divided by the member count.
inline double cell_gradient_homogeneity(const Matrix& x, const Vector& y, const std::vector<std::size_t>& members) {
    if (members.size() < 2) return stats::nan;
    Vector sum = Vector::Zero(x.cols());
    for (auto i : members) {
        const auto ii = static_cast<Eigen::Index>(i);
        std::size_t nn = i;
        double nd = std::numeric_limits<double>::infinity();
        for (auto j : members) {
            if (j == i) continue;
            const double dist = (x.row(static_cast<Eigen::Index>(j)) - x.row(ii)).norm();
            if (dist < nd) {
                nd = dist;
                nn = j;
            }
        }
        if (!(nd > 0.0)) continue;
        const auto jj = static_cast<Eigen::Index>(nn);
        Vector v = (x.row(jj) - x.row(ii)).transpose() / nd;
        const bool toward_neighbor = y[jj] < y[ii] || (y[jj] == y[ii] && nn < i);
        sum += toward_neighbor ? v : Vector(-v);
    }
    return sum.norm() / static_cast<double>(members.size());
}

inline FeatureVector cm_grad(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("cm_grad", fo, control, seed, [](SetContext& ctx) {
        ctx.fo.grid();
        std::vector<double> values;
        for (const auto& m : ctx.fo.cells())
            if (m.size() >= 2) values.push_back(cell_gradient_homogeneity(ctx.fo.points(), ctx.fo.fitness(), m));
        FeatureVector out("cm_grad");
        out.add("mean", stats::mean(values));
        out.add("sd", stats::sd(values));
        return out;
    });
}

/// Convexity counts over all triples of successive non-empty cells.
struct ConvexityCounts {
    std::size_t triples = 0;
    std::size_t convex_hard = 0;
    std::size_t concave_hard = 0;
    std::size_t convex_soft = 0;
    std::size_t concave_soft = 0;
};

inline ConvexityCounts cell_convexity(const FeatureObject& fo) {
    const auto& grid = fo.grid();
    const auto d = grid.dim();
    for (int b : grid.blocks())
        if (b < 3) throw InvalidArgument("cm_conv requires at least three blocks per dimension");

    std::vector<double> rep(grid.total_cells(), stats::nan);
    for (const auto& s : cell_summaries(fo)) rep[s.cell] = fo.fitness()[static_cast<Eigen::Index>(s.central)];

    ConvexityCounts out;
    // one direction per +-v pair: first non-zero component is +1
    std::vector<int> v(d, -1);
    while (true) {
        std::size_t first = 0;
        while (first < d && v[first] == 0) ++first;
        if (first < d && v[first] == 1) {
            for (std::size_t c = 0; c < grid.total_cells(); ++c) {
                auto coords = grid.coordinates(c);
                std::vector<int> lo(d), hi(d);
                for (std::size_t i = 0; i < d; ++i) {
                    lo[i] = coords[i] - v[i];
                    hi[i] = coords[i] + v[i];
                }
                if (!grid.contains(lo) || !grid.contains(hi)) continue;
                const double a = rep[grid.id(lo)];
                const double m = rep[c];
                const double b = rep[grid.id(hi)];
                if (std::isnan(a) || std::isnan(m) || std::isnan(b)) continue;
                ++out.triples;
                out.convex_hard += m < std::min(a, b) ? 1 : 0;
                out.concave_hard += m > std::max(a, b) ? 1 : 0;
                out.convex_soft += m < 0.5 * (a + b) ? 1 : 0;
                out.concave_soft += m > 0.5 * (a + b) ? 1 : 0;
            }
        }
        std::size_t k = d;
        while (k > 0 && v[k - 1] == 1) v[--k] = -1;
        if (k == 0) break;
        ++v[k - 1];
    }
    return out;
}

inline FeatureVector cm_conv(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("cm_conv", fo, control, seed, [](SetContext& ctx) {
        const auto c = cell_convexity(ctx.fo);
        const double t = static_cast<double>(c.triples);
        auto freq = [&](std::size_t k) { return c.triples ? static_cast<double>(k) / t : stats::nan; };
        FeatureVector out("cm_conv");
        out.add("convex.hard", freq(c.convex_hard));
        out.add("concave.hard", freq(c.concave_hard));
        out.add("convex.soft", freq(c.convex_soft));
        out.add("concave.soft", freq(c.concave_soft));
        return out;
    });
}

} // namespace lkit

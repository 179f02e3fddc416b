#pragma once

// Distance-based features: nearest-better clustering and dispersion.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lkit/features/common.hpp"

namespace lkit {

enum class TieBreaking { index, strict };

/// Per point: nearest neighbour distance, nearest-better distance (NaN where
/// no better point exists), the nearest-better index and the indegree.
struct NearestBetterStats {
    std::vector<double> nn;
    std::vector<double> nb;
    std::vector<long> nb_index;
    std::vector<double> indegree;
};

/// With TieBreaking::index, j is better than i if y_j < y_i, or y_j == y_i
/// and j < i. With strict, only y_j < y_i counts.
inline NearestBetterStats nearest_better(const Matrix& x, const Vector& y, TieBreaking ties = TieBreaking::index) {
    const auto n = static_cast<std::size_t>(x.rows());
    NearestBetterStats s{std::vector<double>(n, stats::nan), std::vector<double>(n, stats::nan), std::vector<long>(n, -1),
                         std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double nn = std::numeric_limits<double>::infinity();
        double nb = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto jj = static_cast<Eigen::Index>(j);
            const double dist = (x.row(jj) - x.row(ii)).norm();
            nn = std::min(nn, dist);
            const bool better = y[jj] < y[ii] || (ties == TieBreaking::index && y[jj] == y[ii] && j < i);
            if (better && dist < nb) {
                nb = dist;
                s.nb_index[i] = static_cast<long>(j);
            }
        }
        s.nn[i] = nn;
        if (s.nb_index[i] >= 0) {
            s.nb[i] = nb;
            s.indegree[static_cast<std::size_t>(s.nb_index[i])] += 1.0;
        }
    }
    return s;
}

inline FeatureVector nbc(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("nbc", fo, control, seed, [](SetContext& ctx) {
        if (ctx.fo.n_obs() < 5) throw InvalidArgument("nbc needs at least 5 observations");
        const auto mode = ctx.control.text("nbc.tie_breaking", "index");
        if (mode != "index" && mode != "strict") throw InvalidArgument("unknown nbc.tie_breaking '" + mode + "' (expected index or strict)");
        const auto& y = ctx.fo.fitness();
        const auto s = nearest_better(ctx.fo.points(), y, mode == "index" ? TieBreaking::index : TieBreaking::strict);

        std::vector<double> nn_def, nb_def, ratio;
        for (std::size_t i = 0; i < s.nn.size(); ++i) {
            if (std::isnan(s.nb[i])) continue;
            nn_def.push_back(s.nn[i]);
            nb_def.push_back(s.nb[i]);
            ratio.push_back(stats::ratio(s.nn[i], s.nb[i]));
        }
        const auto ratios = stats::finite_only(ratio);
        const std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
        FeatureVector out("nbc");
        out.add("nn_nb.sd_ratio", stats::ratio(stats::sd(s.nn), stats::sd(nb_def)));
        out.add("nn_nb.mean_ratio", stats::ratio(stats::mean(s.nn), stats::mean(nb_def)));
        out.add("nn_nb.cor", stats::correlation(nn_def, nb_def));
        out.add("dist_ratio.coeff_var", stats::ratio(stats::sd(ratios), stats::mean(ratios)));
        out.add("nb_fitness.cor", stats::correlation(ys, s.indegree));
        return out;
    });
}

enum class DistanceMetric { euclidean, manhattan };

inline DistanceMetric parse_metric(const std::string& s) {
    if (s == "euclidean") return DistanceMetric::euclidean;
    if (s == "manhattan") return DistanceMetric::manhattan;
    throw InvalidArgument("unknown disp.dist_method '" + s + "' (expected euclidean or manhattan)");
}

/// All pairwise distances among the given rows (i < j).
inline std::vector<double> pairwise_distances(const Matrix& x, const std::vector<std::size_t>& rows, DistanceMetric metric) {
    std::vector<double> out;
    out.reserve(rows.size() * (rows.size() - (rows.empty() ? 0 : 1)) / 2);
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
            const auto diff = x.row(static_cast<Eigen::Index>(rows[a])) - x.row(static_cast<Eigen::Index>(rows[b]));
            out.push_back(metric == DistanceMetric::euclidean ? diff.norm() : diff.cwiseAbs().sum());
        }
    return out;
}

inline FeatureVector disp(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("disp", fo, control, seed, [](SetContext& ctx) {
        const auto n = ctx.fo.n_obs();
        if (n < 10) throw InvalidArgument("disp needs at least 10 observations");
        const auto quantiles = ctx.control.numbers("disp.quantiles", {0.02, 0.05, 0.10, 0.25});
        const auto metric = parse_metric(ctx.control.text("disp.dist_method", "euclidean"));
        const auto& x = ctx.fo.points();
        const auto& y = ctx.fo.fitness();
        const std::span<const double> ys(y.data(), n);

        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        const auto full = pairwise_distances(x, all, metric);
        const double full_mean = stats::mean(full);
        const double full_median = stats::median(full);

        const auto k = quantiles.size();
        std::vector<double> r_mean(k, stats::nan), r_median(k, stats::nan), d_mean(k, stats::nan), d_median(k, stats::nan);
        for (std::size_t q = 0; q < k; ++q) {
            if (!(quantiles[q] > 0.0 && quantiles[q] <= 1.0)) throw InvalidArgument("disp.quantiles must lie in (0, 1]");
            const double thr = stats::quantile(ys, quantiles[q]);
            std::vector<std::size_t> subset;
            for (std::size_t i = 0; i < n; ++i)
                if (y[static_cast<Eigen::Index>(i)] <= thr) subset.push_back(i);
            if (subset.size() < 2) continue;
            const auto dist = pairwise_distances(x, subset, metric);
            const double m = stats::mean(dist);
            const double md = stats::median(dist);
            r_mean[q] = stats::ratio(m, full_mean);
            r_median[q] = stats::ratio(md, full_median);
            d_mean[q] = m - full_mean;
            d_median[q] = md - full_median;
        }
        FeatureVector out("disp");
        auto emit = [&](const char* name, const std::vector<double>& v) {
            for (std::size_t q = 0; q < k; ++q) out.add(std::string(name) + "_" + detail::percent_label(quantiles[q]), v[q]);
        };
        emit("ratio_mean", r_mean);
        emit("ratio_median", r_median);
        emit("diff_mean", d_mean);
        emit("diff_median", d_median);
        return out;
    });
}

} // namespace lkit

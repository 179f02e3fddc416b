#pragma once

// Classical exploratory landscape analysis: convexity, curvature, y-distribution,
// levelset, local search and meta-model features.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "lkit/classify.hpp"
#include "lkit/cluster.hpp"
#include "lkit/features/common.hpp"
#include "lkit/finite_diff.hpp"
#include "lkit/linalg.hpp"
#include "lkit/optimize.hpp"

namespace lkit {

inline FeatureVector ela_conv(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("ela_conv", fo, control, seed, [](SetContext& ctx) {
        ctx.require_function("ela_conv");
        const auto n = ctx.fo.n_obs();
        const auto pairs = ctx.control.integer("ela_conv.nsample", 1000);
        const double tau = ctx.control.number("ela_conv.threshold", 1e-10);
        if (pairs < 1) throw InvalidArgument("ela_conv.nsample must be positive");

        const auto& x = ctx.fo.points();
        const auto& y = ctx.fo.fitness();
        std::vector<double> diff;
        diff.reserve(static_cast<std::size_t>(pairs));
        for (long long k = 0; k < pairs; ++k) {
            const auto a = ctx.rng.below(n);
            auto b = ctx.rng.below(n - 1);
            if (b >= a) ++b;
            const double w = ctx.rng.uniform();
            const auto ia = static_cast<Eigen::Index>(a);
            const auto ib = static_cast<Eigen::Index>(b);
            const Vector comb = clamp_to(w * x.row(ia).transpose() + (1.0 - w) * x.row(ib).transpose(), ctx.fo.lower(), ctx.fo.upper());
            diff.push_back(ctx.evaluate(comb) - (w * y[ia] + (1.0 - w) * y[ib]));
        }
        double convex = 0.0, linear = 0.0, abs_sum = 0.0;
        for (double v : diff) {
            convex += v < -tau ? 1.0 : 0.0;
            linear += std::abs(v) <= tau ? 1.0 : 0.0;
            abs_sum += std::abs(v);
        }
        const double m = static_cast<double>(diff.size());
        FeatureVector out("ela_conv");
        out.add("conv_prob", convex / m);
        out.add("lin_prob", linear / m);
        out.add("lin_dev.orig", stats::mean(diff));
        out.add("lin_dev.abs", abs_sum / m);
        return out;
    });
}

/// Per-point curvature quantities used by ela_curv.
struct CurvaturePoint {
    std::size_t index = 0;
    double grad_norm = stats::nan;
    double grad_scale = stats::nan;
    double hessian_cond = stats::nan;
};

/// Gradient norm, max/min absolute gradient component and max/min absolute
/// Hessian eigenvalue at one point. Components below the round-off level of
/// the difference quotient count as zero, which leaves the ratio undefined.
inline CurvaturePoint curvature_at(const Derivatives& der) {
    CurvaturePoint p;
    const auto& g = der.gradient;
    if (g.allFinite()) {
        p.grad_norm = g.norm();
        double lo = std::numeric_limits<double>::infinity();
        bool zero = false;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            const double a = std::abs(g[i]);
            zero = zero || a <= der.gradient_noise(i);
            lo = std::min(lo, a);
        }
        if (!zero) p.grad_scale = g.cwiseAbs().maxCoeff() / lo;
    }
    if (der.hessian.allFinite()) {
        const Vector ev = sym_eigen(der.hessian).values.cwiseAbs();
        const double lo = ev.minCoeff();
        if (lo > der.hessian_noise()) p.hessian_cond = ev.maxCoeff() / lo;
    }
    return p;
}

namespace detail {

/// The subsample drawn by ela_curv and its per-point values.
inline std::vector<CurvaturePoint> curvature_points(SetContext& ctx) {
    const auto n = ctx.fo.n_obs();
    const auto d = ctx.fo.dim();
    const auto size = static_cast<std::size_t>(ctx.control.integer("ela_curv.sample_size", static_cast<long long>(std::min(100 * d, n))));
    if (size < 1 || size > n) throw InvalidArgument("ela_curv.sample_size must lie in [1, n]");
    const double step = ctx.control.number("ela_curv.step", 1e-4);
    if (!(step > 0.0)) throw InvalidArgument("ela_curv.step must be positive");

    auto idx = ctx.rng.sample_without_replacement(n, size);
    std::sort(idx.begin(), idx.end());
    const Objective f = [&](const Vector& x) { return ctx.evaluate(x); };
    std::vector<CurvaturePoint> out;
    out.reserve(idx.size());
    for (auto i : idx) {
        auto p = curvature_at(fd_gradient_hessian(f, row(ctx.fo.points(), i), ctx.fo.lower(), ctx.fo.upper(), step));
        p.index = i;
        out.push_back(p);
    }
    return out;
}

} // namespace detail

/// The per-point values behind ela_curv for the same seed and control.
inline std::vector<CurvaturePoint> curvature_samples(const FeatureObject& fo, const ControlParams& control = {},
                                                     std::uint64_t seed = 0) {
    SetContext ctx{fo, control, Rng(seed).child("ela_curv")};
    ctx.require_function("ela_curv");
    return detail::curvature_points(ctx);
}

inline FeatureVector ela_curv(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("ela_curv", fo, control, seed, [](SetContext& ctx) {
        ctx.require_function("ela_curv");
        const auto pts = detail::curvature_points(ctx);
        FeatureVector out("ela_curv");
        auto emit = [&](const char* name, auto member) {
            std::vector<double> v;
            for (const auto& p : pts) v.push_back(p.*member);
            detail::add_stats(out, name, v, detail::seven_stats);
            out.add_count(std::string(name) + ".nas", static_cast<std::int64_t>(stats::count_nan(v)));
        };
        emit("grad_norm", &CurvaturePoint::grad_norm);
        emit("grad_scale", &CurvaturePoint::grad_scale);
        emit("hessian_cond", &CurvaturePoint::hessian_cond);
        return out;
    });
}

inline FeatureVector ela_distr(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("ela_distr", fo, control, seed, [](SetContext& ctx) {
        const auto& y = ctx.fo.objectives();
        const auto res = stats::kde_peak_count(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                                               std::nullopt, ctx.control.number("ela_distr.peak_prominence", 0.01));
        FeatureVector out("ela_distr");
        out.add("skewness", res.skewness);
        out.add("kurtosis", res.kurtosis);
        out.add_count("number_of_peaks", static_cast<std::int64_t>(res.peaks));
        return out;
    });
}

inline FeatureVector ela_level(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("ela_level", fo, control, seed, [](SetContext& ctx) {
        const auto n = ctx.fo.n_obs();
        if (n < 20) throw InvalidArgument("ela_level needs at least 20 observations");
        const auto quantiles = ctx.control.numbers("ela_level.quantiles", {0.10, 0.25, 0.50});
        std::vector<ClassifierKind> kinds;
        for (const auto& c : ctx.control.list("ela_level.classifiers", {"lda", "qda", "gmda"})) kinds.push_back(parse_classifier(c));
        const int folds = static_cast<int>(ctx.control.integer("ela_level.folds", 10));

        const auto& y = ctx.fo.fitness();
        const std::span<const double> ys(y.data(), n);
        FeatureVector out("ela_level");
        std::vector<std::vector<double>> mmce(quantiles.size(), std::vector<double>(kinds.size(), stats::nan));
        for (std::size_t q = 0; q < quantiles.size(); ++q) {
            if (!(quantiles[q] > 0.0 && quantiles[q] < 1.0)) throw InvalidArgument("ela_level.quantiles must lie in (0, 1)");
            const double thr = stats::quantile(ys, quantiles[q]);
            std::vector<int> labels(n);
            std::size_t ones = 0;
            for (std::size_t i = 0; i < n; ++i) {
                labels[i] = y[static_cast<Eigen::Index>(i)] <= thr ? 1 : 0;
                ones += static_cast<std::size_t>(labels[i]);
            }
            const bool degenerate = ones == 0 || ones == n;
            const auto label = detail::percent_label(quantiles[q]);
            for (std::size_t k = 0; k < kinds.size(); ++k) {
                if (!degenerate)
                    mmce[q][k] = cross_validated_mmce(ctx.fo.points(), labels, kinds[k], folds, ctx.rng.child(q));
                out.add("mmce_" + std::string(to_string(kinds[k])) + "_" + label, mmce[q][k]);
            }
        }
        for (std::size_t q = 0; q < quantiles.size(); ++q) {
            const auto label = detail::percent_label(quantiles[q]);
            for (std::size_t a = 0; a < kinds.size(); ++a)
                for (std::size_t b = a + 1; b < kinds.size(); ++b)
                    out.add(std::string(to_string(kinds[a])) + "_" + std::string(to_string(kinds[b])) + "_" + label,
                            stats::ratio(mmce[q][a], mmce[q][b]));
        }
        return out;
    });
}

/// One local search of ela_local.
struct LocalSearchRun {
    std::size_t start = 0;
    Vector optimum;
    double value = stats::nan;
    std::size_t evaluations = 0;
    int cluster = -1;
};

namespace detail {

inline std::vector<LocalSearchRun> local_search_runs(SetContext& ctx) {
    const auto n = ctx.fo.n_obs();
    const auto d = ctx.fo.dim();
    const auto starts = static_cast<std::size_t>(ctx.control.integer("ela_local.n_starts", static_cast<long long>(std::min(50 * d, n))));
    if (starts < 1 || starts > n) throw InvalidArgument("ela_local.n_starts must lie in [1, n]");
    const auto budget = static_cast<std::size_t>(ctx.control.integer("ela_local.budget", static_cast<long long>(1000 * d)));
    const double cut = ctx.control.number("ela_local.clust_cut", 0.1) * domain_diagonal(ctx.fo);

    auto idx = ctx.rng.sample_without_replacement(n, starts);
    std::sort(idx.begin(), idx.end());
    const Objective f = [&](const Vector& x) { return ctx.evaluate(x); };
    std::vector<LocalSearchRun> runs;
    Matrix optima(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(d));
    for (auto i : idx) {
        const auto r = local_search(f, row(ctx.fo.points(), i), ctx.fo.lower(), ctx.fo.upper(), budget);
        optima.row(static_cast<Eigen::Index>(runs.size())) = r.x.transpose();
        runs.push_back({i, r.x, r.f, r.evaluations, -1});
    }
    const auto labels = single_linkage_clusters(optima, cut);
    for (std::size_t k = 0; k < runs.size(); ++k) runs[k].cluster = labels[k];
    return runs;
}

} // namespace detail

/// The searches behind ela_local for the same seed and control.
inline std::vector<LocalSearchRun> local_search_samples(const FeatureObject& fo, const ControlParams& control = {},
                                                        std::uint64_t seed = 0) {
    SetContext ctx{fo, control, Rng(seed).child("ela_local")};
    ctx.require_function("ela_local");
    return detail::local_search_runs(ctx);
}

inline FeatureVector ela_local(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("ela_local", fo, control, seed, [](SetContext& ctx) {
        ctx.require_function("ela_local");
        const auto runs = detail::local_search_runs(ctx);
        const int k = 1 + std::max_element(runs.begin(), runs.end(), [](auto& a, auto& b) { return a.cluster < b.cluster; })->cluster;

        std::vector<double> best(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
        std::vector<double> size(static_cast<std::size_t>(k), 0.0);
        for (const auto& r : runs) {
            const auto c = static_cast<std::size_t>(r.cluster);
            best[c] = std::min(best[c], r.value);
            size[c] += 1.0;
        }
        const double best_value = *std::min_element(best.begin(), best.end());
        const double worst_value = *std::max_element(best.begin(), best.end());
        std::vector<double> s_best, s_non_best, s_worst;
        for (std::size_t c = 0; c < best.size(); ++c) {
            (best[c] == best_value ? s_best : s_non_best).push_back(size[c]);
            if (best[c] == worst_value) s_worst.push_back(size[c]);
        }
        std::vector<double> evals;
        for (const auto& r : runs) evals.push_back(static_cast<double>(r.evaluations));

        FeatureVector out("ela_local");
        out.add_count("n_loc_opt.abs", k);
        out.add("n_loc_opt.rel", static_cast<double>(k) / static_cast<double>(runs.size()));
        out.add("best2mean_contr.orig", stats::ratio(best_value, stats::mean(best)));
        out.add("basin_sizes.avg_best", stats::mean(s_best));
        out.add("basin_sizes.avg_non_best", stats::mean(s_non_best));
        out.add("basin_sizes.avg_worst", stats::mean(s_worst));
        detail::add_stats(out, "fun_evals", evals, detail::seven_stats);
        return out;
    });
}

inline FeatureVector ela_meta(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("ela_meta", fo, control, seed, [](SetContext& ctx) {
        const auto n = ctx.fo.n_obs();
        const auto d = ctx.fo.dim();
        if (n < (d + 1) * (d + 2) / 2 + 1) throw InvalidArgument("ela_meta needs at least (d+1)(d+2)/2 + 1 observations");
        const auto& x = ctx.fo.points();
        const auto& y = ctx.fo.fitness();
        const auto di = static_cast<Eigen::Index>(d);

        const auto lin = fit_least_squares(model_matrix(x, ModelTerms::linear), y);
        const auto lin_int = fit_least_squares(model_matrix(x, ModelTerms::linear_interactions), y);
        const auto quad = fit_least_squares(model_matrix(x, ModelTerms::quadratic), y);
        const auto quad_int = fit_least_squares(model_matrix(x, ModelTerms::quadratic_interactions), y);

        // |coefficients| of a contiguous block; NaN when any was dropped
        auto abs_block = [](const LinearFit& fit, Eigen::Index from, Eigen::Index count) {
            std::vector<double> v;
            for (Eigen::Index j = from; j < from + count; ++j) {
                if (fit.dropped[static_cast<std::size_t>(j)]) return std::vector<double>{};
                v.push_back(std::abs(fit.coefficients[j]));
            }
            return v;
        };
        const auto lin_coef = abs_block(lin, 1, di);
        const auto quad_coef = abs_block(quad, 1 + di, di);

        FeatureVector out("ela_meta");
        out.add("lin_simple.adj_r2", lin.adjusted_r_squared);
        out.add("lin_simple.intercept", lin.dropped[0] ? stats::nan : lin.coefficients[0]);
        out.add("lin_simple.coef.min", stats::min(lin_coef));
        out.add("lin_simple.coef.max", stats::max(lin_coef));
        out.add("lin_simple.coef.max_by_min", stats::ratio(stats::max(lin_coef), stats::min(lin_coef)));
        out.add("lin_w_interact.adj_r2", lin_int.adjusted_r_squared);
        out.add("quad_simple.adj_r2", quad.adjusted_r_squared);
        out.add("quad_simple.cond", stats::ratio(stats::max(quad_coef), stats::min(quad_coef)));
        out.add("quad_w_interact.adj_r2", quad_int.adjusted_r_squared);
        return out;
    });
}

} // namespace lkit

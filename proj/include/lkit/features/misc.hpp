#pragma once

// Basic design information, linear models per cell, principal components.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lkit/features/common.hpp"
#include "lkit/linalg.hpp"

namespace lkit {

inline FeatureVector basic(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("basic", fo, control, seed, [](SetContext& ctx) {
        const auto& f = ctx.fo;
        FeatureVector out("basic");
        out.add_count("dim", static_cast<std::int64_t>(f.dim()));
        out.add_count("observations", static_cast<std::int64_t>(f.n_obs()));
        out.add("lower_min", f.lower().minCoeff());
        out.add("lower_max", f.lower().maxCoeff());
        out.add("upper_min", f.upper().minCoeff());
        out.add("upper_max", f.upper().maxCoeff());
        out.add("objective_min", f.objectives().minCoeff());
        out.add("objective_max", f.objectives().maxCoeff());
        if (f.has_grid()) {
            const auto& b = f.grid().blocks();
            out.add_count("blocks_min", *std::min_element(b.begin(), b.end()));
            out.add_count("blocks_max", *std::max_element(b.begin(), b.end()));
            out.add_count("cells_filled", static_cast<std::int64_t>(f.non_empty_cells()));
            out.add_count("cells_total", static_cast<std::int64_t>(f.grid().total_cells()));
        } else {
            for (const char* k : {"blocks_min", "blocks_max", "cells_filled", "cells_total"}) out.add(k, FeatureValue::missing());
        }
        out.add_count("minimize_fun", f.minimize() ? 1 : 0);
        out.add("cells_filled_ratio", f.has_grid() ? static_cast<double>(f.non_empty_cells()) / static_cast<double>(f.grid().total_cells())
                                                   : stats::nan);
        return out;
    });
}

/// Non-intercept OLS coefficients of y ~ x per cell with at least d + 2
/// points and a full-rank design, one row per qualifying cell.
inline Matrix cell_coefficients(const FeatureObject& fo) {
    const auto d = fo.dim();
    std::vector<Vector> rows;
    for (const auto& m : fo.cells()) {
        if (m.size() < d + 2) continue;
        Matrix x(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(d));
        Vector y(static_cast<Eigen::Index>(m.size()));
        for (std::size_t k = 0; k < m.size(); ++k) {
            x.row(static_cast<Eigen::Index>(k)) = fo.points().row(static_cast<Eigen::Index>(m[k]));
            y[static_cast<Eigen::Index>(k)] = fo.fitness()[static_cast<Eigen::Index>(m[k])];
        }
        const auto fit = fit_least_squares(model_matrix(x, ModelTerms::linear), y);
        if (fit.rank_deficient()) continue;
        rows.push_back(fit.coefficients.tail(static_cast<Eigen::Index>(d)));
    }
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return out;
}

namespace detail {

inline std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

/// Length of the mean vector, mean pairwise correlation between vectors,
/// max/min and mean of the per-coordinate standard deviations.
inline void limo_block(FeatureVector& out, const Matrix& coef, const std::string& suffix) {
    const auto q = coef.rows();
    const auto d = coef.cols();
    out.add("avg_length" + suffix, q > 0 ? coef.colwise().mean().norm() : stats::nan);

    std::vector<double> cors;
    for (Eigen::Index a = 0; a < q; ++a)
        for (Eigen::Index b = a + 1; b < q; ++b) {
            const Vector va = coef.row(a).transpose();
            const Vector vb = coef.row(b).transpose();
            cors.push_back(stats::correlation(as_span(va), as_span(vb)));
        }
    out.add("cor" + suffix, stats::mean(stats::finite_only(cors)));

    std::vector<double> sds;
    for (Eigen::Index j = 0; j < d; ++j) {
        const Vector c = coef.col(j);
        sds.push_back(stats::sd(as_span(c)));
    }
    out.add("sd_ratio" + suffix, stats::ratio(stats::max(sds), stats::min(sds)));
    out.add("sd_mean" + suffix, stats::mean(sds));
}

} // namespace detail

inline FeatureVector limo(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("limo", fo, control, seed, [](SetContext& ctx) {
        ctx.fo.grid();
        const Matrix coef = cell_coefficients(ctx.fo);
        Matrix unit = coef;
        std::vector<double> lengths, ratios;
        for (Eigen::Index i = 0; i < coef.rows(); ++i) {
            const double len = coef.row(i).norm();
            lengths.push_back(len);
            if (len > 0.0) unit.row(i) /= len;
            const Vector a = coef.row(i).cwiseAbs().transpose();
            ratios.push_back(stats::ratio(a.maxCoeff(), a.minCoeff()));
        }
        FeatureVector out("limo");
        detail::limo_block(out, coef, "");
        detail::limo_block(out, unit, ".norm");
        out.add("length.mean", stats::mean(lengths));
        out.add("length.sd", stats::sd(lengths));
        const auto r = stats::finite_only(ratios);
        out.add("ratio.mean", stats::mean(r));
        out.add("ratio.sd", stats::sd(r));
        return out;
    });
}

/// Share of components needed to reach `threshold` of the total variance, and
/// the variance share of the first component. Both NaN for a degenerate matrix.
struct ExplainedVariance {
    double proportion = stats::nan;
    double first = stats::nan;
};

inline ExplainedVariance explained_variance(const Matrix& m, double threshold) {
    ExplainedVariance out;
    if (!m.allFinite()) return out;
    const Vector ev = sym_eigen(m).values.cwiseMax(0.0);
    const double total = ev.sum();
    if (!(total > 0.0)) return out;
    double cum = 0.0;
    Eigen::Index k = 0;
    while (k < ev.size()) {
        cum += ev[k++];
        if (cum >= threshold * total * (1.0 - 1e-12)) break;
    }
    out.proportion = static_cast<double>(k) / static_cast<double>(ev.size());
    out.first = ev[0] / total;
    return out;
}

/// Correlation matrix; NaN entries when a column has zero variance.
inline Matrix correlation_matrix(const Matrix& x) {
    const Matrix c = covariance(x);
    const Vector s = c.diagonal().cwiseSqrt();
    Matrix r(c.rows(), c.cols());
    for (Eigen::Index i = 0; i < c.rows(); ++i)
        for (Eigen::Index j = 0; j < c.cols(); ++j)
            r(i, j) = s[i] > 0.0 && s[j] > 0.0 ? c(i, j) / (s[i] * s[j]) : stats::nan;
    return r;
}

inline FeatureVector pca(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set("pca", fo, control, seed, [](SetContext& ctx) {
        const auto n = ctx.fo.n_obs();
        const auto d = ctx.fo.dim();
        if (n <= d + 1) throw InvalidArgument("pca needs more than dim + 1 observations");
        const Matrix& x = ctx.fo.points();
        Matrix xy(x.rows(), x.cols() + 1);
        xy << x, ctx.fo.objectives();

        const std::vector<std::pair<std::string, Matrix>> combos{{"cov_x", covariance(x)},
                                                                 {"cor_x", correlation_matrix(x)},
                                                                 {"cov_init", covariance(xy)},
                                                                 {"cor_init", correlation_matrix(xy)}};
        std::vector<ExplainedVariance> res;
        for (const auto& [key, m] : combos) res.push_back(explained_variance(m, ctx.control.number("pca." + key, 0.9)));
        FeatureVector out("pca");
        for (std::size_t k = 0; k < combos.size(); ++k) out.add("expl_var." + combos[k].first, res[k].proportion);
        for (std::size_t k = 0; k < combos.size(); ++k) out.add("expl_var_PC1." + combos[k].first, res[k].first);
        return out;
    });
}

} // namespace lkit

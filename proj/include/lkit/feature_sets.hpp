#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lkit/features/cm.hpp"
#include "lkit/features/dist.hpp"
#include "lkit/features/ela.hpp"
#include "lkit/features/gcm.hpp"
#include "lkit/features/ic.hpp"
#include "lkit/features/misc.hpp"

namespace lkit {

using FeatureSetFn = std::function<FeatureVector(const FeatureObject&, const ControlParams&, std::uint64_t)>;

struct FeatureSetInfo {
    std::string id;
    bool requires_function = false;
    bool requires_blocks = false;
    bool stochastic = false;
    std::string description;
    FeatureSetFn compute;
};

/// All sets in canonical order.
inline const std::vector<FeatureSetInfo>& feature_sets() {
    static const std::vector<FeatureSetInfo> sets{
        {"ela_conv", true, false, true, "convexity of convex combinations of sample pairs", ela_conv},
        {"ela_curv", true, false, true, "gradient and Hessian based curvature", ela_curv},
        {"ela_distr", false, false, false, "distribution of the objective values", ela_distr},
        {"ela_level", false, false, true, "levelset classification errors", ela_level},
        {"ela_local", true, false, true, "local searches and clustered optima", ela_local},
        {"ela_meta", false, false, false, "linear and quadratic meta models", ela_meta},
        {"cm_angle", false, true, false, "angle between best and worst point per cell", cm_angle},
        {"cm_grad", false, true, false, "gradient homogeneity per cell", cm_grad},
        {"cm_conv", false, true, false, "convexity of successive cells", cm_conv},
        {"gcm", false, true, false, "generalized cell mapping", gcm_features},
        {"bt", false, true, false, "barrier trees", bt_features},
        {"nbc", false, false, false, "nearest better clustering", nbc},
        {"disp", false, false, false, "dispersion of the best points", disp},
        {"ic", false, false, true, "information content of the fitness sequence", ic_features},
        {"basic", false, false, false, "basic information about the design", basic},
        {"limo", false, true, false, "linear models per cell", limo},
        {"pca", false, false, false, "principal components", pca},
    };
    return sets;
}

inline const FeatureSetInfo& feature_set(const std::string& id) {
    for (const auto& s : feature_sets())
        if (s.id == id) return s;
    std::string known;
    for (const auto& s : feature_sets()) known += (known.empty() ? "" : ", ") + s.id;
    throw InvalidArgument("unknown feature set '" + id + "' (available: " + known + ")");
}

/// Sets that need no extra evaluations and/or no cell grid when the flags are false.
inline std::vector<std::string> list_feature_sets(bool allow_evaluations = true, bool allow_cellmapping = true) {
    std::vector<std::string> out;
    for (const auto& s : feature_sets()) {
        if (!allow_evaluations && s.requires_function) continue;
        if (!allow_cellmapping && s.requires_blocks) continue;
        out.push_back(s.id);
    }
    return out;
}

/// Expands "all", group prefixes ("ela", "cm") and comma lists into set ids in
/// canonical order, without duplicates.
inline std::vector<std::string> resolve_sets(const std::vector<std::string>& requested) {
    std::vector<bool> chosen(feature_sets().size(), false);
    for (const auto& r : requested) {
        bool hit = false;
        for (std::size_t i = 0; i < feature_sets().size(); ++i) {
            const auto& id = feature_sets()[i].id;
            if (r == "all" || r == id || id.rfind(r + "_", 0) == 0) {
                chosen[i] = true;
                hit = true;
            }
        }
        if (!hit) feature_set(r);
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < chosen.size(); ++i)
        if (chosen[i]) out.push_back(feature_sets()[i].id);
    return out;
}

inline FeatureVector calculate_feature_set(const FeatureObject& fo, const std::string& set, const ControlParams& control = {},
                                           std::uint64_t seed = 0) {
    return feature_set(set).compute(fo, control, seed);
}

namespace detail {

inline void stat_names(std::vector<std::string>& out, const std::string& prefix, std::initializer_list<stats::Stat> which) {
    for (auto s : which) out.push_back(prefix + "." + stats::suffix(s));
}

inline void cost_names(std::vector<std::string>& out, const std::string& prefix) {
    out.push_back(prefix + ".costs_fun_evals");
    out.push_back(prefix + ".costs_runtime");
}

} // namespace detail

/// The names a set emits under `control`, without computing anything.
inline std::vector<std::string> feature_names(const std::string& set, const ControlParams& control = {}) {
    feature_set(set);
    std::vector<std::string> n;
    auto add = [&](std::initializer_list<const char*> suffixes) {
        for (const char* s : suffixes) n.push_back(set + "." + s);
    };
    const auto& five = detail::five_stats;
    if (set == "ela_conv") {
        add({"conv_prob", "lin_prob", "lin_dev.orig", "lin_dev.abs"});
    } else if (set == "ela_curv") {
        for (const char* q : {"grad_norm", "grad_scale", "hessian_cond"}) {
            detail::stat_names(n, set + "." + q, detail::seven_stats);
            n.push_back(set + "." + q + ".nas");
        }
    } else if (set == "ela_distr") {
        add({"skewness", "kurtosis", "number_of_peaks"});
    } else if (set == "ela_level") {
        const auto qs = control.numbers("ela_level.quantiles", {0.10, 0.25, 0.50});
        const auto cls = control.list("ela_level.classifiers", {"lda", "qda", "gmda"});
        std::vector<std::string> kinds;
        for (const auto& c : cls) kinds.emplace_back(to_string(parse_classifier(c)));
        for (double q : qs)
            for (const auto& k : kinds) n.push_back(set + ".mmce_" + k + "_" + detail::percent_label(q));
        for (double q : qs)
            for (std::size_t a = 0; a < kinds.size(); ++a)
                for (std::size_t b = a + 1; b < kinds.size(); ++b)
                    n.push_back(set + "." + kinds[a] + "_" + kinds[b] + "_" + detail::percent_label(q));
    } else if (set == "ela_local") {
        add({"n_loc_opt.abs", "n_loc_opt.rel", "best2mean_contr.orig", "basin_sizes.avg_best", "basin_sizes.avg_non_best",
             "basin_sizes.avg_worst"});
        detail::stat_names(n, set + ".fun_evals", detail::seven_stats);
    } else if (set == "ela_meta") {
        add({"lin_simple.adj_r2", "lin_simple.intercept", "lin_simple.coef.min", "lin_simple.coef.max",
             "lin_simple.coef.max_by_min", "lin_w_interact.adj_r2", "quad_simple.adj_r2", "quad_simple.cond",
             "quad_w_interact.adj_r2"});
    } else if (set == "cm_angle") {
        add({"dist_ctr2best.mean", "dist_ctr2best.sd", "dist_ctr2worst.mean", "dist_ctr2worst.sd", "angle.mean", "angle.sd",
             "y_ratio_best2worst.mean", "y_ratio_best2worst.sd"});
    } else if (set == "cm_grad") {
        add({"mean", "sd"});
    } else if (set == "cm_conv") {
        add({"convex.hard", "concave.hard", "convex.soft", "concave.soft"});
    } else if (set == "gcm") {
        for (auto a : detail::approaches(control, "gcm.approaches")) {
            const auto p = set + "." + to_string(a);
            for (const char* s : {"attractors", "pcells", "tcells", "uncertain"}) n.push_back(p + "." + s);
            for (const char* s : {"basin_prob", "basin_certain", "basin_uncertain"}) detail::stat_names(n, p + "." + s, five);
            for (const char* s : {"best_attr.prob", "best_attr.no_cells", "cells", "empty_ratio"}) n.push_back(p + "." + s);
            detail::cost_names(n, p);
        }
        return n;
    } else if (set == "bt") {
        for (auto a : detail::approaches(control, "bt.approaches")) {
            const auto p = set + "." + to_string(a);
            for (const char* s : {"leaves", "levels", "depth", "depth_levels_ratio", "levels_nodes_ratio"}) n.push_back(p + "." + s);
            for (const char* s : {"diffs", "level_diffs", "attractor_dists"}) detail::stat_names(n, p + "." + s, five);
            for (const char* s : {"basin_ratio.certain", "basin_ratio.uncertain", "basin_ratio.most_likely"}) n.push_back(p + "." + s);
            detail::stat_names(n, p + ".basin_intersection", five);
            n.push_back(p + ".basin_range");
            detail::cost_names(n, p);
        }
        return n;
    } else if (set == "nbc") {
        add({"nn_nb.sd_ratio", "nn_nb.mean_ratio", "nn_nb.cor", "dist_ratio.coeff_var", "nb_fitness.cor"});
    } else if (set == "disp") {
        const auto qs = control.numbers("disp.quantiles", {0.02, 0.05, 0.10, 0.25});
        for (const char* s : {"ratio_mean", "ratio_median", "diff_mean", "diff_median"})
            for (double q : qs) n.push_back(set + "." + s + "_" + detail::percent_label(q));
    } else if (set == "ic") {
        add({"h.max", "eps.s", "eps.max", "m0", "eps.ratio"});
    } else if (set == "basic") {
        add({"dim", "observations", "lower_min", "lower_max", "upper_min", "upper_max", "objective_min", "objective_max",
             "blocks_min", "blocks_max", "cells_filled", "cells_total", "minimize_fun", "cells_filled_ratio"});
    } else if (set == "limo") {
        add({"avg_length", "cor", "sd_ratio", "sd_mean", "avg_length.norm", "cor.norm", "sd_ratio.norm", "sd_mean.norm",
             "length.mean", "length.sd", "ratio.mean", "ratio.sd"});
    } else if (set == "pca") {
        add({"expl_var.cov_x", "expl_var.cor_x", "expl_var.cov_init", "expl_var.cor_init", "expl_var_PC1.cov_x",
             "expl_var_PC1.cor_x", "expl_var_PC1.cov_init", "expl_var_PC1.cor_init"});
    }
    detail::cost_names(n, set);
    return n;
}

/// Outcome of one set within a multi-set computation.
struct SetResult {
    std::string set;
    std::optional<FeatureVector> values;
    std::string error;
    bool unavailable = false;  // the object lacks a function or grid the set needs

    bool ok() const { return values.has_value(); }
};

/// Computes each set independently; a failing set is recorded and the rest go on.
inline std::vector<SetResult> calculate_features(const FeatureObject& fo, const std::vector<std::string>& sets,
                                                 const ControlParams& control = {}, std::uint64_t seed = 0) {
    std::vector<SetResult> out;
    for (const auto& id : resolve_sets(sets)) {
        SetResult r{id, std::nullopt, "", false};
        try {
            r.values = calculate_feature_set(fo, id, control, seed);
        } catch (const Unavailable& e) {
            r.error = e.what();
            r.unavailable = true;
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// Concatenated values; failed sets contribute missing entries under their names.
inline FeatureVector flatten(const std::vector<SetResult>& results, const ControlParams& control = {}) {
    FeatureVector all;
    for (const auto& r : results) {
        if (r.ok()) {
            all.append(*r.values);
            continue;
        }
        for (const auto& name : feature_names(r.set, control)) all.add_qualified(name, FeatureValue::missing());
    }
    return all;
}

} // namespace lkit

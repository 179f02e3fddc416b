#pragma once

// Renderer-independent plot data as JSON. Every document carries `kind` and
// `schema_version`; styling is left to the renderer.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lkit/features/gcm.hpp"
#include "lkit/features/ic.hpp"
#include "lkit/problems.hpp"

namespace lkit {

using Json = nlohmann::json;

inline constexpr int plot_schema_version = 1;

namespace detail {

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const Vector& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number_or_null(x));
    return a;
}

inline void require_2d(std::size_t d, const char* what) {
    if (d != 2) throw InvalidArgument(std::string(what) + " requires 2 dimensions");
}

} // namespace detail

/// Cells with their class (attractor, uncertain, certain, empty), basin id and
/// one arrow per reachable attractor whose length is the absorption probability.
inline Json cell_mapping_plot_data(const TransitionModel& m) {
    detail::require_2d(m.grid.dim(), "cell mapping plot");
    Json doc{{"kind", "cellmapping"},
             {"schema_version", plot_schema_version},
             {"approach", to_string(m.approach)},
             {"blocks", m.grid.blocks()},
             {"cell_widths", detail::to_json(m.grid.cell_widths())}};
    Json cells = Json::array();
    for (std::size_t c = 0; c < m.grid.total_cells(); ++c) {
        const Vector ctr = m.grid.center(c);
        Json cell{{"id", c}, {"coords", m.grid.coordinates(c)}, {"center", detail::to_json(ctr)}};
        const long s = m.state_of[c];
        if (s < 0) {
            cell["class"] = "empty";
            cell["basin"] = nullptr;
            cell["value"] = nullptr;
            cell["arrows"] = Json::array();
            cells.push_back(std::move(cell));
            continue;
        }
        const auto st = static_cast<std::size_t>(s);
        const auto row = m.absorption.row(static_cast<Eigen::Index>(s));
        Eigen::Index basin = 0;
        row.maxCoeff(&basin);
        cell["class"] = m.is_attractor(st) ? "attractor" : (m.uncertain[st] ? "uncertain" : "certain");
        cell["basin"] = basin;
        cell["value"] = detail::number_or_null(m.values[st]);
        Json arrows = Json::array();
        if (!m.is_attractor(st)) {
            for (Eigen::Index a = 0; a < row.size(); ++a) {
                if (!(row[a] > 1e-12)) continue;
                const auto target = m.cells[m.attractors[static_cast<std::size_t>(a)]];
                Vector dir = m.grid.center(target) - ctr;
                if (dir.norm() > 0) dir /= dir.norm();
                arrows.push_back({{"attractor", target}, {"direction", detail::to_json(dir)}, {"length", row[a]}});
            }
        }
        cell["arrows"] = std::move(arrows);
        cells.push_back(std::move(cell));
    }
    doc["cells"] = std::move(cells);
    Json attractors = Json::array();
    for (auto a : m.attractors) attractors.push_back(m.cells[a]);
    doc["attractors"] = std::move(attractors);
    return doc;
}

inline Json cell_mapping_plot_data(const FeatureObject& fo, CellApproach approach = CellApproach::min) {
    detail::require_2d(fo.dim(), "cell mapping plot");
    return cell_mapping_plot_data(build_transition_model(fo, approach));
}

/// Nodes with role (leaf, saddle, or root for the synthetic top of a
/// disconnected grid), height, cell, centre and level. The 3d mode adds the
/// representative surface.
inline Json barrier_tree_plot_data(const TransitionModel& m, const std::string& mode = "2d") {
    detail::require_2d(m.grid.dim(), "barrier tree plot");
    if (mode != "2d" && mode != "3d") throw InvalidArgument("barrier tree mode must be 2d or 3d");
    const auto t = build_barrier_tree(m);
    Json doc{{"kind", "barriertree" + mode}, {"schema_version", plot_schema_version}, {"approach", to_string(m.approach)},
             {"blocks", m.grid.blocks()}, {"root", t.root}};
    Json nodes = Json::array();
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& n = t.nodes[i];
        const bool synthetic = n.cell == BarrierTree::no_cell;
        Json node{{"id", i},
                  {"role", synthetic ? "root" : (n.leaf() ? "leaf" : "saddle")},
                  {"is_root", static_cast<int>(i) == t.root},
                  {"height", n.height},
                  {"level", n.level},
                  {"parent", n.parent >= 0 ? Json(n.parent) : Json(nullptr)},
                  {"cell", synthetic ? Json(nullptr) : Json(n.cell)},
                  {"center", synthetic ? Json(nullptr) : detail::to_json(m.grid.center(n.cell))}};
        nodes.push_back(std::move(node));
    }
    doc["nodes"] = std::move(nodes);
    if (mode == "3d") {
        const auto b = m.grid.blocks();
        Json xs = Json::array(), ys = Json::array(), z = Json::array();
        for (int i = 0; i < b[0]; ++i) xs.push_back(m.grid.center(m.grid.id({i, 0}))[0]);
        for (int j = 0; j < b[1]; ++j) ys.push_back(m.grid.center(m.grid.id({0, j}))[1]);
        for (int j = 0; j < b[1]; ++j) {
            Json row = Json::array();
            for (int i = 0; i < b[0]; ++i) {
                const long s = m.state_of[m.grid.id({i, j})];
                row.push_back(s < 0 ? Json(nullptr) : Json(m.values[static_cast<std::size_t>(s)]));
            }
            z.push_back(std::move(row));
        }
        doc["surface"] = {{"x", xs}, {"y", ys}, {"z", z}};
    }
    return doc;
}

inline Json barrier_tree_plot_data(const FeatureObject& fo, CellApproach approach = CellApproach::min, const std::string& mode = "2d") {
    detail::require_2d(fo.dim(), "barrier tree plot");
    return barrier_tree_plot_data(build_transition_model(fo, approach), mode);
}

/// H and M over epsilon plus the four markers; a marker is null when undefined.
inline Json info_content_plot_data(const ICCurves& c) {
    Json eps = Json::array(), log_eps = Json::array();
    for (double e : c.epsilon) {
        eps.push_back(e);
        log_eps.push_back(e > 0 ? Json(std::log10(e)) : Json(nullptr));
    }
    auto marker = [](double log_epsilon, double value) {
        if (!std::isfinite(log_epsilon) || !std::isfinite(value)) return Json(nullptr);
        return Json{{"log10_epsilon", log_epsilon}, {"value", value}};
    };
    const double log_max = c.eps_max > 0 ? std::log10(c.eps_max) : stats::nan;
    Json markers{{"h_max", c.eps_max == 0.0 ? Json{{"log10_epsilon", nullptr}, {"value", c.h_max}} : marker(log_max, c.h_max)},
                 {"m0", std::isfinite(c.m0) ? Json{{"log10_epsilon", nullptr}, {"value", c.m0}} : Json(nullptr)},
                 {"eps_s", marker(c.eps_s, 0.0)},
                 {"eps_r", marker(c.eps_ratio, 0.0)}};
    return Json{{"kind", "infocontent"}, {"schema_version", plot_schema_version}, {"epsilon", eps}, {"log10_epsilon", log_eps},
                {"h", c.h}, {"m", c.m}, {"markers", markers},
                {"features", {{"h_max", detail::number_or_null(c.h_max)}, {"eps_s", detail::number_or_null(c.eps_s)},
                              {"eps_max", detail::number_or_null(c.eps_max)}, {"m0", detail::number_or_null(c.m0)},
                              {"eps_ratio", detail::number_or_null(c.eps_ratio)}}}};
}

inline Json info_content_plot_data(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return info_content_plot_data(ic_curves(fo, control, seed));
}

/// Fold x feature selection matrix; a feature is important when selected in
/// at least `threshold` of the folds.
inline Json feature_importance_plot_data(const std::vector<std::vector<std::string>>& selections, double threshold = 0.8) {
    if (selections.empty()) throw InvalidArgument("feature importance needs at least one fold");
    std::map<std::string, std::vector<bool>> sel;
    for (std::size_t f = 0; f < selections.size(); ++f)
        for (const auto& name : selections[f]) {
            auto& v = sel[name];
            v.resize(selections.size(), false);
            v[f] = true;
        }
    struct Row {
        std::string name;
        double freq;
        std::vector<bool> selected;
    };
    std::vector<Row> rows;
    for (auto& [name, v] : sel) {
        const double k = static_cast<double>(std::count(v.begin(), v.end(), true));
        rows.push_back({name, k / static_cast<double>(selections.size()), v});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.freq > b.freq; });
    Json features = Json::array();
    for (const auto& r : rows)
        features.push_back({{"name", r.name}, {"frequency", r.freq}, {"important", r.freq >= threshold - 1e-12}, {"selected", r.selected}});
    return Json{{"kind", "featureimportance"}, {"schema_version", plot_schema_version}, {"folds", selections.size()},
                {"threshold", threshold}, {"features", features}};
}

/// Values on a regular grid over the problem's box: a series for d = 1, a
/// matrix z[j][i] (row j along x2) for d = 2. Failed evaluations become null.
inline Json function_grid(const Problem& p, std::size_t resolution) {
    if (p.dim > 2) throw InvalidArgument("function grid requires 1 or 2 dimensions");
    if (resolution < 2) throw InvalidArgument("resolution >= 2 required");
    auto axis = [&](Eigen::Index j) {
        std::vector<double> a(resolution);
        for (std::size_t k = 0; k < resolution; ++k)
            a[k] = p.lower[j] + (p.upper[j] - p.lower[j]) * static_cast<double>(k) / static_cast<double>(resolution - 1);
        return a;
    };
    auto value = [&](const Vector& x) {
        try {
            return detail::number_or_null(p(x));
        } catch (const Error&) {
            return Json(nullptr);
        }
    };
    Json doc{{"kind", "function"}, {"schema_version", plot_schema_version}, {"problem", p.name}, {"dim", p.dim}, {"resolution", resolution}};
    const auto xs = axis(0);
    doc["x"] = xs;
    if (p.dim == 1) {
        Json ys = Json::array();
        for (double x : xs) ys.push_back(value(Vector::Constant(1, x)));
        doc["y"] = std::move(ys);
        return doc;
    }
    const auto ys = axis(1);
    doc["y"] = ys;
    Json z = Json::array();
    for (double y : ys) {
        Json row = Json::array();
        for (double x : xs) row.push_back(value((Vector(2) << x, y).finished()));
        z.push_back(std::move(row));
    }
    doc["z"] = std::move(z);
    return doc;
}

} // namespace lkit

#pragma once

// Generalized cell mapping: the grid as an absorbing Markov chain, plus the
// barrier tree built from the same cell representatives.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lkit/cluster.hpp"
#include "lkit/features/common.hpp"

namespace lkit {

enum class CellApproach { min, mean, near };
enum class TransitionWeighting { improvement, uniform };

inline std::string to_string(CellApproach a) {
    switch (a) {
    case CellApproach::min: return "min";
    case CellApproach::mean: return "mean";
    case CellApproach::near: return "near";
    }
    return "?";
}

inline CellApproach parse_cell_approach(const std::string& s) {
    if (s == "min") return CellApproach::min;
    if (s == "mean") return CellApproach::mean;
    if (s == "near") return CellApproach::near;
    throw InvalidArgument("unknown cell approach '" + s + "' (expected min, mean or near)");
}

inline TransitionWeighting parse_weighting(const std::string& s) {
    if (s == "improvement") return TransitionWeighting::improvement;
    if (s == "uniform") return TransitionWeighting::uniform;
    throw InvalidArgument("unknown gcm.weighting '" + s + "' (expected improvement or uniform)");
}

/// Absorbing Markov chain over the non-empty cells. States are numbered in
/// increasing cell id; empty cells are not states.
struct TransitionModel {
    CellApproach approach = CellApproach::min;
    CellGrid grid;
    std::vector<std::size_t> cells;       // state -> cell id
    std::vector<long> state_of;           // cell id -> state, -1 for empty cells
    std::vector<double> values;           // representative value per state
    std::vector<std::vector<std::pair<std::size_t, double>>> transitions;  // per state: (target state, probability)
    std::vector<std::size_t> attractors;  // states, increasing
    std::vector<long> attractor_index;    // state -> column in absorption, -1 otherwise
    Matrix absorption;                    // states x attractors
    std::vector<bool> uncertain;

    std::size_t n_states() const { return cells.size(); }
    bool is_attractor(std::size_t s) const { return attractor_index[s] >= 0; }

    /// Row-stochastic matrix, attractors carry a self-loop.
    Matrix transition_matrix() const {
        Matrix t = Matrix::Zero(static_cast<Eigen::Index>(n_states()), static_cast<Eigen::Index>(n_states()));
        for (std::size_t s = 0; s < n_states(); ++s) {
            if (is_attractor(s)) t(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = 1.0;
            for (auto [j, p] : transitions[s]) t(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) += p;
        }
        return t;
    }

    /// Attractor state whose value is smallest (lowest state on ties).
    std::size_t best_attractor() const {
        std::size_t best = attractors.front();
        for (auto a : attractors)
            if (values[a] < values[best]) best = a;
        return best;
    }
};

/// Chain from explicit representative values per grid cell (NaN marks an empty cell).
inline TransitionModel build_transition_model(const CellGrid& grid, const std::vector<double>& representative,
                                              CellApproach approach = CellApproach::min,
                                              TransitionWeighting weighting = TransitionWeighting::improvement) {
    if (representative.size() != grid.total_cells()) throw InvalidArgument("one representative value per cell expected");
    TransitionModel m{approach, grid, {}, {}, {}, {}, {}, {}, {}, {}};
    m.state_of.assign(grid.total_cells(), -1);
    for (std::size_t c = 0; c < grid.total_cells(); ++c) {
        if (std::isnan(representative[c])) continue;
        m.state_of[c] = static_cast<long>(m.cells.size());
        m.cells.push_back(c);
        m.values.push_back(representative[c]);
    }
    if (m.cells.empty()) throw InvalidArgument("every cell is empty");
    const auto n = m.n_states();
    m.transitions.resize(n);
    m.attractor_index.assign(n, -1);
    for (std::size_t s = 0; s < n; ++s) {
        double total = 0.0;
        for (auto nc : grid.neighbors(m.cells[s])) {
            const long t = m.state_of[nc];
            if (t < 0 || !(m.values[static_cast<std::size_t>(t)] < m.values[s])) continue;
            const double w = weighting == TransitionWeighting::uniform ? 1.0 : m.values[s] - m.values[static_cast<std::size_t>(t)];
            m.transitions[s].emplace_back(static_cast<std::size_t>(t), w);
            total += w;
        }
        if (m.transitions[s].empty()) {
            m.attractor_index[s] = static_cast<long>(m.attractors.size());
            m.attractors.push_back(s);
        } else {
            for (auto& tr : m.transitions[s]) tr.second /= total;
        }
    }

    // Transitions only lead to strictly smaller values, so processing states
    // in ascending value resolves every absorption row from finished ones.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return m.values[a] < m.values[b]; });
    m.absorption = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m.attractors.size()));
    for (auto s : order) {
        const auto si = static_cast<Eigen::Index>(s);
        if (m.is_attractor(s)) {
            m.absorption(si, m.attractor_index[s]) = 1.0;
            continue;
        }
        for (auto [t, p] : m.transitions[s]) m.absorption.row(si) += p * m.absorption.row(static_cast<Eigen::Index>(t));
    }
    m.uncertain.assign(n, false);
    for (std::size_t s = 0; s < n; ++s) {
        if (m.is_attractor(s)) continue;
        int reach = 0;
        for (Eigen::Index a = 0; a < m.absorption.cols(); ++a) reach += m.absorption(static_cast<Eigen::Index>(s), a) > 1e-12 ? 1 : 0;
        m.uncertain[s] = reach >= 2;
    }
    return m;
}

/// Representative objective per cell: best, mean, or that of the point
/// closest to the cell centre. NaN for empty cells.
inline std::vector<double> cell_representatives(const FeatureObject& fo, CellApproach approach) {
    const auto& grid = fo.grid();
    const auto& y = fo.fitness();
    const auto& x = fo.points();
    std::vector<double> rep(grid.total_cells(), stats::nan);
    for (std::size_t c = 0; c < grid.total_cells(); ++c) {
        const auto& m = fo.cells()[c];
        if (m.empty()) continue;
        switch (approach) {
        case CellApproach::min: {
            double v = std::numeric_limits<double>::infinity();
            for (auto i : m) v = std::min(v, y[static_cast<Eigen::Index>(i)]);
            rep[c] = v;
            break;
        }
        case CellApproach::mean: {
            double v = 0.0;
            for (auto i : m) v += y[static_cast<Eigen::Index>(i)];
            rep[c] = v / static_cast<double>(m.size());
            break;
        }
        case CellApproach::near: {
            const Vector ctr = grid.center(c);
            double best = std::numeric_limits<double>::infinity();
            for (auto i : m) {
                const double dist = (x.row(static_cast<Eigen::Index>(i)).transpose() - ctr).norm();
                if (dist < best) {
                    best = dist;
                    rep[c] = y[static_cast<Eigen::Index>(i)];
                }
            }
            break;
        }
        }
    }
    return rep;
}

inline TransitionModel build_transition_model(const FeatureObject& fo, CellApproach approach,
                                              TransitionWeighting weighting = TransitionWeighting::improvement) {
    return build_transition_model(fo.grid(), cell_representatives(fo, approach), approach, weighting);
}

/// Basin sizes of each attractor: certain cells only, and certain plus every
/// uncertain cell that reaches it. Attractors count toward their own basin.
struct BasinSizes {
    std::vector<double> certain;
    std::vector<double> with_uncertain;
    std::vector<double> most_likely;
};

inline BasinSizes basin_sizes(const TransitionModel& m) {
    const auto k = m.attractors.size();
    BasinSizes b{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
    for (std::size_t s = 0; s < m.n_states(); ++s) {
        const auto row = m.absorption.row(static_cast<Eigen::Index>(s));
        Eigen::Index arg = 0;
        row.maxCoeff(&arg);
        b.most_likely[static_cast<std::size_t>(arg)] += 1.0;
        for (std::size_t a = 0; a < k; ++a) {
            if (!(row[static_cast<Eigen::Index>(a)] > 1e-12)) continue;
            b.with_uncertain[a] += 1.0;
            if (!m.uncertain[s]) b.certain[a] += 1.0;
        }
    }
    return b;
}

namespace detail {

inline std::vector<CellApproach> approaches(const ControlParams& c, const std::string& key) {
    std::vector<CellApproach> out;
    for (const auto& a : c.list(key, {"min", "mean", "near"})) out.push_back(parse_cell_approach(a));
    return out;
}

} // namespace detail

inline void gcm_approach_features(FeatureVector& out, const TransitionModel& m, std::size_t total_cells) {
    const std::string p = to_string(m.approach) + ".";
    const double total = static_cast<double>(total_cells);
    std::size_t n_uncertain = 0;
    for (bool u : m.uncertain) n_uncertain += u ? 1 : 0;
    const auto n_attr = m.attractors.size();

    out.add_count(p + "attractors", static_cast<std::int64_t>(n_attr));
    out.add(p + "pcells", static_cast<double>(n_attr) / total);
    out.add(p + "tcells", static_cast<double>(m.n_states() - n_attr) / total);
    out.add(p + "uncertain", static_cast<double>(n_uncertain) / total);

    std::vector<double> prob(n_attr);
    for (std::size_t a = 0; a < n_attr; ++a) prob[a] = m.absorption.col(static_cast<Eigen::Index>(a)).mean();
    const auto sizes = basin_sizes(m);
    detail::add_stats(out, p + "basin_prob", prob, detail::five_stats);
    detail::add_stats(out, p + "basin_certain", sizes.certain, detail::five_stats);
    detail::add_stats(out, p + "basin_uncertain", sizes.with_uncertain, detail::five_stats);

    const double best_value = m.values[m.best_attractor()];
    double best_prob = 0.0;
    std::int64_t best_cells = 0;
    for (std::size_t a = 0; a < n_attr; ++a) {
        if (m.values[m.attractors[a]] != best_value) continue;
        best_prob += prob[a];
        ++best_cells;
    }
    out.add(p + "best_attr.prob", best_prob);
    out.add_count(p + "best_attr.no_cells", best_cells);
    out.add_count(p + "cells", static_cast<std::int64_t>(m.n_states()));
    out.add(p + "empty_ratio", static_cast<double>(total_cells - m.n_states()) / total);
}

inline FeatureVector gcm_features(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set(
        "gcm", fo, control, seed,
        [](SetContext& ctx) {
            const auto weighting = parse_weighting(ctx.control.text("gcm.weighting", "improvement"));
            FeatureVector out("gcm");
            for (auto a : detail::approaches(ctx.control, "gcm.approaches")) {
                const auto start = detail::Clock::now();
                const auto m = build_transition_model(ctx.fo, a, weighting);
                gcm_approach_features(out, m, ctx.fo.grid().total_cells());
                detail::add_costs(out, "gcm." + to_string(a), 0, detail::seconds_since(start));
            }
            return out;
        },
        false);
}

/// Merge tree of the representative surface. Leaves are local minima, inner
/// nodes are saddle cells where two basins meet. Grids whose non-empty cells
/// fall apart into several components get a synthetic root at the largest
/// representative value.
struct BarrierTree {
    static constexpr std::size_t no_cell = std::numeric_limits<std::size_t>::max();

    struct Node {
        std::size_t cell = no_cell;
        double height = 0.0;
        int parent = -1;
        std::vector<int> children;
        int level = 0;
        bool leaf() const { return children.empty(); }
    };

    CellApproach approach = CellApproach::min;
    std::vector<Node> nodes;
    int root = -1;

    std::vector<int> leaves() const {
        std::vector<int> out;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].leaf()) out.push_back(static_cast<int>(i));
        return out;
    }
    int levels() const {
        int l = 0;
        for (const auto& n : nodes) l = std::max(l, n.level);
        return l;
    }
    double min_leaf_height() const {
        double h = std::numeric_limits<double>::infinity();
        for (int i : leaves()) h = std::min(h, nodes[static_cast<std::size_t>(i)].height);
        return h;
    }
    double depth() const { return nodes[static_cast<std::size_t>(root)].height - min_leaf_height(); }
};

inline BarrierTree build_barrier_tree(const TransitionModel& m) {
    const auto n = m.n_states();
    if (n < 2) throw InvalidArgument("a barrier tree needs at least two non-empty cells");
    BarrierTree t;
    t.approach = m.approach;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return m.values[a] < m.values[b]; });

    DisjointSets sets(n);
    std::vector<bool> done(n, false);
    std::vector<int> top(n, -1);  // component representative -> current top node
    auto add_node = [&](std::size_t s) {
        BarrierTree::Node node;
        node.cell = m.cells[s];
        node.height = m.values[s];
        t.nodes.push_back(node);
        return static_cast<int>(t.nodes.size() - 1);
    };
    for (auto s : order) {
        std::vector<std::size_t> roots;
        for (auto nc : m.grid.neighbors(m.cells[s])) {
            const long o = m.state_of[nc];
            if (o < 0 || !done[static_cast<std::size_t>(o)]) continue;
            const auto r = sets.find(static_cast<std::size_t>(o));
            if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
        }
        done[s] = true;
        if (roots.empty()) {
            top[s] = add_node(s);
            continue;
        }
        int node = -1;
        if (roots.size() >= 2) {
            node = add_node(s);
            for (auto r : roots) {
                t.nodes[static_cast<std::size_t>(top[r])].parent = node;
                t.nodes[static_cast<std::size_t>(node)].children.push_back(top[r]);
            }
        } else {
            node = top[roots.front()];
        }
        for (auto r : roots) sets.unite(r, s);
        top[sets.find(s)] = node;
    }

    std::vector<int> tops;
    for (std::size_t s = 0; s < n; ++s)
        if (sets.find(s) == s) tops.push_back(top[s]);
    if (tops.size() == 1) {
        t.root = tops.front();
    } else {
        BarrierTree::Node r;
        r.height = *std::max_element(m.values.begin(), m.values.end());
        r.children = tops;
        t.nodes.push_back(r);
        t.root = static_cast<int>(t.nodes.size() - 1);
        for (int c : tops) t.nodes[static_cast<std::size_t>(c)].parent = t.root;
    }
    // levels: distance from the root; nodes are created bottom-up, so walk top-down
    for (int i = static_cast<int>(t.nodes.size()) - 1; i >= 0; --i) {
        auto& node = t.nodes[static_cast<std::size_t>(i)];
        if (node.parent >= 0) node.level = t.nodes[static_cast<std::size_t>(node.parent)].level + 1;
    }
    return t;
}

inline void bt_approach_features(FeatureVector& out, const TransitionModel& m, const BarrierTree& t) {
    const std::string p = to_string(m.approach) + ".";
    const auto leaves = t.leaves();
    const bool single = leaves.size() < 2;
    const int levels = t.levels();

    out.add_count(p + "leaves", static_cast<std::int64_t>(leaves.size()));
    out.add_count(p + "levels", levels);
    out.add(p + "depth", t.depth());
    out.add(p + "depth_levels_ratio", single ? stats::nan : stats::ratio(t.depth(), levels));
    out.add(p + "levels_nodes_ratio", single ? stats::nan : stats::ratio(levels, static_cast<double>(t.nodes.size() - 1)));

    std::vector<double> diffs;
    std::vector<std::vector<double>> per_level(static_cast<std::size_t>(levels) + 1);
    for (const auto& node : t.nodes) {
        if (node.parent < 0) continue;
        const double d = t.nodes[static_cast<std::size_t>(node.parent)].height - node.height;
        diffs.push_back(d);
        per_level[static_cast<std::size_t>(node.level)].push_back(d);
    }
    std::vector<double> level_means;
    for (std::size_t l = 1; l < per_level.size(); ++l)
        if (!per_level[l].empty()) level_means.push_back(stats::mean(per_level[l]));
    detail::add_stats(out, p + "diffs", diffs, detail::five_stats);
    detail::add_stats(out, p + "level_diffs", level_means, detail::five_stats);

    // basins of the leaves, taken from the chain's absorption probabilities
    const auto sizes = basin_sizes(m);
    int best_leaf = leaves.front();
    for (int l : leaves)
        if (t.nodes[static_cast<std::size_t>(l)].height < t.nodes[static_cast<std::size_t>(best_leaf)].height) best_leaf = l;
    const auto column = [&](int leaf) {
        return static_cast<std::size_t>(m.attractor_index[static_cast<std::size_t>(m.state_of[t.nodes[static_cast<std::size_t>(leaf)].cell])]);
    };
    std::vector<double> dists;
    std::vector<double> certain, with_uncertain, most_likely, intersection;
    const Vector best_ctr = m.grid.center(t.nodes[static_cast<std::size_t>(best_leaf)].cell);
    const double best_size = sizes.certain[column(best_leaf)];
    for (int l : leaves) {
        const auto a = column(l);
        certain.push_back(sizes.certain[a]);
        with_uncertain.push_back(sizes.with_uncertain[a]);
        most_likely.push_back(sizes.most_likely[a]);
        if (l == best_leaf) continue;
        dists.push_back((m.grid.center(t.nodes[static_cast<std::size_t>(l)].cell) - best_ctr).norm());
        intersection.push_back(best_size / (best_size + sizes.certain[a]));
    }
    detail::add_stats(out, p + "attractor_dists", dists, detail::five_stats);
    auto spread = [&](const std::vector<double>& v) { return single ? stats::nan : stats::ratio(stats::max(v), stats::min(v)); };
    out.add(p + "basin_ratio.certain", spread(certain));
    out.add(p + "basin_ratio.uncertain", spread(with_uncertain));
    out.add(p + "basin_ratio.most_likely", spread(most_likely));
    detail::add_stats(out, p + "basin_intersection", intersection, detail::five_stats);

    // widest range: highest representative assigned to a leaf's basin above that leaf
    double range = 0.0;
    for (std::size_t s = 0; s < m.n_states(); ++s) {
        Eigen::Index arg = 0;
        m.absorption.row(static_cast<Eigen::Index>(s)).maxCoeff(&arg);
        const double floor = m.values[m.attractors[static_cast<std::size_t>(arg)]];
        range = std::max(range, m.values[s] - floor);
    }
    out.add(p + "basin_range", range);
}

inline FeatureVector bt_features(const FeatureObject& fo, const ControlParams& control = {}, std::uint64_t seed = 0) {
    return detail::run_set(
        "bt", fo, control, seed,
        [](SetContext& ctx) {
            const auto weighting = parse_weighting(ctx.control.text("gcm.weighting", "improvement"));
            FeatureVector out("bt");
            for (auto a : detail::approaches(ctx.control, "bt.approaches")) {
                const auto start = detail::Clock::now();
                const auto m = build_transition_model(ctx.fo, a, weighting);
                const auto t = build_barrier_tree(m);
                bt_approach_features(out, m, t);
                detail::add_costs(out, "bt." + to_string(a), 0, detail::seconds_since(start));
            }
            return out;
        },
        false);
}

} // namespace lkit

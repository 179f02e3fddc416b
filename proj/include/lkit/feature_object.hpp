#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lkit/error.hpp"
#include "lkit/linalg.hpp"

namespace lkit {

/// Black-box objective x -> y.
using Function = std::function<double(std::span<const double>)>;

/// Block discretisation of a finite box. Cells are half-open [a, b) per
/// dimension except the last block, which also holds the upper bound. Cell ids
/// are row-major: the first dimension is the most significant digit.
class CellGrid {
public:
    CellGrid(std::vector<int> blocks, Vector lower, Vector upper) : blocks_(std::move(blocks)), lower_(std::move(lower)) {
        const auto d = lower_.size();
        if (static_cast<Eigen::Index>(blocks_.size()) != d) throw InvalidArgument("blocks must have one entry per dimension");
        widths_.resize(d);
        strides_.assign(static_cast<std::size_t>(d), 1);
        total_ = 1;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (blocks_[static_cast<std::size_t>(i)] < 1) throw InvalidArgument("every block count must be at least 1");
            if (!std::isfinite(lower_[i]) || !std::isfinite(upper[i]))
                throw InvalidArgument("a cell grid needs finite bounds");
            if (!(upper[i] > lower_[i])) throw InvalidArgument("a cell grid needs lower < upper in every dimension");
            widths_[i] = (upper[i] - lower_[i]) / blocks_[static_cast<std::size_t>(i)];
        }
        for (Eigen::Index i = d - 1; i >= 0; --i) {
            strides_[static_cast<std::size_t>(i)] = total_;
            total_ *= static_cast<std::size_t>(blocks_[static_cast<std::size_t>(i)]);
        }
    }

    std::size_t dim() const { return blocks_.size(); }
    const std::vector<int>& blocks() const { return blocks_; }
    const Vector& cell_widths() const { return widths_; }
    std::size_t total_cells() const { return total_; }

    std::vector<int> coordinates(std::size_t id) const {
        std::vector<int> c(blocks_.size());
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            c[i] = static_cast<int>(id / strides_[i]);
            id %= strides_[i];
        }
        return c;
    }

    std::size_t id(const std::vector<int>& coords) const {
        std::size_t id = 0;
        for (std::size_t i = 0; i < blocks_.size(); ++i) id += static_cast<std::size_t>(coords[i]) * strides_[i];
        return id;
    }

    bool contains(const std::vector<int>& coords) const {
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            if (coords[i] < 0 || coords[i] >= blocks_[i]) return false;
        return true;
    }

    Vector center(std::size_t id) const {
        const auto c = coordinates(id);
        Vector x(static_cast<Eigen::Index>(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            x[ii] = lower_[ii] + (c[i] + 0.5) * widths_[ii];
        }
        return x;
    }

    int block_of(Eigen::Index dim, double x) const {
        const auto b = blocks_[static_cast<std::size_t>(dim)];
        const double l = lower_[dim];
        const double w = widths_[dim];
        int k = static_cast<int>(std::floor((x - l) / w));
        k = std::clamp(k, 0, b - 1);
        while (k + 1 < b && x >= l + (k + 1) * w) ++k;
        while (k > 0 && x < l + k * w) --k;
        return k;
    }

    std::size_t cell_of(const Vector& x) const {
        std::size_t id = 0;
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            id += static_cast<std::size_t>(block_of(static_cast<Eigen::Index>(i), x[static_cast<Eigen::Index>(i)])) * strides_[i];
        return id;
    }

    /// Moore neighbourhood (up to 3^d - 1 cells) in increasing id order.
    std::vector<std::size_t> neighbors(std::size_t id) const {
        const auto base = coordinates(id);
        const auto d = blocks_.size();
        std::vector<std::size_t> out;
        std::vector<int> offset(d, -1);
        while (true) {
            bool zero = true;
            std::vector<int> c(d);
            bool inside = true;
            for (std::size_t i = 0; i < d; ++i) {
                zero = zero && offset[i] == 0;
                c[i] = base[i] + offset[i];
                inside = inside && c[i] >= 0 && c[i] < blocks_[i];
            }
            if (!zero && inside) out.push_back(this->id(c));
            std::size_t k = d;
            while (k > 0 && offset[k - 1] == 1) offset[--k] = -1;
            if (k == 0) break;
            ++offset[k - 1];
        }
        return out;
    }

private:
    std::vector<int> blocks_;
    Vector lower_;
    Vector widths_;
    std::vector<std::size_t> strides_;
    std::size_t total_ = 0;
};

struct FeatureObjectOptions {
    std::optional<Vector> lower;
    std::optional<Vector> upper;
    /// One entry per dimension, or a single entry used for every dimension.
    std::optional<std::vector<int>> blocks;
    Function function;
    bool minimize = true;
};

/// Immutable sample + bounds + optional grid and objective. Copies share the
/// same data and the same evaluation counter.
class FeatureObject {
public:
    const Matrix& points() const { return data_->points; }
    const Vector& objectives() const { return data_->objectives; }
    /// Objectives oriented so that smaller is better.
    const Vector& fitness() const { return data_->fitness; }
    const Vector& lower() const { return data_->lower; }
    const Vector& upper() const { return data_->upper; }
    bool minimize() const { return data_->minimize; }
    std::size_t dim() const { return static_cast<std::size_t>(data_->points.cols()); }
    std::size_t n_obs() const { return static_cast<std::size_t>(data_->points.rows()); }

    bool has_function() const { return static_cast<bool>(data_->function); }
    bool has_grid() const { return data_->grid.has_value(); }
    const CellGrid& grid() const {
        if (!data_->grid) throw Unavailable("feature object has no cell grid (blocks not given)");
        return *data_->grid;
    }
    const std::vector<std::size_t>& cell_of_point() const { return data_->cell_of_point; }
    /// Member indices per cell id (empty cells have empty lists).
    const std::vector<std::vector<std::size_t>>& cells() const { return data_->cells; }
    std::size_t non_empty_cells() const { return data_->non_empty; }

    /// Evaluates the objective (oriented like fitness()) and counts the call.
    /// Points outside finite bounds are rejected.
    double evaluate(const Vector& x) const {
        if (!data_->function) throw Unavailable("feature set requires function evaluations but no function was given");
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!(x[i] >= data_->lower[i] && x[i] <= data_->upper[i]))
                throw Error("attempted to evaluate the function outside the box constraints");
        data_->evaluations.fetch_add(1, std::memory_order_relaxed);
        const double y = data_->function(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        return data_->minimize ? y : -y;
    }

    std::uint64_t evaluation_count() const { return data_->evaluations.load(std::memory_order_relaxed); }
    std::uint64_t track_evaluations(std::uint64_t k) const {
        return data_->evaluations.fetch_add(k, std::memory_order_relaxed) + k;
    }

    friend FeatureObject create_feature_object(Matrix points, Vector objectives, FeatureObjectOptions options);

private:
    struct Data {
        Matrix points;
        Vector objectives;
        Vector fitness;
        Vector lower;
        Vector upper;
        bool minimize = true;
        Function function;
        std::optional<CellGrid> grid;
        std::vector<std::size_t> cell_of_point;
        std::vector<std::vector<std::size_t>> cells;
        std::size_t non_empty = 0;
        mutable std::atomic<std::uint64_t> evaluations{0};
    };

    explicit FeatureObject(std::shared_ptr<Data> d) : data_(std::move(d)) {}

    std::shared_ptr<Data> data_;
};

inline FeatureObject create_feature_object(Matrix points, Vector objectives, FeatureObjectOptions options = {}) {
    const auto n = points.rows();
    const auto d = points.cols();
    if (d < 1) throw InvalidArgument("points need at least one column");
    if (objectives.size() != n) throw InvalidArgument("points and objectives differ in length");
    if (n < d + 2) throw InvalidArgument("need at least dim + 2 observations");
    if (!points.allFinite()) throw InvalidArgument("points contain non-finite values");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!std::isfinite(objectives[i])) throw InvalidArgument("objective " + std::to_string(i + 1) + " is not finite");

    auto data = std::make_shared<FeatureObject::Data>();
    data->lower = options.lower.value_or(points.colwise().minCoeff().transpose());
    data->upper = options.upper.value_or(points.colwise().maxCoeff().transpose());
    if (data->lower.size() != d || data->upper.size() != d) throw InvalidArgument("bounds must have one entry per dimension");
    for (Eigen::Index j = 0; j < d; ++j) {
        if (std::isnan(data->lower[j]) || std::isnan(data->upper[j])) throw InvalidArgument("bounds must not be NaN");
        if (data->lower[j] > data->upper[j]) throw InvalidArgument("lower bound exceeds upper bound in dimension " + std::to_string(j + 1));
        for (Eigen::Index i = 0; i < n; ++i)
            if (points(i, j) < data->lower[j] || points(i, j) > data->upper[j])
                throw InvalidArgument("point " + std::to_string(i + 1) + " lies outside the bounds in dimension " + std::to_string(j + 1));
    }
    data->points = std::move(points);
    data->objectives = std::move(objectives);
    data->minimize = options.minimize;
    data->fitness = options.minimize ? data->objectives : Vector(-data->objectives);
    data->function = std::move(options.function);

    if (options.blocks) {
        auto blocks = *options.blocks;
        if (blocks.size() == 1 && d > 1) blocks.assign(static_cast<std::size_t>(d), blocks.front());
        data->grid.emplace(blocks, data->lower, data->upper);
        data->cells.assign(data->grid->total_cells(), {});
        data->cell_of_point.resize(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = data->grid->cell_of(data->points.row(i).transpose());
            data->cell_of_point[static_cast<std::size_t>(i)] = c;
            data->cells[c].push_back(static_cast<std::size_t>(i));
        }
        for (const auto& c : data->cells) data->non_empty += c.empty() ? 0 : 1;
    }
    return FeatureObject(std::move(data));
}

/// Printable description of a feature object.
struct Summary {
    std::size_t n_obs = 0;
    std::size_t dim = 0;
    std::vector<double> lower;
    std::vector<double> upper;
    bool minimize = true;
    bool has_function = false;
    std::optional<std::vector<int>> blocks;
    std::vector<double> cell_widths;
    std::size_t cells_total = 0;
    std::size_t cells_non_empty = 0;
    std::size_t cells_empty = 0;
    double avg_obs_per_cell = 0.0;
    double avg_obs_per_non_empty_cell = 0.0;

    std::string to_string() const;
};

inline Summary summarize(const FeatureObject& fo) {
    Summary s;
    s.n_obs = fo.n_obs();
    s.dim = fo.dim();
    s.lower.assign(fo.lower().data(), fo.lower().data() + fo.lower().size());
    s.upper.assign(fo.upper().data(), fo.upper().data() + fo.upper().size());
    s.minimize = fo.minimize();
    s.has_function = fo.has_function();
    if (fo.has_grid()) {
        const auto& g = fo.grid();
        s.blocks = g.blocks();
        s.cell_widths.assign(g.cell_widths().data(), g.cell_widths().data() + g.cell_widths().size());
        s.cells_total = g.total_cells();
        s.cells_non_empty = fo.non_empty_cells();
        s.cells_empty = s.cells_total - s.cells_non_empty;
        s.avg_obs_per_cell = static_cast<double>(s.n_obs) / static_cast<double>(s.cells_total);
        s.avg_obs_per_non_empty_cell = static_cast<double>(s.n_obs) / static_cast<double>(s.cells_non_empty);
    }
    return s;
}

inline std::string Summary::to_string() const {
    auto fmt = [](double v, const char* spec) {
        char buf[64];
        std::snprintf(buf, sizeof buf, spec, v);
        return std::string(buf);
    };
    auto join = [&](const auto& v, const char* spec) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(static_cast<double>(v[i]), spec);
        return out;
    };
    std::ostringstream os;
    os << "Feature Object:\n";
    os << "- Number of Observations: " << n_obs << "\n";
    os << "- Number of Variables: " << dim << "\n";
    os << "- Lower Boundaries: " << join(lower, "%.2e") << "\n";
    os << "- Upper Boundaries: " << join(upper, "%.2e") << "\n";
    os << "- Name of Variables: ";
    for (std::size_t i = 0; i < dim; ++i) os << (i ? ", " : "") << "x" << i + 1;
    os << "\n";
    os << "- Optimization Problem: " << (minimize ? "minimize" : "maximize") << " y\n";
    os << "- Function to be Optimized: " << (has_function ? "available" : "not available") << "\n";
    if (blocks) {
        const auto pct = [&](std::size_t k) { return fmt(100.0 * static_cast<double>(k) / static_cast<double>(cells_total), "%.2f"); };
        os << "- Number of Cells per Dimension: " << join(*blocks, "%.0f") << "\n";
        os << "- Size of Cells per Dimension: " << join(cell_widths, "%.2f") << "\n";
        os << "- Number of Cells:\n";
        os << "  - total: " << cells_total << "\n";
        os << "  - non-empty: " << cells_non_empty << " (" << pct(cells_non_empty) << "%)\n";
        os << "  - empty: " << cells_empty << " (" << pct(cells_empty) << "%)\n";
        os << "- Average Number of Observations per Cell:\n";
        os << "  - total: " << fmt(avg_obs_per_cell, "%.2f") << "\n";
        os << "  - non-empty: " << fmt(avg_obs_per_non_empty_cell, "%.2f") << "\n";
    }
    return os.str();
}

} // namespace lkit

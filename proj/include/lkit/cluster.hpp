#pragma once

#include <numeric>
#include <vector>

#include "lkit/error.hpp"
#include "lkit/linalg.hpp"

namespace lkit {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

    std::size_t find(std::size_t i) {
        while (parent_[i] != i) {
            parent_[i] = parent_[parent_[i]];
            i = parent_[i];
        }
        return i;
    }

    /// Returns the surviving root.
    std::size_t unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return a;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

/// Cuts the single-linkage dendrogram of the rows of `points` at height
/// `cut_distance`. Labels are numbered by first appearance.
inline std::vector<int> single_linkage_clusters(const Matrix& points, double cut_distance) {
    if (!(cut_distance > 0.0)) throw InvalidArgument("single linkage cut distance must be positive");
    const auto n = static_cast<std::size_t>(points.rows());
    DisjointSets sets(n);
    const double cut2 = cut_distance * cut_distance;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if ((points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).squaredNorm() <= cut2)
                sets.unite(i, j);
    std::vector<int> labels(n, -1);
    std::vector<int> label_of_root(n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = sets.find(i);
        if (label_of_root[r] < 0) label_of_root[r] = next++;
        labels[i] = label_of_root[r];
    }
    return labels;
}

} // namespace lkit

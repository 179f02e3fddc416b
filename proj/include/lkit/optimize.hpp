#pragma once

// Box-constrained Nelder-Mead. Every trial point is clamped to the bounds
// before it is evaluated.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "lkit/error.hpp"
#include "lkit/linalg.hpp"

namespace lkit {

using Objective = std::function<double(const Vector&)>;

struct LocalSearchResult {
    Vector x;
    double f = std::numeric_limits<double>::quiet_NaN();
    std::size_t evaluations = 0;
};

inline Vector clamp_to(const Vector& x, const Vector& lower, const Vector& upper) {
    return x.cwiseMax(lower).cwiseMin(upper);
}

inline LocalSearchResult local_search(const Objective& f, const Vector& x0, const Vector& lower, const Vector& upper,
                                      std::size_t budget, double tolerance = 1e-8) {
    const auto d = x0.size();
    if (budget < static_cast<std::size_t>(d + 1)) throw InvalidArgument("local search budget must be at least dim + 1");
    if ((x0.array() < lower.array()).any() || (x0.array() > upper.array()).any())
        throw InvalidArgument("local search start lies outside the bounds");

    LocalSearchResult res;
    auto eval = [&](const Vector& x) {
        ++res.evaluations;
        return f(x);
    };

    std::vector<Vector> simplex{x0};
    for (Eigen::Index i = 0; i < d; ++i) {
        const double range = upper[i] - lower[i];
        double step = std::isfinite(range) ? 0.05 * range : 0.05 * std::max(1.0, std::abs(x0[i]));
        if (step <= 0.0) step = 0.0;
        Vector v = x0;
        v[i] = x0[i] + step <= upper[i] ? x0[i] + step : x0[i] - step;
        simplex.push_back(clamp_to(v, lower, upper));
    }
    std::vector<double> fv;
    for (const auto& v : simplex) fv.push_back(eval(v));

    std::vector<std::size_t> order(simplex.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        std::vector<Vector> s;
        std::vector<double> g;
        for (auto k : order) {
            s.push_back(simplex[k]);
            g.push_back(fv[k]);
        }
        simplex = std::move(s);
        fv = std::move(g);
    };

    const auto n = simplex.size();
    while (res.evaluations < budget) {
        sort_simplex();
        double diameter = 0.0;
        for (std::size_t k = 1; k < n; ++k) diameter = std::max(diameter, (simplex[k] - simplex[0]).norm());
        if (diameter < tolerance) break;

        Vector centroid = Vector::Zero(d);
        for (std::size_t k = 0; k + 1 < n; ++k) centroid += simplex[k];
        centroid /= static_cast<double>(n - 1);
        const Vector& worst = simplex[n - 1];

        const Vector xr = clamp_to(centroid + (centroid - worst), lower, upper);
        const double fr = eval(xr);
        if (fr < fv[0]) {
            if (res.evaluations >= budget) {
                simplex[n - 1] = xr;
                fv[n - 1] = fr;
                break;
            }
            const Vector xe = clamp_to(centroid + 2.0 * (centroid - worst), lower, upper);
            const double fe = eval(xe);
            simplex[n - 1] = fe < fr ? xe : xr;
            fv[n - 1] = std::min(fe, fr);
            continue;
        }
        if (fr < fv[n - 2]) {
            simplex[n - 1] = xr;
            fv[n - 1] = fr;
            continue;
        }
        if (res.evaluations >= budget) break;
        const bool outside = fr < fv[n - 1];
        const Vector xc = outside ? clamp_to(centroid + 0.5 * (xr - centroid), lower, upper)
                                  : clamp_to(centroid + 0.5 * (worst - centroid), lower, upper);
        const double fc = eval(xc);
        if (fc < std::min(fr, fv[n - 1])) {
            simplex[n - 1] = xc;
            fv[n - 1] = fc;
            continue;
        }
        // shrink toward the best vertex
        for (std::size_t k = 1; k < n && res.evaluations < budget; ++k) {
            simplex[k] = clamp_to(simplex[0] + 0.5 * (simplex[k] - simplex[0]), lower, upper);
            fv[k] = eval(simplex[k]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = simplex[best];
    res.f = fv[best];
    return res;
}

} // namespace lkit

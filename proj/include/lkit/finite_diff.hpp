#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "lkit/linalg.hpp"
#include "lkit/optimize.hpp"

namespace lkit {

struct Derivatives {
    Vector gradient;
    Matrix hessian;
    Vector steps;
    /// Largest |f| seen on the stencil; sets the round-off scale of the estimates.
    double function_scale = 0.0;
    std::size_t evaluations = 0;

    /// Magnitude below which a gradient component is indistinguishable from round-off.
    double gradient_noise(Eigen::Index i) const {
        return 100.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, function_scale) / steps[i];
    }
    /// Same for Hessian entries and eigenvalues.
    double hessian_noise() const {
        const double h = steps.minCoeff();
        return 400.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, function_scale) / (h * h);
    }
};

/// Gradient and Hessian by finite differences with per-coordinate step
/// step * (upper - lower). Every stencil point stays inside the box: a
/// coordinate whose central stencil would leave it uses second-order one-sided
/// differences for the gradient and a Hessian stencil centred one step inward.
/// Coordinates without room for a stencil get NaN entries.
inline Derivatives fd_gradient_hessian(const Objective& f, const Vector& x, const Vector& lower, const Vector& upper,
                                       double step = 1e-4) {
    const auto d = x.size();
    Derivatives out;
    out.gradient = Vector::Constant(d, std::numeric_limits<double>::quiet_NaN());
    out.hessian = Matrix::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
    out.steps = Vector::Zero(d);

    std::map<std::vector<double>, double> memo;
    auto eval = [&](const Vector& raw) {
        // absorbs last-ulp overshoot of shifted stencils
        const Vector p = clamp_to(raw, lower, upper);
        std::vector<double> key(p.data(), p.data() + p.size());
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        const double v = f(p);
        ++out.evaluations;
        out.function_scale = std::max(out.function_scale, std::abs(v));
        memo.emplace(std::move(key), v);
        return v;
    };

    enum class Mode { central, forward, backward, none };
    std::vector<Mode> mode(static_cast<std::size_t>(d), Mode::none);
    Vector shift = Vector::Zero(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double range = upper[i] - lower[i];
        const double h = std::isfinite(range) ? step * range : step * std::max(1.0, std::abs(x[i]));
        out.steps[i] = h;
        if (!(h > 0.0)) continue;
        auto& m = mode[static_cast<std::size_t>(i)];
        if (x[i] - h >= lower[i] && x[i] + h <= upper[i]) {
            m = Mode::central;
        } else if (x[i] + 2.0 * h <= upper[i]) {
            m = Mode::forward;
            shift[i] = h;
        } else if (x[i] - 2.0 * h >= lower[i]) {
            m = Mode::backward;
            shift[i] = -h;
        }
    }

    const double f0 = eval(x);
    auto unit = [&](Eigen::Index i, double s) {
        Vector e = Vector::Zero(d);
        e[i] = s;
        return e;
    };

    for (Eigen::Index i = 0; i < d; ++i) {
        const double h = out.steps[i];
        switch (mode[static_cast<std::size_t>(i)]) {
        case Mode::central:
            out.gradient[i] = (eval(x + unit(i, h)) - eval(x - unit(i, h))) / (2.0 * h);
            break;
        case Mode::forward:
            out.gradient[i] = (-3.0 * f0 + 4.0 * eval(x + unit(i, h)) - eval(x + unit(i, 2.0 * h))) / (2.0 * h);
            break;
        case Mode::backward:
            out.gradient[i] = (3.0 * f0 - 4.0 * eval(x - unit(i, h)) + eval(x - unit(i, 2.0 * h))) / (2.0 * h);
            break;
        case Mode::none: break;
        }
    }

    const Vector c = x + shift;
    const double fc = eval(c);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (mode[static_cast<std::size_t>(i)] == Mode::none) continue;
        const double hi = out.steps[i];
        out.hessian(i, i) = (eval(c + unit(i, hi)) - 2.0 * fc + eval(c - unit(i, hi))) / (hi * hi);
        for (Eigen::Index j = i + 1; j < d; ++j) {
            if (mode[static_cast<std::size_t>(j)] == Mode::none) continue;
            const double hj = out.steps[j];
            const Vector ei = unit(i, hi);
            const Vector ej = unit(j, hj);
            const double v = (eval(c + ei + ej) - eval(c + ei - ej) - eval(c - ei + ej) + eval(c - ei - ej)) / (4.0 * hi * hj);
            out.hessian(i, j) = v;
            out.hessian(j, i) = v;
        }
    }
    out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
    return out;
}

} // namespace lkit

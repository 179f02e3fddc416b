#pragma once

// Named test problems on [-5, 5]^d and user expressions.

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "lkit/expression.hpp"
#include "lkit/feature_object.hpp"
#include "lkit/linalg.hpp"
#include "lkit/rng.hpp"

namespace lkit {

struct Problem {
    std::string name;
    std::size_t dim = 0;
    Vector lower;
    Vector upper;
    Function evaluate;
    std::optional<Vector> optimum;
    std::optional<double> optimum_value;
    std::uint64_t seed = 0;

    double operator()(const Vector& x) const { return evaluate({x.data(), static_cast<std::size_t>(x.size())}); }
};

inline constexpr std::array<const char*, 5> problem_names{"sphere", "rastrigin", "rosenbrock", "linear_slope", "gallagher101"};

namespace detail {

constexpr double pi = 3.14159265358979323846;

/// Oscillating transformation applied to the Gallagher output.
inline double t_osz(double v) {
    if (v == 0.0) return 0.0;
    const double h = std::log(std::abs(v));
    const double c1 = v > 0 ? 10.0 : 5.5;
    const double c2 = v > 0 ? 7.9 : 3.1;
    return (v > 0 ? 1.0 : -1.0) * std::exp(h + 0.049 * (std::sin(c1 * h) + std::sin(c2 * h)));
}

/// Haar-distributed rotation from the QR factors of a Gaussian matrix.
inline Matrix random_rotation(std::size_t d, Rng& rng) {
    Matrix g(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

/// 101 rotated, ill-conditioned Gaussian peaks: one global peak of height 10
/// centred in [-4, 4]^d and 100 local peaks in [-5, 5]^d with heights between
/// 1.1 and 9.1. The value is the transformed distance of the tallest peak
/// below 10, plus a penalty outside [-5, 5]^d.
struct Gallagher {
    std::size_t d;
    Matrix rotation;
    std::vector<Vector> centers;       // already rotated
    std::vector<Vector> conditioning;  // diagonal scaling per peak
    std::vector<double> weights;

    Gallagher(std::size_t dim, std::uint64_t seed) : d(dim) {
        Rng rng = Rng(seed).child("gallagher101");
        constexpr std::size_t peaks = 101;
        rotation = random_rotation(d, rng);

        std::vector<double> alpha(peaks);
        alpha[0] = 1000.0;
        std::vector<double> pool(peaks - 1);
        for (std::size_t j = 0; j < pool.size(); ++j) pool[j] = std::pow(1000.0, 2.0 * static_cast<double>(j) / 99.0);
        rng.shuffle(pool);
        std::copy(pool.begin(), pool.end(), alpha.begin() + 1);

        for (std::size_t i = 0; i < peaks; ++i) {
            const double range = i == 0 ? 4.0 : 5.0;
            Vector c(static_cast<Eigen::Index>(d));
            for (auto& v : c) v = rng.uniform(-range, range);
            centers.push_back(rotation * c);
            weights.push_back(i == 0 ? 10.0 : 1.1 + 8.0 * static_cast<double>(i - 1) / 99.0);

            Vector diag(static_cast<Eigen::Index>(d));
            for (std::size_t j = 0; j < d; ++j) {
                const double e = d > 1 ? 0.5 * static_cast<double>(j) / static_cast<double>(d - 1) : 0.0;
                diag[static_cast<Eigen::Index>(j)] = std::pow(alpha[i], e) / std::pow(alpha[i], 0.25);
            }
            std::vector<double> tmp(diag.data(), diag.data() + diag.size());
            rng.shuffle(tmp);
            conditioning.emplace_back(Eigen::Map<Vector>(tmp.data(), diag.size()));
        }
    }

    Vector global_optimum() const { return rotation.transpose() * centers[0]; }

    double operator()(std::span<const double> xs) const {
        const Eigen::Map<const Vector> x(xs.data(), static_cast<Eigen::Index>(xs.size()));
        const Vector z = rotation * x;
        double best = 0.0;
        for (std::size_t i = 0; i < centers.size(); ++i) {
            const Vector diff = z - centers[i];
            const double q = diff.cwiseProduct(conditioning[i]).dot(diff);
            best = std::max(best, weights[i] * std::exp(-q / (2.0 * static_cast<double>(d))));
        }
        double pen = 0.0;
        for (double v : xs) pen += std::pow(std::max(0.0, std::abs(v) - 5.0), 2);
        const double t = t_osz(10.0 - best);
        return t * t + pen;
    }
};

} // namespace detail

/// Throws InvalidArgument for unknown names, listing the available ones.
inline Problem make_problem(const std::string& name, std::size_t dim, std::uint64_t seed = 0) {
    if (dim < 1) throw InvalidArgument("problem dimension must be at least 1");
    Problem p;
    p.name = name;
    p.dim = dim;
    p.seed = seed;
    p.lower = Vector::Constant(static_cast<Eigen::Index>(dim), -5.0);
    p.upper = Vector::Constant(static_cast<Eigen::Index>(dim), 5.0);
    const auto di = static_cast<Eigen::Index>(dim);
    if (name == "sphere") {
        p.evaluate = [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return s;
        };
        p.optimum = Vector::Zero(di);
        p.optimum_value = 0.0;
    } else if (name == "rastrigin") {
        p.evaluate = [](std::span<const double> x) {
            double s = 10.0 * static_cast<double>(x.size());
            for (double v : x) s += v * v - 10.0 * std::cos(2.0 * detail::pi * v);
            return s;
        };
        p.optimum = Vector::Zero(di);
        p.optimum_value = 0.0;
    } else if (name == "rosenbrock") {
        p.evaluate = [](std::span<const double> x) {
            if (x.size() == 1) return (1.0 - x[0]) * (1.0 - x[0]);
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < x.size(); ++i)
                s += 100.0 * std::pow(x[i + 1] - x[i] * x[i], 2) + std::pow(1.0 - x[i], 2);
            return s;
        };
        p.optimum = Vector::Ones(di);
        p.optimum_value = 0.0;
    } else if (name == "linear_slope") {
        Rng rng = Rng(seed).child("linear_slope");
        Vector s(di);
        for (Eigen::Index i = 0; i < di; ++i) {
            const double mag = dim > 1 ? std::pow(10.0, static_cast<double>(i) / static_cast<double>(dim - 1)) : 1.0;
            s[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * mag;
        }
        p.evaluate = [s](std::span<const double> x) {
            double f = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const double opt = s[ii] > 0 ? 5.0 : -5.0;
                const double z = x[i] * opt < 25.0 ? x[i] : opt;
                f += 5.0 * std::abs(s[ii]) - s[ii] * z;
            }
            return f;
        };
        p.optimum = Vector(s.unaryExpr([](double v) { return v > 0 ? 5.0 : -5.0; }));
        p.optimum_value = 0.0;
    } else if (name == "gallagher101") {
        auto g = std::make_shared<const detail::Gallagher>(dim, seed);
        p.evaluate = [g](std::span<const double> x) { return (*g)(x); };
        p.optimum = g->global_optimum();
        p.optimum_value = 0.0;
    } else {
        std::string names;
        for (const char* n : problem_names) names += (names.empty() ? "" : ", ") + std::string(n);
        throw InvalidArgument("unknown problem '" + name + "' (available: " + names + ")");
    }
    return p;
}

/// Problem from an expression over x1..xd on the given box (default [-5, 5]^d).
inline Problem make_expression_problem(const std::string& text, std::size_t dim, std::optional<Vector> lower = std::nullopt,
                                       std::optional<Vector> upper = std::nullopt) {
    const auto expr = parse_expression(text, dim);
    Problem p;
    p.name = text;
    p.dim = dim;
    p.lower = lower.value_or(Vector::Constant(static_cast<Eigen::Index>(dim), -5.0));
    p.upper = upper.value_or(Vector::Constant(static_cast<Eigen::Index>(dim), 5.0));
    p.evaluate = [expr](std::span<const double> x) { return expr(x); };
    return p;
}

/// Evaluates the problem at each row.
inline Vector evaluate_rows(const Problem& p, const Matrix& x) {
    Vector y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Vector r = x.row(i).transpose();
        y[i] = p(r);
    }
    return y;
}

} // namespace lkit

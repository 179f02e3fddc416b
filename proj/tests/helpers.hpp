#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lkit/feature_object.hpp"
#include "lkit/problems.hpp"
#include "lkit/rng.hpp"
#include "lkit/sampling.hpp"

namespace lkit::test {

inline Matrix uniform_matrix(std::size_t n, std::size_t d, double lo, double hi, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(lo, hi);
    return x;
}

using ScalarFn = std::function<double(const Vector&)>;

inline Function wrap(ScalarFn f) {
    return [f](std::span<const double> x) { return f(Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()))); };
}

inline Vector evaluate_all(const ScalarFn& f, const Matrix& x) {
    Vector y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = f(x.row(i).transpose());
    return y;
}

/// Uniform sample on [lo, hi]^d with the function attached and optional blocks.
inline FeatureObject function_object(const ScalarFn& f, std::size_t n, std::size_t d, double lo, double hi, std::uint64_t seed,
                                     std::optional<std::vector<int>> blocks = std::nullopt) {
    Matrix x = uniform_matrix(n, d, lo, hi, seed);
    Vector y = evaluate_all(f, x);
    FeatureObjectOptions o;
    o.lower = Vector::Constant(static_cast<Eigen::Index>(d), lo);
    o.upper = Vector::Constant(static_cast<Eigen::Index>(d), hi);
    o.blocks = std::move(blocks);
    o.function = wrap(f);
    return create_feature_object(std::move(x), std::move(y), std::move(o));
}

/// Object for a named problem with an lhs sample, as used by the examples in the docs.
inline FeatureObject problem_object(const std::string& name, std::size_t d, std::size_t n, std::uint64_t instance, std::uint64_t seed,
                                    std::optional<std::vector<int>> blocks = std::nullopt) {
    const Problem p = make_problem(name, d, instance);
    SampleSpec s;
    s.n_obs = n;
    s.dim = d;
    s.lower = p.lower;
    s.upper = p.upper;
    s.method = SampleMethod::lhs;
    s.seed = seed;
    Matrix x = create_initial_sample(s);
    Vector y = evaluate_rows(p, x);
    FeatureObjectOptions o;
    o.lower = p.lower;
    o.upper = p.upper;
    o.blocks = std::move(blocks);
    o.function = p.evaluate;
    return create_feature_object(std::move(x), std::move(y), std::move(o));
}

inline double sphere(const Vector& x) { return x.squaredNorm(); }

} // namespace lkit::test

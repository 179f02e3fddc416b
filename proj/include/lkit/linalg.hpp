#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "lkit/error.hpp"

namespace lkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LinearFit {
    Vector coefficients;
    /// Columns dropped as linearly dependent; their coefficients are zero.
    std::vector<bool> dropped;
    Eigen::Index rank = 0;
    /// NaN when undefined (no residual degrees of freedom).
    double adjusted_r_squared = std::numeric_limits<double>::quiet_NaN();
    Vector residuals;

    bool rank_deficient() const { return rank < coefficients.size(); }
};

/// Ordinary least squares by column-pivoted Householder QR. The design matrix
/// is used as given, so it must carry its own intercept column.
inline LinearFit fit_least_squares(const Matrix& design, const Vector& y) {
    const auto n = design.rows();
    const auto p = design.cols();
    if (n != y.size()) throw InvalidArgument("design matrix and response differ in length");
    if (n < p) throw InvalidArgument("least squares needs at least as many rows as columns");

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    LinearFit fit;
    fit.rank = qr.rank();
    fit.coefficients = qr.solve(y);
    fit.dropped.assign(static_cast<std::size_t>(p), false);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = fit.rank; k < p; ++k) {
        fit.dropped[static_cast<std::size_t>(perm[k])] = true;
        fit.coefficients[perm[k]] = 0.0;
    }
    fit.residuals = y - design * fit.coefficients;

    const double mean = y.mean();
    const double sst = (y.array() - mean).square().sum();
    const double ssr = fit.residuals.squaredNorm();
    if (sst <= 0.0) {
        fit.adjusted_r_squared = 0.0;
    } else if (ssr <= 1e-24 * sst) {
        fit.adjusted_r_squared = 1.0;
    } else if (n - fit.rank > 0 && n > 1) {
        fit.adjusted_r_squared = 1.0 - (ssr / static_cast<double>(n - fit.rank)) / (sst / static_cast<double>(n - 1));
    }
    return fit;
}

enum class ModelTerms { linear, linear_interactions, quadratic, quadratic_interactions };

/// Column layout: intercept, x_1..x_d, then x_i^2 (quadratic models), then
/// x_i * x_j for i < j (interaction models).
inline Matrix model_matrix(const Matrix& x, ModelTerms terms) {
    const auto n = x.rows();
    const auto d = x.cols();
    const bool squares = terms == ModelTerms::quadratic || terms == ModelTerms::quadratic_interactions;
    const bool inter = terms == ModelTerms::linear_interactions || terms == ModelTerms::quadratic_interactions;
    const auto p = 1 + d + (squares ? d : 0) + (inter ? d * (d - 1) / 2 : 0);
    Matrix m(n, p);
    m.col(0).setOnes();
    m.middleCols(1, d) = x;
    Eigen::Index c = 1 + d;
    if (squares)
        for (Eigen::Index j = 0; j < d; ++j) m.col(c++) = x.col(j).array().square();
    if (inter)
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = i + 1; j < d; ++j) m.col(c++) = x.col(i).cwiseProduct(x.col(j));
    return m;
}

struct SymmetricEigen {
    Vector values;  // descending
    Matrix vectors; // column k belongs to values[k]
};

inline SymmetricEigen sym_eigen(const Matrix& a) {
    if (a.rows() != a.cols()) throw InvalidArgument("sym_eigen needs a square matrix");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (a.size() > 0 && (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw InvalidArgument("sym_eigen needs a symmetric matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition did not converge");
    const auto n = a.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index i, Eigen::Index j) { return solver.eigenvalues()[i] > solver.eigenvalues()[j]; });
    SymmetricEigen out{Vector(n), Matrix(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = solver.eigenvalues()[order[static_cast<std::size_t>(k)]];
        out.vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

/// Sample covariance of the columns (n - 1 denominator).
inline Matrix covariance(const Matrix& x) {
    const Matrix centered = x.rowwise() - x.colwise().mean();
    const double denom = std::max<double>(1.0, static_cast<double>(x.rows() - 1));
    return (centered.transpose() * centered) / denom;
}

} // namespace lkit

#pragma once

// Gaussian discriminant classifiers (linear, quadratic, and a two-component
// mixture per class) with stratified k-fold misclassification estimates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lkit/error.hpp"
#include "lkit/linalg.hpp"
#include "lkit/rng.hpp"

namespace lkit {

enum class ClassifierKind { lda, qda, gmda };

inline std::string_view to_string(ClassifierKind k) {
    switch (k) {
    case ClassifierKind::lda: return "lda";
    case ClassifierKind::qda: return "qda";
    case ClassifierKind::gmda: return "gmda";
    }
    return "";
}

inline ClassifierKind parse_classifier(std::string_view s) {
    if (s == "lda") return ClassifierKind::lda;
    if (s == "qda") return ClassifierKind::qda;
    if (s == "gmda" || s == "mda") return ClassifierKind::gmda;
    throw InvalidArgument("unknown classifier '" + std::string(s) + "' (expected lda, qda or gmda)");
}

namespace detail {

/// Adds 1e-8 * trace / d to the diagonal (1e-8 when the trace vanishes).
inline Matrix regularized(Matrix cov) {
    const auto d = cov.rows();
    double ridge = d > 0 ? 1e-8 * cov.trace() / static_cast<double>(d) : 0.0;
    if (!(ridge > 0.0)) ridge = 1e-8;
    cov.diagonal().array() += ridge;
    return cov;
}

struct Gaussian {
    double log_weight = 0.0;
    Vector mean;
    Eigen::LLT<Matrix> chol;
    double log_det = 0.0;

    Gaussian(double weight, Vector mu, const Matrix& cov) : log_weight(std::log(weight)), mean(std::move(mu)) {
        Matrix c = regularized(cov);
        chol.compute(c);
        while (chol.info() != Eigen::Success) {
            c.diagonal().array() += std::max(1e-8, 1e-6 * c.diagonal().cwiseAbs().maxCoeff());
            chol.compute(c);
        }
        log_det = 2.0 * chol.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }

    double log_density(const Vector& x) const {
        const Vector z = chol.matrixL().solve(x - mean);
        const double d = static_cast<double>(mean.size());
        return log_weight - 0.5 * (d * std::log(2.0 * 3.14159265358979323846) + log_det + z.squaredNorm());
    }
};

inline double log_sum_exp(const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

inline Matrix rows_of(const Matrix& x, const std::vector<Eigen::Index>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
    return out;
}

inline Matrix scatter(const Matrix& x, const Vector& mean) {
    const Matrix c = x.rowwise() - mean.transpose();
    return c.transpose() * c;
}

/// Two-component Gaussian mixture fitted by a fixed number of EM iterations.
/// Initialised by splitting the points at the median of their widest coordinate.
inline std::vector<Gaussian> fit_mixture(const Matrix& x, int iterations = 50, double ridge_factor = 1e-6) {
    const auto m = x.rows();
    const auto d = x.cols();
    const Matrix cov_all = covariance(x);
    double ridge = ridge_factor * cov_all.trace() / static_cast<double>(d);
    if (!(ridge > 0.0)) ridge = ridge_factor;
    const Matrix ridge_m = ridge * Matrix::Identity(d, d);

    Eigen::Index widest = 0;
    cov_all.diagonal().maxCoeff(&widest);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a, widest) < x(b, widest); });

    Matrix resp = Matrix::Zero(m, 2);
    for (std::size_t k = 0; k < order.size(); ++k) resp(order[k], k < order.size() / 2 ? 0 : 1) = 1.0;

    std::vector<double> weight(2);
    std::vector<Vector> mu(2);
    std::vector<Matrix> cov(2);
    auto m_step = [&] {
        for (int c = 0; c < 2; ++c) {
            const double nc = resp.col(c).sum();
            if (nc < 1e-10) {
                weight[c] = 1e-10;
                mu[c] = x.colwise().mean().transpose();
                cov[c] = cov_all + ridge_m;
                continue;
            }
            weight[c] = nc / static_cast<double>(m);
            mu[c] = (x.transpose() * resp.col(c)) / nc;
            const Matrix centered = x.rowwise() - mu[c].transpose();
            cov[c] = (centered.transpose() * resp.col(c).asDiagonal() * centered) / nc + ridge_m;
        }
    };
    m_step();
    for (int it = 0; it < iterations; ++it) {
        const std::vector<Gaussian> comps{Gaussian(weight[0], mu[0], cov[0]), Gaussian(weight[1], mu[1], cov[1])};
        for (Eigen::Index i = 0; i < m; ++i) {
            const Vector xi = x.row(i).transpose();
            std::vector<double> l{comps[0].log_density(xi), comps[1].log_density(xi)};
            const double norm = log_sum_exp(l);
            resp(i, 0) = std::exp(l[0] - norm);
            resp(i, 1) = std::exp(l[1] - norm);
        }
        m_step();
    }
    return {Gaussian(weight[0], mu[0], cov[0]), Gaussian(weight[1], mu[1], cov[1])};
}

} // namespace detail

/// Binary or multi-class Gaussian discriminant rule. Labels are arbitrary ints.
class DiscriminantClassifier {
public:
    DiscriminantClassifier(ClassifierKind kind, const Matrix& x, const std::vector<int>& labels) : kind_(kind) {
        if (x.rows() != static_cast<Eigen::Index>(labels.size()))
            throw InvalidArgument("classifier: point and label counts differ");
        if (labels.empty()) throw InvalidArgument("classifier: no training data");
        std::map<int, std::vector<Eigen::Index>> by_class;
        for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<Eigen::Index>(i));

        const auto n = x.rows();
        const auto d = x.cols();
        Matrix pooled = Matrix::Zero(d, d);
        std::map<int, Vector> means;
        for (const auto& [label, idx] : by_class) {
            const Matrix xc = detail::rows_of(x, idx);
            means[label] = xc.colwise().mean().transpose();
            pooled += detail::scatter(xc, means[label]);
        }
        const auto dof = std::max<Eigen::Index>(1, n - static_cast<Eigen::Index>(by_class.size()));
        pooled /= static_cast<double>(dof);

        for (const auto& [label, idx] : by_class) {
            ClassModel model;
            model.label = label;
            const double prior = static_cast<double>(idx.size()) / static_cast<double>(n);
            model.log_prior = std::log(prior);
            const Matrix xc = detail::rows_of(x, idx);
            const Vector& mu = means[label];
            const bool own_cov = idx.size() >= 2 && detail::scatter(xc, mu).trace() > 0.0;
            switch (kind) {
            case ClassifierKind::lda:
                model.components.emplace_back(1.0, mu, pooled);
                break;
            case ClassifierKind::qda:
                model.components.emplace_back(1.0, mu, own_cov ? covariance(xc) : pooled);
                break;
            case ClassifierKind::gmda:
                if (idx.size() >= 4 && own_cov)
                    model.components = detail::fit_mixture(xc);
                else
                    model.components.emplace_back(1.0, mu, own_cov ? covariance(xc) : pooled);
                break;
            }
            classes_.push_back(std::move(model));
        }
    }

    ClassifierKind kind() const { return kind_; }

    int predict(const Vector& x) const {
        double best = -std::numeric_limits<double>::infinity();
        int label = classes_.front().label;
        for (const auto& c : classes_) {
            std::vector<double> parts;
            for (const auto& g : c.components) parts.push_back(g.log_density(x));
            const double score = c.log_prior + detail::log_sum_exp(parts);
            if (score > best) {
                best = score;
                label = c.label;
            }
        }
        return label;
    }

private:
    struct ClassModel {
        int label = 0;
        double log_prior = 0.0;
        std::vector<detail::Gaussian> components;
    };

    ClassifierKind kind_;
    std::vector<ClassModel> classes_;
};

/// Fold index per observation: each class is put in row-content order,
/// shuffled, the classes are concatenated and positions are dealt round-robin
/// to the folds. Sorting by content first makes the assignment independent of
/// the row order of the input.
inline std::vector<int> stratified_folds(const Matrix& x, const std::vector<int>& labels, int folds, Rng rng) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    auto row_less = [&x](std::size_t a, std::size_t b) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double va = x(static_cast<Eigen::Index>(a), j), vb = x(static_cast<Eigen::Index>(b), j);
            if (va != vb) return va < vb;
        }
        return false;
    };
    std::vector<int> fold(labels.size(), 0);
    std::size_t pos = 0;
    for (auto& [label, idx] : by_class) {
        std::stable_sort(idx.begin(), idx.end(), row_less);
        rng.shuffle(idx);
        for (std::size_t i : idx) fold[i] = static_cast<int>(pos++ % static_cast<std::size_t>(folds));
    }
    return fold;
}

/// Mean over folds of the fraction of misclassified held-out points.
inline double cross_validated_mmce(const Matrix& x, const std::vector<int>& labels, ClassifierKind kind, int folds,
                                   Rng rng) {
    if (folds < 2) throw InvalidArgument("cross validation needs at least 2 folds");
    if (static_cast<std::size_t>(folds) > labels.size()) throw InvalidArgument("more folds than observations");
    {
        auto sorted = labels;
        std::sort(sorted.begin(), sorted.end());
        if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 2)
            throw InvalidArgument("cross validation needs at least two classes");
    }
    const auto fold = stratified_folds(x, labels, folds, rng);
    double total = 0.0;
    int used = 0;
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> train, test;
        std::vector<int> train_labels;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (fold[i] == f) {
                test.push_back(static_cast<Eigen::Index>(i));
            } else {
                train.push_back(static_cast<Eigen::Index>(i));
                train_labels.push_back(labels[i]);
            }
        }
        if (test.empty()) continue;
        const DiscriminantClassifier model(kind, detail::rows_of(x, train), train_labels);
        int wrong = 0;
        for (auto i : test)
            if (model.predict(x.row(i).transpose()) != labels[static_cast<std::size_t>(i)]) ++wrong;
        total += static_cast<double>(wrong) / static_cast<double>(test.size());
        ++used;
    }
    return total / static_cast<double>(used);
}

} // namespace lkit

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "lkit/feature_sets.hpp"
#include "lkit/features/misc.hpp"

using namespace lkit;

namespace {

FeatureObject with_blocks(Matrix x, Vector y, double lo, double hi, std::vector<int> blocks) {
    FeatureObjectOptions o;
    o.lower = Vector::Constant(x.cols(), lo);
    o.upper = Vector::Constant(x.cols(), hi);
    o.blocks = std::move(blocks);
    return create_feature_object(std::move(x), std::move(y), std::move(o));
}

/// Per-cell slopes from the normal equations.
std::vector<Vector> cell_slopes_oracle(const FeatureObject& fo) {
    std::vector<Vector> out;
    const auto d = static_cast<Eigen::Index>(fo.dim());
    for (const auto& m : fo.cells()) {
        if (m.size() < fo.dim() + 2) continue;
        Matrix a(static_cast<Eigen::Index>(m.size()), d + 1);
        Vector b(static_cast<Eigen::Index>(m.size()));
        for (std::size_t k = 0; k < m.size(); ++k) {
            a(static_cast<Eigen::Index>(k), 0) = 1;
            a.row(static_cast<Eigen::Index>(k)).tail(d) = fo.points().row(static_cast<Eigen::Index>(m[k]));
            b[static_cast<Eigen::Index>(k)] = fo.fitness()[static_cast<Eigen::Index>(m[k])];
        }
        const Vector beta = (a.transpose() * a).ldlt().solve(a.transpose() * b);
        out.push_back(beta.tail(d));
    }
    return out;
}

} // namespace

TEST(Basic, GridFixture) {
    const auto fo = test::problem_object("gallagher101", 2, 800, 2, 1, std::vector<int>{8, 5});
    const auto fv = calculate_feature_set(fo, "basic");
    EXPECT_EQ(fv.size(), 16u);
    EXPECT_EQ(fv.at("basic.dim").as_integer(), 2);
    EXPECT_EQ(fv.at("basic.observations").as_integer(), 800);
    EXPECT_EQ(fv.at("basic.cells_total").as_integer(), 40);
    EXPECT_EQ(fv.at("basic.cells_filled").as_integer(), 40);
    EXPECT_DOUBLE_EQ(fv["basic.cells_filled_ratio"], 1.0);
    EXPECT_EQ(fv.at("basic.blocks_min").as_integer(), 5);
    EXPECT_EQ(fv.at("basic.blocks_max").as_integer(), 8);
    EXPECT_DOUBLE_EQ(fv["basic.lower_min"], -5.0);
    EXPECT_DOUBLE_EQ(fv["basic.upper_max"], 5.0);
    EXPECT_DOUBLE_EQ(fv["basic.objective_min"], fo.objectives().minCoeff());
    EXPECT_DOUBLE_EQ(fv["basic.objective_max"], fo.objectives().maxCoeff());
    EXPECT_EQ(fv.at("basic.minimize_fun").as_integer(), 1);
    EXPECT_EQ(fv.at("basic.costs_fun_evals").as_integer(), 0);
}

TEST(Basic, WithoutBlocks) {
    const auto fo = test::function_object(test::sphere, 30, 3, -1, 2, 1);
    const auto fv = calculate_feature_set(fo, "basic");
    EXPECT_EQ(fv.at("basic.dim").as_integer(), 3);
    EXPECT_EQ(fv.at("basic.observations").as_integer(), 30);
    for (const auto* n : {"basic.blocks_min", "basic.blocks_max", "basic.cells_filled", "basic.cells_total", "basic.cells_filled_ratio"})
        EXPECT_TRUE(fv.at(n).is_missing()) << n;
}

TEST(Basic, PartlyFilledGrid) {
    Matrix x(4, 2);
    x << 0.1, 0.1, 0.2, 0.3, 0.9, 0.9, 0.7, 0.8;
    const auto fv = calculate_feature_set(with_blocks(x, Vector::Zero(4), 0, 1, {2, 2}), "basic");
    EXPECT_EQ(fv.at("basic.cells_filled").as_integer(), 2);
    EXPECT_DOUBLE_EQ(fv["basic.cells_filled_ratio"], 0.5);
}

TEST(Limo, GloballyLinear) {
    const auto f = [](const Vector& v) { return 3 * v[0] + 4 * v[1]; };
    const auto fo = test::function_object(f, 400, 2, 0, 1, 3, std::vector<int>{3, 3});
    const auto fv = calculate_feature_set(fo, "limo");
    EXPECT_EQ(fv.size(), 14u);
    EXPECT_NEAR(fv["limo.avg_length"], 5.0, 1e-9);
    EXPECT_NEAR(fv["limo.cor"], 1.0, 1e-9);
    EXPECT_NEAR(fv["limo.sd_mean"], 0.0, 1e-9);
    EXPECT_NEAR(fv["limo.length.mean"], 5.0, 1e-9);
    EXPECT_NEAR(fv["limo.length.sd"], 0.0, 1e-9);
    EXPECT_NEAR(fv["limo.ratio.mean"], 4.0 / 3.0, 1e-9);
    EXPECT_NEAR(fv["limo.avg_length.norm"], 1.0, 1e-9);
    EXPECT_NEAR(fv["limo.cor.norm"], 1.0, 1e-9);
    EXPECT_EQ(fv.at("limo.costs_fun_evals").as_integer(), 0);
}

TEST(Limo, SphereSlopesCancelAndMatchTheOracle) {
    const auto fo = test::function_object(test::sphere, 2000, 2, -5, 5, 4, std::vector<int>{4, 4});
    const auto fv = calculate_feature_set(fo, "limo");
    const auto slopes = cell_slopes_oracle(fo);
    ASSERT_EQ(slopes.size(), 16u);
    Vector avg = Vector::Zero(2);
    double len = 0;
    for (const auto& s : slopes) {
        avg += s / 16.0;
        len += s.norm() / 16.0;
    }
    EXPECT_NEAR(fv["limo.avg_length"], avg.norm(), 1e-8);
    EXPECT_NEAR(fv["limo.length.mean"], len, 1e-8);
    EXPECT_LT(fv["limo.avg_length"], 0.1 * fv["limo.length.mean"]);
    const Matrix coef = cell_coefficients(fo);
    for (std::size_t i = 0; i < slopes.size(); ++i) EXPECT_LE((coef.row(static_cast<Eigen::Index>(i)).transpose() - slopes[i]).norm(), 1e-8);
}

TEST(Limo, SingleQualifyingCell) {
    const auto f = [](const Vector& v) { return v[0] - 2 * v[1]; };
    const auto fo = test::function_object(f, 20, 2, 0, 1, 5, std::vector<int>{1, 1});
    const auto fv = calculate_feature_set(fo, "limo");
    EXPECT_TRUE(fv.at("limo.cor").is_missing());
    EXPECT_NEAR(fv["limo.avg_length"], std::sqrt(5.0), 1e-9);
    EXPECT_NEAR(fv["limo.length.mean"], std::sqrt(5.0), 1e-9);
}

TEST(Limo, NoQualifyingCell) {
    Matrix x(9, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) x.row(i * 3 + j) << i + 0.5, j + 0.5;
    const auto fv = calculate_feature_set(with_blocks(x, test::evaluate_all(test::sphere, x), 0, 3, {3, 3}), "limo");
    for (const auto& [name, value] : fv.entries()) {
        if (name.find("costs") != std::string::npos) continue;
        EXPECT_TRUE(value.is_missing()) << name;
    }
}

TEST(Pca, PointsOnALine) {
    Matrix x(20, 2);
    for (int i = 0; i < 20; ++i) x.row(i) << i * 0.1, 0.3 - i * 0.2;
    const Vector y = test::uniform_matrix(20, 1, 0, 1, 2).col(0);
    const auto fv = calculate_feature_set(create_feature_object(x, y), "pca");
    EXPECT_EQ(fv.size(), 10u);
    EXPECT_NEAR(fv["pca.expl_var_PC1.cov_x"], 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(fv["pca.expl_var.cov_x"], 0.5);
    EXPECT_NEAR(fv["pca.expl_var_PC1.cor_x"], 1.0, 1e-12);
}

TEST(Pca, IsotropicSampleMatchesClosedForm) {
    const Matrix x = test::uniform_matrix(1000, 2, -1, 1, 6);
    const auto fo = create_feature_object(x, test::evaluate_all(test::sphere, x));
    const auto fv = calculate_feature_set(fo, "pca");
    const Matrix c = x.rowwise() - x.colwise().mean();
    const Matrix cov = c.transpose() * c;
    const double r = cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1));
    EXPECT_NEAR(fv["pca.expl_var_PC1.cor_x"], (1 + std::abs(r)) / 2, 1e-12);
    EXPECT_NEAR(fv["pca.expl_var_PC1.cor_x"], 0.5, 0.05);
    EXPECT_DOUBLE_EQ(fv["pca.expl_var.cor_x"], 1.0);
}

TEST(Pca, ConstantObjective) {
    const Matrix x = test::uniform_matrix(50, 3, 0, 1, 7);
    const auto fv = calculate_feature_set(create_feature_object(x, Vector::Constant(50, 2.0)), "pca");
    EXPECT_TRUE(fv.at("pca.expl_var.cor_init").is_missing());
    EXPECT_TRUE(fv.at("pca.expl_var_PC1.cor_init").is_missing());
    EXPECT_NEAR(fv["pca.expl_var_PC1.cov_init"], fv["pca.expl_var_PC1.cov_x"], 1e-12);
    EXPECT_FALSE(fv.at("pca.expl_var.cor_x").is_missing());
}

TEST(Pca, CorrelationIgnoresAxisScaling) {
    const Matrix x = test::uniform_matrix(200, 3, 0, 1, 8);
    Vector y(200);
    for (Eigen::Index i = 0; i < 200; ++i) y[i] = x(i, 0) + 2 * x(i, 1) * x(i, 2);
    Matrix z = x;
    z.col(0) = 40.0 * z.col(0).array() - 3.0;
    z.col(2) = 0.01 * z.col(2).array() + 7.0;
    const auto a = calculate_feature_set(create_feature_object(x, y), "pca");
    const auto b = calculate_feature_set(create_feature_object(z, y), "pca");
    for (const auto* n : {"pca.expl_var.cor_x", "pca.expl_var.cor_init", "pca.expl_var_PC1.cor_x", "pca.expl_var_PC1.cor_init"})
        EXPECT_NEAR(a[n], b[n], 1e-10) << n;
}

TEST(Pca, ThresholdControl) {
    const Matrix x = test::uniform_matrix(200, 4, 0, 1, 9);
    ControlParams c;
    c.set("pca.cov_x", "0.1");
    const auto fv = calculate_feature_set(create_feature_object(x, Vector::Zero(200)), "pca", c);
    EXPECT_DOUBLE_EQ(fv["pca.expl_var.cov_x"], 0.25);
}

TEST(Pca, Preconditions) {
    const Matrix x = test::uniform_matrix(3, 2, 0, 1, 9);
    EXPECT_THROW(pca(create_feature_object(x, Vector::Zero(3))), InvalidArgument);
}

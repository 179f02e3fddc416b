#include <gtest/gtest.h>

#include <map>

#include "helpers.hpp"
#include "lkit/feature_sets.hpp"
#include "lkit/features/ela.hpp"

using namespace lkit;

namespace {

FeatureObject design_object(Matrix x, Vector y) { return create_feature_object(std::move(x), std::move(y)); }

Matrix shuffled_rows(const Matrix& x, const std::vector<std::size_t>& perm) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < perm.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(perm[i]));
    return out;
}

Vector shuffled(const Vector& y, const std::vector<std::size_t>& perm) {
    Vector out(y.size());
    for (std::size_t i = 0; i < perm.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(perm[i])];
    return out;
}

double quad_aniso(const Vector& x) { return x[0] * x[0] + 10 * x[1] * x[1]; }

} // namespace

TEST(ElaSizes, PerSetCountsIncludingCosts) {
    const auto fo = test::function_object(test::sphere, 200, 2, -5, 5, 1);
    const std::map<std::string, std::size_t> expected{{"ela_conv", 6}, {"ela_curv", 26}, {"ela_distr", 5},
                                                      {"ela_level", 20}, {"ela_local", 15}, {"ela_meta", 11}};
    std::size_t total = 0;
    for (const auto& [set, count] : expected) {
        const auto fv = calculate_feature_set(fo, set, {}, 1);
        EXPECT_EQ(fv.size(), count) << set;
        EXPECT_EQ(fv.names()[count - 2], set + ".costs_fun_evals");
        EXPECT_EQ(fv.names()[count - 1], set + ".costs_runtime");
        total += fv.size();
    }
    EXPECT_EQ(total, 83u);
}

TEST(ElaConv, SphereIsConvex) {
    const auto fv = ela_conv(test::function_object(test::sphere, 100, 2, -5, 5, 2), {}, 1);
    EXPECT_EQ(fv["ela_conv.conv_prob"], 1.0);
    EXPECT_EQ(fv["ela_conv.lin_prob"], 0.0);
    EXPECT_LT(fv["ela_conv.lin_dev.orig"], 0.0);
    EXPECT_EQ(fv.at("ela_conv.costs_fun_evals").as_integer(), 1000);
}

TEST(ElaConv, LinearFunctionIsLinear) {
    const auto fv = ela_conv(test::function_object([](const Vector& x) { return 2 * x[0] + 1; }, 100, 2, -5, 5, 3), {}, 1);
    EXPECT_EQ(fv["ela_conv.lin_prob"], 1.0);
    EXPECT_EQ(fv["ela_conv.conv_prob"], 0.0);
    EXPECT_NEAR(fv["ela_conv.lin_dev.orig"], 0.0, 1e-12);
    EXPECT_NEAR(fv["ela_conv.lin_dev.abs"], 0.0, 1e-12);
}

TEST(ElaConv, ConcaveMirror) {
    const auto fv = ela_conv(test::function_object([](const Vector& x) { return -x.squaredNorm(); }, 100, 2, -5, 5, 4), {}, 1);
    EXPECT_EQ(fv["ela_conv.conv_prob"], 0.0);
    EXPECT_GT(fv["ela_conv.lin_dev.orig"], 0.0);
}

TEST(ElaConv, PairCountFollowsControl) {
    ControlParams c;
    c.set("ela_conv.nsample", "250");
    const auto fv = ela_conv(test::function_object(test::sphere, 50, 2, -5, 5, 4), c, 1);
    EXPECT_EQ(fv.at("ela_conv.costs_fun_evals").as_integer(), 250);
}

TEST(ElaConv, NeedsFunction) {
    const auto fo = design_object(test::uniform_matrix(30, 2, 0, 1, 1), Vector::Zero(30));
    try {
        ela_conv(fo);
        FAIL();
    } catch (const Unavailable& e) {
        EXPECT_NE(std::string(e.what()).find("requires function"), std::string::npos);
    }
}

TEST(ElaCurv, ConstantHessianRatio) {
    const auto fv = ela_curv(test::function_object(quad_aniso, 100, 2, -5, 5, 5), {}, 1);
    EXPECT_NEAR(fv["ela_curv.hessian_cond.min"], 10.0, 1e-3);
    EXPECT_NEAR(fv["ela_curv.hessian_cond.max"], 10.0, 1e-3);
    EXPECT_NEAR(fv["ela_curv.hessian_cond.mean"], 10.0, 1e-3);
    EXPECT_EQ(fv.at("ela_curv.hessian_cond.nas").as_integer(), 0);
    EXPECT_GT(fv.at("ela_curv.costs_fun_evals").as_integer(), 0);
}

TEST(ElaCurv, LinearFunction) {
    const auto fo = test::function_object([](const Vector& x) { return 3 * x[0] - 4 * x[1]; }, 60, 2, -5, 5, 6);
    const auto fv = ela_curv(fo, {}, 1);
    EXPECT_NEAR(fv["ela_curv.grad_norm.mean"], 5.0, 1e-6);
    EXPECT_NEAR(fv["ela_curv.grad_norm.sd"], 0.0, 1e-6);
    EXPECT_EQ(fv.at("ela_curv.hessian_cond.nas").as_integer(), 60);
    EXPECT_TRUE(fv.at("ela_curv.hessian_cond.mean").is_missing());
}

TEST(ElaCurv, AggregatesEqualRecomputation) {
    const auto fo = test::problem_object("rosenbrock", 2, 30, 1, 3);
    const auto pts = curvature_samples(fo, {}, 9);
    ASSERT_EQ(pts.size(), 30u);
    const auto fv = ela_curv(fo, {}, 9);
    auto check = [&](const std::string& name, auto member) {
        std::vector<double> v;
        for (const auto& q : pts) v.push_back(q.*member);
        const auto fin = stats::finite_only(v);
        const std::span<const double> s(fin.data(), fin.size());
        EXPECT_DOUBLE_EQ(fv["ela_curv." + name + ".min"], stats::min(s));
        EXPECT_DOUBLE_EQ(fv["ela_curv." + name + ".max"], stats::max(s));
        EXPECT_DOUBLE_EQ(fv["ela_curv." + name + ".mean"], stats::mean(s));
        EXPECT_DOUBLE_EQ(fv["ela_curv." + name + ".median"], stats::median(s));
        EXPECT_DOUBLE_EQ(fv["ela_curv." + name + ".lq"], stats::quantile(s, 0.25));
        EXPECT_DOUBLE_EQ(fv["ela_curv." + name + ".uq"], stats::quantile(s, 0.75));
        EXPECT_DOUBLE_EQ(fv["ela_curv." + name + ".sd"], stats::sd(s));
        EXPECT_EQ(fv.at("ela_curv." + name + ".nas").as_integer(), static_cast<std::int64_t>(v.size() - fin.size()));
    };
    check("grad_norm", &CurvaturePoint::grad_norm);
    check("grad_scale", &CurvaturePoint::grad_scale);
    check("hessian_cond", &CurvaturePoint::hessian_cond);
    EXPECT_EQ(fv.at("ela_curv.costs_fun_evals").as_integer(), static_cast<std::int64_t>(fo.evaluation_count() / 2));
}

TEST(ElaDistr, MatchesMomentOracle) {
    Rng rng(12);
    Vector y(2000);
    for (auto& v : y) v = rng.normal();
    const auto fv = ela_distr(design_object(test::uniform_matrix(2000, 2, 0, 1, 1), y));
    const std::span<const double> s(y.data(), 2000);
    EXPECT_NEAR(fv["ela_distr.skewness"], stats::skewness(s), 1e-12);
    EXPECT_NEAR(fv["ela_distr.kurtosis"], stats::kurtosis(s), 1e-12);
    EXPECT_EQ(fv.at("ela_distr.number_of_peaks").as_integer(), 1);
    EXPECT_EQ(fv.at("ela_distr.costs_fun_evals").as_integer(), 0);
}

TEST(ElaDistr, BimodalObjectives) {
    Rng rng(13);
    Vector y(1000);
    for (Eigen::Index i = 0; i < 1000; ++i) y[i] = rng.normal() + (i % 2 ? 10.0 : -10.0);
    EXPECT_EQ(ela_distr(design_object(test::uniform_matrix(1000, 2, 0, 1, 1), y)).at("ela_distr.number_of_peaks").as_integer(), 2);
}

TEST(ElaDistr, ConstantObjectives) {
    const auto fv = ela_distr(design_object(test::uniform_matrix(20, 2, 0, 1, 1), Vector::Constant(20, 4.0)));
    EXPECT_EQ(fv.at("ela_distr.number_of_peaks").as_integer(), 1);
    EXPECT_TRUE(fv.at("ela_distr.skewness").is_missing());
    EXPECT_TRUE(fv.at("ela_distr.kurtosis").is_missing());
}

TEST(ElaLevel, LinearBoundaryIsEasyForLda) {
    const Matrix x = test::uniform_matrix(400, 2, 0, 1, 21);
    const auto fv = ela_level(design_object(x, x.col(0)), {}, 1);
    EXPECT_LE(fv["ela_level.mmce_lda_50"], 0.05);
    EXPECT_EQ(fv.at("ela_level.costs_fun_evals").as_integer(), 0);
}

TEST(ElaLevel, NoiseGivesComparableErrors) {
    Rng rng(5);
    Vector y(600);
    for (auto& v : y) v = rng.uniform();
    const auto fv = ela_level(design_object(test::uniform_matrix(600, 2, 0, 1, 22), y), {}, 1);
    for (const auto* q : {"10", "25", "50"})
        for (const auto* pair : {"lda_qda", "lda_gmda", "qda_gmda"})
            EXPECT_NEAR(fv[std::string("ela_level.") + pair + "_" + q], 1.0, 0.3) << pair << " " << q;
}

TEST(ElaLevel, RatioOrderAndTooFewObservations) {
    const auto fo = test::function_object(test::sphere, 200, 2, -5, 5, 8);
    const auto fv = ela_level(fo, {}, 2);
    EXPECT_DOUBLE_EQ(fv["ela_level.lda_qda_25"], stats::ratio(fv["ela_level.mmce_lda_25"], fv["ela_level.mmce_qda_25"]));
    EXPECT_THROW(ela_level(design_object(test::uniform_matrix(15, 2, 0, 1, 1), Vector::LinSpaced(15, 0, 1))), InvalidArgument);
}

TEST(ElaLocal, SphereHasOneCluster) {
    const auto fo = test::function_object(test::sphere, 200, 2, -5, 5, 9);
    const auto fv = ela_local(fo, {}, 1);
    EXPECT_EQ(fv.at("ela_local.n_loc_opt.abs").as_integer(), 1);
    EXPECT_DOUBLE_EQ(fv["ela_local.n_loc_opt.rel"], 1.0 / 100.0);
    EXPECT_DOUBLE_EQ(fv["ela_local.best2mean_contr.orig"], 1.0);
    EXPECT_EQ(fv.at("ela_local.costs_fun_evals").as_integer(), static_cast<std::int64_t>(fo.evaluation_count()));
    EXPECT_DOUBLE_EQ(fv["ela_local.fun_evals.mean"] * 100.0, static_cast<double>(fo.evaluation_count()));
}

TEST(ElaLocal, TwoEqualBasins) {
    auto f = [](const Vector& x) { return std::min(std::pow(x[0] + 2, 2), std::pow(x[0] - 2, 2)); };
    const auto fo = test::function_object(f, 100, 1, -5, 5, 10);
    const auto runs = local_search_samples(fo, {}, 1);
    ASSERT_EQ(runs.size(), 50u);
    std::map<int, int> sizes;
    for (const auto& r : runs) {
        ++sizes[r.cluster];
        // Basin membership by the start's side of the ridge at 0.
        EXPECT_NEAR(r.optimum[0], fo.points()(static_cast<Eigen::Index>(r.start), 0) < 0 ? -2.0 : 2.0, 1e-3);
    }
    EXPECT_EQ(sizes.size(), 2u);
    const auto fv = ela_local(fo, {}, 1);
    EXPECT_EQ(fv.at("ela_local.n_loc_opt.abs").as_integer(), 2);
    EXPECT_EQ(sizes.begin()->second + std::next(sizes.begin())->second, 50);
    EXPECT_DOUBLE_EQ(fv["ela_local.basin_sizes.avg_best"] + fv["ela_local.basin_sizes.avg_non_best"], 50.0);
}

TEST(ElaMeta, ExactLinear) {
    const Matrix x = test::uniform_matrix(50, 2, -5, 5, 11);
    const Vector y = (2 + 3 * x.col(0).array() + 4 * x.col(1).array()).matrix();
    const auto fv = ela_meta(design_object(x, y));
    EXPECT_NEAR(fv["ela_meta.lin_simple.adj_r2"], 1.0, 1e-10);
    EXPECT_NEAR(fv["ela_meta.lin_simple.intercept"], 2.0, 1e-10);
    EXPECT_NEAR(fv["ela_meta.lin_simple.coef.min"], 3.0, 1e-10);
    EXPECT_NEAR(fv["ela_meta.lin_simple.coef.max"], 4.0, 1e-10);
    EXPECT_NEAR(fv["ela_meta.lin_simple.coef.max_by_min"], 4.0 / 3.0, 1e-10);
    EXPECT_EQ(fv.at("ela_meta.costs_fun_evals").as_integer(), 0);
}

TEST(ElaMeta, QuadraticCondition) {
    const Matrix x = test::uniform_matrix(50, 2, -5, 5, 12);
    const auto fv = ela_meta(design_object(x, test::evaluate_all(quad_aniso, x)));
    EXPECT_NEAR(fv["ela_meta.quad_simple.adj_r2"], 1.0, 1e-10);
    EXPECT_NEAR(fv["ela_meta.quad_simple.cond"], 10.0, 1e-8);
}

TEST(ElaMeta, InteractionModelNestsLinear) {
    const Matrix x = test::uniform_matrix(50, 2, -5, 5, 13);
    const auto fv = ela_meta(design_object(x, test::evaluate_all([](const Vector& v) { return v[0] * v[1]; }, x)));
    EXPECT_NEAR(fv["ela_meta.lin_w_interact.adj_r2"], 1.0, 1e-10);
    EXPECT_GT(fv["ela_meta.lin_w_interact.adj_r2"], fv["ela_meta.lin_simple.adj_r2"]);
}

TEST(ElaMeta, AdjustedRSquaredInvariantUnderAffineRescaling) {
    const Matrix x = test::uniform_matrix(80, 3, -1, 1, 14);
    const Vector y = test::evaluate_all([](const Vector& v) { return std::sin(v[0]) + v[1] * v[2] + v[2] * v[2]; }, x);
    Matrix z = x;
    z.col(0) = 3.0 * z.col(0).array() + 7.0;
    z.col(1) = -0.5 * z.col(1).array() - 1.0;
    z.col(2) = 100.0 * z.col(2).array() + 2.0;
    const auto a = ela_meta(design_object(x, y));
    const auto b = ela_meta(design_object(z, y));
    for (const auto* n : {"ela_meta.lin_simple.adj_r2", "ela_meta.lin_w_interact.adj_r2", "ela_meta.quad_simple.adj_r2",
                          "ela_meta.quad_w_interact.adj_r2"})
        EXPECT_NEAR(a[n], b[n], 1e-10) << n;
}

TEST(ElaInvariants, RowShuffleLeavesDeterministicSetsUnchanged) {
    const Matrix x = test::uniform_matrix(120, 2, -5, 5, 15);
    const Vector y = test::evaluate_all([](const Vector& v) { return std::cos(v[0]) * v[1] + v.squaredNorm(); }, x);
    const auto perm = Rng(7).permutation(120);
    const auto a = design_object(x, y), b = design_object(shuffled_rows(x, perm), shuffled(y, perm));
    for (const auto* set : {"ela_distr", "ela_meta"}) {
        const auto fa = calculate_feature_set(a, set), fb = calculate_feature_set(b, set);
        for (const auto& [name, v] : fa) {
            if (name.find("costs_runtime") != std::string::npos) continue;
            if (v.is_missing()) {
                EXPECT_TRUE(fb.at(name).is_missing()) << name;
                continue;
            }
            EXPECT_NEAR(v.as_double(), fb[name], 1e-10 * std::max(1.0, std::abs(v.as_double()))) << name;
        }
    }
}

TEST(ElaInvariants, StochasticSetsAreSeedDeterministic) {
    const auto fo = test::function_object(quad_aniso, 100, 2, -5, 5, 16);
    for (const auto* set : {"ela_conv", "ela_curv", "ela_level", "ela_local"}) {
        auto a = calculate_feature_set(fo, set, {}, 5), b = calculate_feature_set(fo, set, {}, 5);
        for (const auto& [name, v] : a) {
            if (name.find("costs_runtime") != std::string::npos) continue;
            EXPECT_EQ(v, b.at(name)) << name;
        }
    }
}

#include <gtest/gtest.h>

#include <map>

#include "helpers.hpp"
#include "lkit/feature_sets.hpp"
#include "lkit/features/ic.hpp"

using namespace lkit;

namespace {

SymbolSequence line_sequence(const std::vector<double>& y) {
    const auto n = static_cast<Eigen::Index>(y.size());
    Matrix x(n, 1);
    Vector v(n);
    std::vector<std::size_t> tour;
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = static_cast<double>(i);
        v[i] = y[static_cast<std::size_t>(i)];
        tour.push_back(static_cast<std::size_t>(i));
    }
    return sequence_from_tour(x, v, tour);
}

double entropy_oracle(const std::vector<int>& s) {
    std::map<std::pair<int, int>, int> blocks;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) ++blocks[{s[k], s[k + 1]}];
    double h = 0;
    for (const auto& [ab, count] : blocks) {
        if (ab.first == ab.second) continue;
        const double p = static_cast<double>(count) / static_cast<double>(s.size() - 1);
        h -= p * std::log(p) / std::log(6.0);
    }
    return h;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

} // namespace

TEST(Ic, HandAlternatingSequence) {
    const auto seq = line_sequence({0, 1, 0, 1});
    EXPECT_EQ(seq.symbols(0.0), (std::vector<int>{1, -1, 1}));
    const auto ic0 = information_content(seq.symbols(0.0));
    EXPECT_NEAR(ic0.h, std::log(2.0) / std::log(6.0), 1e-15);
    EXPECT_NEAR(ic0.h, 0.3869, 1e-4);
    EXPECT_DOUBLE_EQ(ic0.m, 1.0);
    const auto ic2 = information_content(seq.symbols(2.0));
    EXPECT_DOUBLE_EQ(ic2.h, 0.0);
    EXPECT_DOUBLE_EQ(ic2.m, 0.0);

    const auto c = ic_curves(seq);
    EXPECT_EQ(c.epsilon.front(), 0.0);
    EXPECT_EQ(c.epsilon.size(), 1001u);
    EXPECT_NEAR(c.h.front(), std::log(2.0) / std::log(6.0), 1e-15);
    EXPECT_DOUBLE_EQ(c.m0, 1.0);
}

TEST(Ic, PartialInformationDropsZerosAndRepeats) {
    EXPECT_DOUBLE_EQ(information_content({1, 1, 0, -1, -1, 0, 1}).m, 3.0 / 7.0);
    EXPECT_DOUBLE_EQ(information_content({0, 0, 0}).m, 0.0);
}

TEST(Ic, EntropyMatchesBlockEnumeration) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const auto len = 2 + rng.below(49);
        std::vector<int> s(len);
        for (auto& v : s) v = static_cast<int>(rng.below(3)) - 1;
        const auto ic = information_content(s);
        EXPECT_NEAR(ic.h, entropy_oracle(s), 1e-12);
        EXPECT_GE(ic.h, 0.0);
        EXPECT_LE(ic.h, 1.0);
        EXPECT_GE(ic.m, 0.0);
        EXPECT_LE(ic.m, 1.0);
    }
}

TEST(Ic, ConstantFunctionIsFlat) {
    const auto fo = test::function_object([](const Vector&) { return 3.0; }, 50, 2, 0, 1, 1);
    const auto c = ic_curves(fo);
    for (double h : c.h) EXPECT_EQ(h, 0.0);
    for (double m : c.m) EXPECT_EQ(m, 0.0);
    const auto fv = calculate_feature_set(fo, "ic");
    EXPECT_DOUBLE_EQ(fv["ic.h.max"], 0.0);
    EXPECT_DOUBLE_EQ(fv["ic.m0"], 0.0);
    EXPECT_TRUE(fv.at("ic.eps.s").is_missing());
    EXPECT_TRUE(fv.at("ic.eps.ratio").is_missing());
}

TEST(Ic, TourVisitsEveryPointOnce) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto fo = test::function_object(test::sphere, 100, 3, -5, 5, seed);
        auto tour = build_symbol_sequence(fo, seed).tour;
        std::sort(tour.begin(), tour.end());
        for (std::size_t i = 0; i < tour.size(); ++i) EXPECT_EQ(tour[i], i);
    }
}

TEST(Ic, SortedLineFromAnEndIsVisitedInOrder) {
    const auto n = 12;
    Matrix x(n, 1);
    for (int i = 0; i < n; ++i) x(i, 0) = i * i * 0.1 + i;
    const Vector y = x.col(0);
    int from_end = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const auto tour = build_symbol_sequence(x, y, rng).tour;
        if (tour.front() != 0 && tour.front() != static_cast<std::size_t>(n - 1)) continue;
        ++from_end;
        EXPECT_TRUE(std::is_sorted(tour.begin(), tour.end()) || std::is_sorted(tour.rbegin(), tour.rend()));
    }
    EXPECT_GT(from_end, 0);
}

TEST(Ic, DuplicatePointsAreSkipped) {
    Matrix x(4, 1);
    x << 0, 1, 1, 2;
    Vector y(4);
    y << 0, 1, 5, 0;
    const auto seq = sequence_from_tour(x, y, {0, 1, 2, 3});
    EXPECT_EQ(seq.slopes.size(), 2u);
    Rng rng(1);
    EXPECT_THROW(build_symbol_sequence(Matrix::Zero(2, 1), Vector::Zero(2), rng), InvalidArgument);
}

TEST(Ic, SymbolsCoarsenWithEpsilon) {
    const auto fo = test::problem_object("rastrigin", 2, 300, 1, 2);
    const auto seq = build_symbol_sequence(fo, 4);
    const auto c = ic_curves(seq);
    std::size_t zeros_prev = 0;
    for (std::size_t k = 0; k < c.epsilon.size(); ++k) {
        const auto s = seq.symbols(c.epsilon[k]);
        const auto zeros = static_cast<std::size_t>(std::count(s.begin(), s.end(), 0));
        EXPECT_GE(zeros, zeros_prev);
        zeros_prev = zeros;
        EXPECT_GE(c.h[k], 0.0);
        EXPECT_LE(c.h[k], 1.0);
        if (k == 0) continue;
        EXPECT_LE(c.m[k], c.m[k - 1] + 1e-15);
    }
    EXPECT_DOUBLE_EQ(c.h.back(), 0.0);
    EXPECT_DOUBLE_EQ(c.m.back(), 0.0);
}

TEST(Ic, ScalingShiftsTheCurve) {
    const auto fo = test::problem_object("rosenbrock", 2, 200, 1, 3);
    const auto seq = build_symbol_sequence(fo, 1);
    SymbolSequence scaled = seq;
    for (auto& s : scaled.slopes) s *= 8.0;
    const auto c = ic_curves(seq);
    for (double eps : c.epsilon) {
        const auto a = information_content(scaled.symbols(eps));
        const auto b = information_content(seq.symbols(eps / 8.0));
        EXPECT_DOUBLE_EQ(a.h, b.h);
        EXPECT_DOUBLE_EQ(a.m, b.m);
    }
    EXPECT_DOUBLE_EQ(ic_curves(scaled).m0, c.m0);
}

TEST(Ic, FeaturesEqualCurveMarkers) {
    const auto fo = test::problem_object("gallagher101", 2, 400, 3, 5);
    const auto fv = calculate_feature_set(fo, "ic", {}, 17);
    const auto c = ic_curves(fo, {}, 17);
    EXPECT_EQ(fv.size(), 7u);
    EXPECT_TRUE(same(fv["ic.h.max"], c.h_max));
    EXPECT_TRUE(same(fv["ic.eps.s"], c.eps_s));
    EXPECT_TRUE(same(fv["ic.eps.max"], c.eps_max));
    EXPECT_TRUE(same(fv["ic.m0"], c.m0));
    EXPECT_TRUE(same(fv["ic.eps.ratio"], c.eps_ratio));
    EXPECT_EQ(fv.at("ic.costs_fun_evals").as_integer(), 0);
    EXPECT_EQ(*std::max_element(c.h.begin(), c.h.end()), c.h_max);
}

TEST(Ic, SeedControlOverridesTheCallSeed) {
    const auto fo = test::problem_object("rastrigin", 2, 200, 1, 2);
    ControlParams c;
    c.set("ic.seed", "9");
    EXPECT_EQ(calculate_feature_set(fo, "ic", c, 1)["ic.m0"], calculate_feature_set(fo, "ic", {}, 9)["ic.m0"]);
}

TEST(Ic, EpsilonGridControls) {
    const auto seq = line_sequence({0, 1, 0, 1, 3});
    ControlParams c;
    c.set("ic.epsilon_steps", "11");
    c.set("ic.epsilon_min", "0.01");
    c.set("ic.epsilon_max", "100");
    const auto curves = ic_curves(seq, c);
    ASSERT_EQ(curves.epsilon.size(), 12u);
    EXPECT_NEAR(curves.epsilon[1], 0.01, 1e-15);
    EXPECT_NEAR(curves.epsilon.back(), 100.0, 1e-10);
    c.set("ic.epsilon_max", "0.001");
    EXPECT_THROW(ic_curves(seq, c), InvalidArgument);
}

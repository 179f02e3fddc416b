#include <gtest/gtest.h>

#include <functional>
#include <memory>

#include "helpers.hpp"
#include "lkit/expression.hpp"
#include "lkit/problems.hpp"

using namespace lkit;

namespace {

double eval_text(const std::string& text, std::vector<double> x) { return parse_expression(text, x.size())(x); }

std::size_t parse_error_position(const std::string& text, std::size_t dim) {
    try {
        parse_expression(text, dim);
    } catch (const ParseError& e) {
        return e.position();
    }
    return 0;
}

/// Random scalar expression with its own text and direct interpretation.
struct RandomTree {
    std::string text;
    std::function<double(const std::vector<double>&)> eval;
};

RandomTree random_tree(Rng& rng, int depth, std::size_t dim) {
    if (depth == 0 || rng.uniform() < 0.2) {
        if (rng.uniform() < 0.5) {
            const double c = std::round(rng.uniform(-4, 4) * 100) / 100;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", c);
            return {c < 0 ? std::string("(") + buf + ")" : buf, [c](const std::vector<double>&) { return c; }};
        }
        const auto k = static_cast<std::size_t>(rng.below(dim));
        return {"x" + std::to_string(k + 1), [k](const std::vector<double>& x) { return x[k]; }};
    }
    auto a = random_tree(rng, depth - 1, dim);
    auto b = random_tree(rng, depth - 1, dim);
    switch (rng.below(9)) {
    case 0: return {"(" + a.text + " + " + b.text + ")", [a, b](const auto& x) { return a.eval(x) + b.eval(x); }};
    case 1: return {"(" + a.text + " - " + b.text + ")", [a, b](const auto& x) { return a.eval(x) - b.eval(x); }};
    case 2: return {"(" + a.text + " * " + b.text + ")", [a, b](const auto& x) { return a.eval(x) * b.eval(x); }};
    case 3:
        return {"(" + a.text + " / (abs(" + b.text + ") + 1))", [a, b](const auto& x) { return a.eval(x) / (std::abs(b.eval(x)) + 1); }};
    case 4: return {"sin(" + a.text + ")", [a](const auto& x) { return std::sin(a.eval(x)); }};
    case 5: return {"cos(" + a.text + ")", [a](const auto& x) { return std::cos(a.eval(x)); }};
    case 6: return {"(-" + a.text + ")", [a](const auto& x) { return -a.eval(x); }};
    case 7: return {"sqrt(abs(" + a.text + "))", [a](const auto& x) { return std::sqrt(std::abs(a.eval(x))); }};
    default:
        return {"max(" + a.text + ", " + b.text + ")", [a, b](const auto& x) { return std::max(a.eval(x), b.eval(x)); }};
    }
}

} // namespace

TEST(Expression, Examples) {
    EXPECT_DOUBLE_EQ(eval_text("sum(x^2)", {1, 2, 3}), 14.0);
    EXPECT_DOUBLE_EQ(eval_text("x1*x2 - 2^3^1", {3, 4}), 4.0);
    EXPECT_DOUBLE_EQ(eval_text("2^3^2", {0}), 512.0);
    EXPECT_DOUBLE_EQ(eval_text("-2^2", {0}), -4.0);
    EXPECT_DOUBLE_EQ(eval_text("2^-1", {0}), 0.5);
    EXPECT_DOUBLE_EQ(eval_text("1 + 2 * 3 - 4 / 2", {0}), 5.0);
    EXPECT_DOUBLE_EQ(eval_text("(1 + 2) * 3", {0}), 9.0);
    EXPECT_DOUBLE_EQ(eval_text("max(x)", {1, 7, 3}), 7.0);
    EXPECT_DOUBLE_EQ(eval_text("min(x)", {1, 7, 3}), 1.0);
    EXPECT_DOUBLE_EQ(eval_text("sum(max(x, 2))", {1, 7, 3}), 12.0);
    EXPECT_DOUBLE_EQ(eval_text("pow(x2, 2) + abs(x1)", {-3, 4}), 19.0);
    EXPECT_NEAR(eval_text("cos(pi) + log(e)", {0}), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(eval_text("1.5e2", {0}), 150.0);
}

TEST(Expression, ParseErrorsCarryPositions) {
    EXPECT_EQ(parse_error_position("x1 +", 2), 5u);
    EXPECT_EQ(parse_error_position("x1 + foo", 2), 6u);
    EXPECT_EQ(parse_error_position("x3", 2), 1u);
    EXPECT_GT(parse_error_position("(x1 + 1", 2), 0u);
    EXPECT_GT(parse_error_position("sin(x1, x2)", 2), 0u);
    EXPECT_GT(parse_error_position("x1 x2", 2), 0u);
    EXPECT_GT(parse_error_position("", 2), 0u);
    EXPECT_GT(parse_error_position("bogus(x1)", 2), 0u);
    try {
        parse_expression("x1 +", 2);
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("position 5"), std::string::npos);
    }
}

TEST(Expression, DomainErrorsAreEvaluationErrors) {
    EXPECT_THROW(eval_text("1 / x1", {0}), EvaluationError);
    EXPECT_THROW(eval_text("log(x1)", {0}), EvaluationError);
    EXPECT_THROW(eval_text("log(x1)", {-1}), EvaluationError);
    EXPECT_THROW(eval_text("sqrt(x1)", {-1}), EvaluationError);
    EXPECT_THROW(eval_text("exp(x1)", {1000}), EvaluationError);
}

TEST(Expression, PrintParseIsAFixedPoint) {
    for (const auto* text : {"sum(x^2)", "x1*x2 - 2^3^1", "-x1^2 + sin(x2)/3", "max(x1, x2, 0.5) * exp(-sum(abs(x)))"}) {
        const auto a = parse_expression(text, 2);
        const auto b = parse_expression(a.to_string(), 2);
        EXPECT_EQ(a.to_string(), b.to_string()) << text;
        const std::vector<double> x{0.3, -1.7};
        EXPECT_EQ(a(x), b(x)) << text;
    }
}

TEST(Expression, RandomTreesMatchDirectInterpretation) {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        const std::size_t dim = 1 + rng.below(3);
        const auto tree = random_tree(rng, 5, dim);
        const auto e = parse_expression(tree.text, dim);
        const auto round_trip = parse_expression(e.to_string(), dim);
        for (int k = 0; k < 5; ++k) {
            std::vector<double> x(dim);
            for (auto& v : x) v = rng.uniform(-3, 3);
            const double want = tree.eval(x);
            EXPECT_NEAR(e(x), want, 1e-12 * std::max(1.0, std::abs(want))) << tree.text;
            EXPECT_EQ(round_trip(x), e(x)) << tree.text;
        }
    }
}

TEST(Problems, KnownValues) {
    const std::vector<double> origin{0, 0};
    for (const auto* name : {"sphere", "rastrigin"}) EXPECT_DOUBLE_EQ(make_problem(name, 2).evaluate(origin), 0.0) << name;
    EXPECT_NEAR(make_problem("rastrigin", 2).evaluate(std::vector<double>{0.5, 0.5}), 40.5, 1e-12);
    EXPECT_DOUBLE_EQ(make_problem("rosenbrock", 3).evaluate(std::vector<double>{1, 1, 1}), 0.0);
    EXPECT_DOUBLE_EQ(make_problem("sphere", 4).evaluate(std::vector<double>{1, 2, 3, 4}), 30.0);
    const auto slope = make_problem("linear_slope", 3, 5);
    EXPECT_NEAR(slope(*slope.optimum), 0.0, 1e-12);
}

TEST(Problems, GallagherIsSeededAndOptimal) {
    const auto a = make_problem("gallagher101", 2, 2);
    const auto b = make_problem("gallagher101", 2, 2);
    const auto c = make_problem("gallagher101", 2, 3);
    const Matrix x = test::uniform_matrix(800, 2, -5, 5, 1);
    const Vector ya = evaluate_rows(a, x);
    EXPECT_EQ(ya, evaluate_rows(b, x));
    EXPECT_NE(ya, evaluate_rows(c, x));
    EXPECT_TRUE(ya.allFinite());
    EXPECT_GT(ya.maxCoeff(), ya.minCoeff());
    EXPECT_NEAR(a(*a.optimum), 0.0, 1e-12);
    EXPECT_GE(ya.minCoeff(), 0.0);
    for (int i = 0; i < 2; ++i) {
        EXPECT_GE((*a.optimum)[i], -5.0);
        EXPECT_LE((*a.optimum)[i], 5.0);
    }
}

TEST(Problems, FiniteOnTheBox) {
    const Matrix x = test::uniform_matrix(100000, 3, -5, 5, 21);
    for (const auto* name : problem_names) {
        const auto p = make_problem(name, 3, 1);
        EXPECT_TRUE(evaluate_rows(p, x).allFinite()) << name;
    }
}

TEST(Problems, UnknownNameListsTheAvailableOnes) {
    try {
        make_problem("ackley", 2);
        FAIL();
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        for (const auto* name : problem_names) EXPECT_NE(msg.find(name), std::string::npos) << name;
    }
    EXPECT_THROW(make_problem("sphere", 0), InvalidArgument);
}

TEST(Problems, ExpressionProblem) {
    Vector lo(2), hi(2);
    lo << 0, 1;
    hi << 2, 3;
    const auto p = make_expression_problem("sum(x^2)", 2, lo, hi);
    EXPECT_EQ(p.lower, lo);
    EXPECT_EQ(p.upper, hi);
    EXPECT_DOUBLE_EQ(p.evaluate(std::vector<double>{1, 2}), 5.0);
    EXPECT_EQ(make_expression_problem("x1", 3).lower, Vector::Constant(3, -5.0));
    EXPECT_THROW(make_expression_problem("x1 +", 2), ParseError);
}

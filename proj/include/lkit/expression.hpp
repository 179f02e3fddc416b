#pragma once

// Arithmetic expressions over x1..xd (and x, the whole vector), e.g.
// "sum(x^2)" or "x1*x2 - 2^3^1".
//
//   expr    = term { ("+" | "-") term }
//   term    = unary { ("*" | "/") unary }
//   unary   = ("-" | "+") unary | power
//   power   = primary [ "^" unary ]
//   primary = number | "pi" | "e" | "x" | "x" digits | name "(" expr { "," expr } ")" | "(" expr ")"
//
// Operators act elementwise on vectors and broadcast scalars. sum, min and max
// of a single vector reduce it; with several arguments min and max compare
// elementwise.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lkit/error.hpp"

namespace lkit {

class Expression {
public:
    struct Node {
        enum class Kind { number, vector_var, var, negate, binary, call };
        Kind kind = Kind::number;
        double value = 0.0;
        std::size_t index = 0;  // 0-based component for var
        char op = 0;
        std::string fn;
        std::vector<std::shared_ptr<const Node>> args;
        bool vector = false;  // result has one entry per dimension
    };

    Expression() = default;
    Expression(std::shared_ptr<const Node> root, std::size_t dim, std::string text)
        : root_(std::move(root)), dim_(dim), text_(std::move(text)) {}

    std::size_t dim() const { return dim_; }
    const std::string& text() const { return text_; }
    const Node& root() const { return *root_; }

    /// Throws EvaluationError on division by zero, log or sqrt outside the
    /// domain, and any other non-finite intermediate.
    double operator()(std::span<const double> x) const {
        if (x.size() != dim_) throw InvalidArgument("expression expects " + std::to_string(dim_) + " values");
        const auto v = eval(*root_, x);
        return v.front();
    }

    /// Fully parenthesised text that parses back to the same tree.
    std::string to_string() const { return print(*root_); }

private:
    using Value = std::vector<double>;

    static void check(double v, const char* what) {
        if (!std::isfinite(v)) throw EvaluationError(std::string("non-finite result in ") + what);
    }

    Value eval(const Node& n, std::span<const double> x) const {
        switch (n.kind) {
        case Node::Kind::number: return {n.value};
        case Node::Kind::vector_var: return Value(x.begin(), x.end());
        case Node::Kind::var: return {x[n.index]};
        case Node::Kind::negate: {
            auto v = eval(*n.args[0], x);
            for (auto& a : v) a = -a;
            return v;
        }
        case Node::Kind::binary: return binary(n.op, eval(*n.args[0], x), eval(*n.args[1], x));
        case Node::Kind::call: return call(n, x);
        }
        return {};
    }

    static Value broadcast(const Value& v, std::size_t size) { return v.size() == size ? v : Value(size, v.front()); }

    static Value binary(char op, const Value& a0, const Value& b0) {
        const auto size = std::max(a0.size(), b0.size());
        const auto a = broadcast(a0, size);
        const auto b = broadcast(b0, size);
        Value r(size);
        for (std::size_t i = 0; i < size; ++i) {
            switch (op) {
            case '+': r[i] = a[i] + b[i]; break;
            case '-': r[i] = a[i] - b[i]; break;
            case '*': r[i] = a[i] * b[i]; break;
            case '/':
                if (b[i] == 0.0) throw EvaluationError("division by zero");
                r[i] = a[i] / b[i];
                break;
            case '^': r[i] = std::pow(a[i], b[i]); break;
            }
            check(r[i], op == '^' ? "power" : "arithmetic");
        }
        return r;
    }

    Value call(const Node& n, std::span<const double> x) const {
        std::vector<Value> args;
        for (const auto& a : n.args) args.push_back(eval(*a, x));
        const auto& f = n.fn;
        if (f == "sum" || ((f == "min" || f == "max") && args.size() == 1)) {
            const auto& v = args[0];
            double r = v.front();
            for (std::size_t i = 1; i < v.size(); ++i) r = f == "sum" ? r + v[i] : (f == "min" ? std::min(r, v[i]) : std::max(r, v[i]));
            check(r, "sum");
            return {r};
        }
        if (f == "min" || f == "max") {
            Value r = args[0];
            for (std::size_t k = 1; k < args.size(); ++k) {
                const auto size = std::max(r.size(), args[k].size());
                r = broadcast(r, size);
                const auto b = broadcast(args[k], size);
                for (std::size_t i = 0; i < size; ++i) r[i] = f == "min" ? std::min(r[i], b[i]) : std::max(r[i], b[i]);
            }
            return r;
        }
        if (f == "pow") return binary('^', args[0], args[1]);
        Value r = args[0];
        for (auto& v : r) {
            if (f == "sin") v = std::sin(v);
            else if (f == "cos") v = std::cos(v);
            else if (f == "exp") v = std::exp(v);
            else if (f == "abs") v = std::abs(v);
            else if (f == "log") {
                if (!(v > 0.0)) throw EvaluationError("log of a non-positive value");
                v = std::log(v);
            } else if (f == "sqrt") {
                if (v < 0.0) throw EvaluationError("sqrt of a negative value");
                v = std::sqrt(v);
            }
            check(v, f.c_str());
        }
        return r;
    }

    static std::string print(const Node& n) {
        switch (n.kind) {
        case Node::Kind::number: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            return buf;
        }
        case Node::Kind::vector_var: return "x";
        case Node::Kind::var: return "x" + std::to_string(n.index + 1);
        case Node::Kind::negate: return "(-" + print(*n.args[0]) + ")";
        case Node::Kind::binary: return "(" + print(*n.args[0]) + " " + n.op + " " + print(*n.args[1]) + ")";
        case Node::Kind::call: {
            std::string s = n.fn + "(";
            for (std::size_t i = 0; i < n.args.size(); ++i) s += (i ? ", " : "") + print(*n.args[i]);
            return s + ")";
        }
        }
        return "";
    }

    std::shared_ptr<const Node> root_;
    std::size_t dim_ = 0;
    std::string text_;
};

namespace detail {

class ExpressionParser {
public:
    using Node = Expression::Node;
    using Ptr = std::shared_ptr<const Node>;

    ExpressionParser(std::string_view text, std::size_t dim) : s_(text), dim_(dim) {}

    Ptr parse() {
        skip();
        if (pos_ >= s_.size()) fail("empty expression");
        auto e = expr();
        skip();
        if (pos_ < s_.size()) fail(s_[pos_] == ')' ? "unbalanced ')'" : "unexpected '" + std::string(1, s_[pos_]) + "'");
        if (e->vector && dim_ != 1) fail_at(0, "expression yields a vector; reduce it with sum, min or max");
        return e;
    }

private:
    [[noreturn]] void fail_at(std::size_t p, const std::string& msg) const {
        throw ParseError(msg, p + 1);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail_at(pos_, msg); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static Ptr make(Node n) { return std::make_shared<const Node>(std::move(n)); }
    static Ptr binary(char op, Ptr a, Ptr b) {
        Node n;
        n.kind = Node::Kind::binary;
        n.op = op;
        n.vector = a->vector || b->vector;
        n.args = {std::move(a), std::move(b)};
        return make(std::move(n));
    }

    Ptr expr() {
        auto left = term();
        while (true) {
            if (accept('+')) left = binary('+', left, term());
            else if (accept('-')) left = binary('-', left, term());
            else return left;
        }
    }

    Ptr term() {
        auto left = unary();
        while (true) {
            if (accept('*')) left = binary('*', left, unary());
            else if (accept('/')) left = binary('/', left, unary());
            else return left;
        }
    }

    Ptr unary() {
        if (accept('-')) {
            auto inner = unary();
            Node n;
            n.kind = Node::Kind::negate;
            n.vector = inner->vector;
            n.args = {std::move(inner)};
            return make(std::move(n));
        }
        if (accept('+')) return unary();
        return power();
    }

    Ptr power() {
        auto base = primary();
        if (accept('^')) return binary('^', base, unary());
        return base;
    }

    Ptr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        const char c = s_[pos_];
        if (c == '(') {
            const auto open = pos_;
            ++pos_;
            auto e = expr();
            if (!accept(')')) {
                skip();
                if (pos_ >= s_.size()) fail_at(open, "unbalanced '('");
                fail("expected ')'");
            }
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Ptr number() {
        const auto start = pos_;
        const std::string rest(s_.substr(pos_));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ += used;
        if (!std::isfinite(v)) fail_at(start, "number out of range");
        Node n;
        n.value = v;
        return make(std::move(n));
    }

    Ptr identifier() {
        const auto start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string name(s_.substr(start, pos_ - start));
        skip();
        if (pos_ < s_.size() && s_[pos_] == '(') return call(name, start);

        Node n;
        if (name == "pi" || name == "e") {
            n.value = name == "pi" ? 3.14159265358979323846 : 2.71828182845904523536;
            return make(std::move(n));
        }
        if (name == "x") {
            n.kind = Node::Kind::vector_var;
            n.vector = true;
            return make(std::move(n));
        }
        if (name.size() > 1 && name[0] == 'x' &&
            name.find_first_not_of("0123456789", 1) == std::string::npos) {
            const auto k = std::stoul(name.substr(1));
            if (k < 1 || k > dim_) fail_at(start, "variable " + name + " outside x1..x" + std::to_string(dim_));
            n.kind = Node::Kind::var;
            n.index = k - 1;
            return make(std::move(n));
        }
        fail_at(start, "unknown identifier '" + name + "'");
    }

    Ptr call(const std::string& name, std::size_t start) {
        static const std::vector<std::string> unary_fns{"sin", "cos", "exp", "log", "sqrt", "abs", "sum"};
        const bool known_unary = std::find(unary_fns.begin(), unary_fns.end(), name) != unary_fns.end();
        if (!known_unary && name != "min" && name != "max" && name != "pow") fail_at(start, "unknown function '" + name + "'");
        accept('(');
        Node n;
        n.kind = Node::Kind::call;
        n.fn = name;
        if (!accept(')')) {
            do n.args.push_back(expr());
            while (accept(','));
            if (!accept(')')) {
                skip();
                fail(pos_ >= s_.size() ? "unbalanced '('" : "expected ')' or ','");
            }
        }
        const auto k = n.args.size();
        if (known_unary && k != 1) fail_at(start, name + " takes 1 argument, got " + std::to_string(k));
        if (name == "pow" && k != 2) fail_at(start, "pow takes 2 arguments, got " + std::to_string(k));
        if ((name == "min" || name == "max") && k < 1) fail_at(start, name + " takes at least 1 argument");

        bool any_vector = false;
        for (const auto& a : n.args) any_vector = any_vector || a->vector;
        n.vector = (name == "sum" || ((name == "min" || name == "max") && k == 1)) ? false : any_vector;
        return make(std::move(n));
    }

    std::string_view s_;
    std::size_t dim_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Throws ParseError (with a 1-based position) on malformed input.
inline Expression parse_expression(std::string_view text, std::size_t dim) {
    if (dim < 1) throw InvalidArgument("expression dimension must be at least 1");
    detail::ExpressionParser p(text, dim);
    return Expression(p.parse(), dim, std::string(text));
}

} // namespace lkit

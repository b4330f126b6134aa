#pragma once

// Recursive-descent parser and evaluator for scalar field expressions.
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := base ('^' factor)?
//   base   := number | ident | func '(' expr ')' | '(' expr ')' | '-' base
//   func   := exp | ln | sqrt | abs
//   ident  := x1 .. x20 | pi | e
//
// '^' is right-associative. Exponents that constant-fold to an integer with
// magnitude <= 64 are evaluated by repeated multiplication and accept any
// base; other exponents use a^b = exp(b ln a) and require a > 0. Evaluation
// is templated so the same tree runs on plain doubles and on second-order
// jets.

#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "conflab/common.hpp"
#include "conflab/dual2.hpp"

namespace conflab::expr {

enum class NodeKind { Number, Variable, Neg, Func, Pow, Add, Sub, Mul, Div };
enum class FuncKind { Exp, Ln, Sqrt, Abs };

struct Node {
    NodeKind kind = NodeKind::Number;
    double number = 0.0;
    int var = -1;  // zero-based variable index
    FuncKind func = FuncKind::Exp;
    int a = -1;
    int b = -1;
    bool has_int_exponent = false;
    long int_exponent = 0;
};

struct Ast {
    std::vector<Node> nodes;
    int root = -1;
    int max_var = 0;  // highest 1-based variable index used
    std::string source;
};

namespace detail {

class Parser {
public:
    explicit Parser(const std::string& src) : s_(src) {}

    Ast run() {
        Ast ast;
        ast.source = s_;
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("empty expression", pos_);
        ast.root = parse_expr();
        skip_ws();
        if (pos_ < s_.size()) throw ParseError("unexpected trailing input", pos_);
        ast.nodes = std::move(arena_);
        ast.max_var = max_var_;
        return ast;
    }

private:
    int add(Node n) {
        arena_.push_back(n);
        return static_cast<int>(arena_.size()) - 1;
    }

    void skip_ws() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n')) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int parse_expr() {
        int lhs = parse_term();
        while (true) {
            if (eat('+')) {
                int rhs = parse_term();
                Node n;
                n.kind = NodeKind::Add;
                n.a = lhs;
                n.b = rhs;
                lhs = add(n);
            } else if (eat('-')) {
                int rhs = parse_term();
                Node n;
                n.kind = NodeKind::Sub;
                n.a = lhs;
                n.b = rhs;
                lhs = add(n);
            } else {
                return lhs;
            }
        }
    }

    int parse_term() {
        int lhs = parse_factor();
        while (true) {
            if (eat('*')) {
                int rhs = parse_factor();
                Node n;
                n.kind = NodeKind::Mul;
                n.a = lhs;
                n.b = rhs;
                lhs = add(n);
            } else if (eat('/')) {
                int rhs = parse_factor();
                Node n;
                n.kind = NodeKind::Div;
                n.a = lhs;
                n.b = rhs;
                lhs = add(n);
            } else {
                return lhs;
            }
        }
    }

    int parse_factor() {
        int base = parse_base();
        if (eat('^')) {
            int exp = parse_factor();  // right-associative
            Node n;
            n.kind = NodeKind::Pow;
            n.a = base;
            n.b = exp;
            if (auto c = const_value(exp)) {
                const double r = std::round(*c);
                if (std::abs(*c - r) <= 1e-12 && std::abs(r) <= 64.0) {
                    n.has_int_exponent = true;
                    n.int_exponent = static_cast<long>(r);
                }
            }
            return add(n);
        }
        return base;
    }

    int parse_base() {
        skip_ws();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = s_[pos_];
        if (c == '-') {
            ++pos_;
            int inner = parse_base();
            Node n;
            n.kind = NodeKind::Neg;
            n.a = inner;
            return add(n);
        }
        if (c == '(') {
            ++pos_;
            int inner = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if ((c >= '0' && c <= '9') || c == '.') return parse_number();
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return parse_ident();
        throw ParseError("unexpected character", pos_);
    }

    int parse_number() {
        double value = 0.0;
        const char* begin = s_.data() + pos_;
        const char* end = s_.data() + s_.size();
        auto [next, ec] = std::from_chars(begin, end, value, std::chars_format::general);
        if (ec != std::errc()) throw ParseError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(next - begin);
        Node n;
        n.kind = NodeKind::Number;
        n.number = value;
        return add(n);
    }

    int parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() &&
               ((s_[pos_] >= 'a' && s_[pos_] <= 'z') || (s_[pos_] >= 'A' && s_[pos_] <= 'Z') ||
                (s_[pos_] >= '0' && s_[pos_] <= '9')))
            ++pos_;
        const std::string word = s_.substr(start, pos_ - start);
        if (word == "pi") {
            Node n;
            n.kind = NodeKind::Number;
            n.number = 3.14159265358979323846;
            return add(n);
        }
        if (word == "e") {
            Node n;
            n.kind = NodeKind::Number;
            n.number = std::exp(1.0);
            return add(n);
        }
        if (eat('(')) {
            FuncKind f;
            if (word == "exp")
                f = FuncKind::Exp;
            else if (word == "ln")
                f = FuncKind::Ln;
            else if (word == "sqrt")
                f = FuncKind::Sqrt;
            else if (word == "abs")
                f = FuncKind::Abs;
            else
                throw ParseError("unknown function '" + word + "'", start);
            int inner = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            Node n;
            n.kind = NodeKind::Func;
            n.func = f;
            n.a = inner;
            return add(n);
        }
        if (word.size() >= 2 && word[0] == 'x') {
            int idx = 0;
            auto [p, ec] = std::from_chars(word.data() + 1, word.data() + word.size(), idx);
            if (ec == std::errc() && p == word.data() + word.size() && idx >= 1 && idx <= 20) {
                Node n;
                n.kind = NodeKind::Variable;
                n.var = idx - 1;
                if (idx > max_var_) max_var_ = idx;
                return add(n);
            }
        }
        throw ParseError("unknown identifier '" + word + "'", start);
    }

    // Value of a variable-free subtree, if it can be evaluated safely.
    std::optional<double> const_value(int idx) const {
        const Node& n = arena_[static_cast<std::size_t>(idx)];
        switch (n.kind) {
            case NodeKind::Number:
                return n.number;
            case NodeKind::Variable:
                return std::nullopt;
            case NodeKind::Neg: {
                auto a = const_value(n.a);
                return a ? std::optional<double>(-*a) : std::nullopt;
            }
            case NodeKind::Func: {
                auto a = const_value(n.a);
                if (!a) return std::nullopt;
                switch (n.func) {
                    case FuncKind::Exp:
                        return std::exp(*a);
                    case FuncKind::Ln:
                        return *a > 0 ? std::optional<double>(std::log(*a)) : std::nullopt;
                    case FuncKind::Sqrt:
                        return *a > 0 ? std::optional<double>(std::sqrt(*a)) : std::nullopt;
                    case FuncKind::Abs:
                        return std::abs(*a);
                }
                return std::nullopt;
            }
            case NodeKind::Pow: {
                auto a = const_value(n.a), b = const_value(n.b);
                if (!a || !b || *a <= 0) return std::nullopt;
                return std::exp(*b * std::log(*a));
            }
            default: {
                auto a = const_value(n.a), b = const_value(n.b);
                if (!a || !b) return std::nullopt;
                switch (n.kind) {
                    case NodeKind::Add:
                        return *a + *b;
                    case NodeKind::Sub:
                        return *a - *b;
                    case NodeKind::Mul:
                        return *a * *b;
                    case NodeKind::Div:
                        return *b != 0 ? std::optional<double>(*a / *b) : std::nullopt;
                    default:
                        return std::nullopt;
                }
            }
        }
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    std::vector<Node> arena_;
    int max_var_ = 0;
};

template <class T>
T make_value(double c, int n) {
    if constexpr (std::is_same_v<T, double>) {
        (void)n;
        return c;
    } else {
        return Jet2::constant(n, c);
    }
}

template <class T>
T int_power(const T& base, long m) {
    if constexpr (std::is_same_v<T, double>) {
        if (m < 0) {
            if (base == 0.0) throw DomainError("expression: zero raised to a negative power");
            return 1.0 / int_power(base, -m);
        }
        double acc = 1.0, b = base;
        unsigned long e = static_cast<unsigned long>(m);
        while (e > 0) {
            if (e & 1UL) acc *= b;
            e >>= 1UL;
            if (e > 0) b *= b;
        }
        return acc;
    } else {
        return jpow_int(base, m);
    }
}

}  // namespace detail

inline Ast parse(const std::string& source) { return detail::Parser(source).run(); }

/// Evaluates the tree over T = double or T = Jet2. `vars` holds one entry per
/// variable slot (size >= the dimension the expression was validated for).
template <class T>
T evaluate(const Ast& ast, int node, const std::vector<T>& vars, int n) {
    const Node& nd = ast.nodes[static_cast<std::size_t>(node)];
    switch (nd.kind) {
        case NodeKind::Number:
            return detail::make_value<T>(nd.number, n);
        case NodeKind::Variable:
            return vars[static_cast<std::size_t>(nd.var)];
        case NodeKind::Neg:
            return -evaluate(ast, nd.a, vars, n);
        case NodeKind::Add:
            return evaluate(ast, nd.a, vars, n) + evaluate(ast, nd.b, vars, n);
        case NodeKind::Sub:
            return evaluate(ast, nd.a, vars, n) - evaluate(ast, nd.b, vars, n);
        case NodeKind::Mul:
            return evaluate(ast, nd.a, vars, n) * evaluate(ast, nd.b, vars, n);
        case NodeKind::Div: {
            T a = evaluate(ast, nd.a, vars, n);
            T b = evaluate(ast, nd.b, vars, n);
            if constexpr (std::is_same_v<T, double>) {
                if (b == 0.0) throw DomainError("expression: division by zero");
                return a / b;
            } else {
                return a / b;
            }
        }
        case NodeKind::Func: {
            T a = evaluate(ast, nd.a, vars, n);
            if constexpr (std::is_same_v<T, double>) {
                switch (nd.func) {
                    case FuncKind::Exp:
                        return std::exp(a);
                    case FuncKind::Ln:
                        if (a <= 0.0) throw DomainError("ln requires a positive argument");
                        return std::log(a);
                    case FuncKind::Sqrt:
                        if (a <= 0.0) throw DomainError("sqrt requires a positive argument");
                        return std::sqrt(a);
                    case FuncKind::Abs:
                        return std::abs(a);
                }
            } else {
                switch (nd.func) {
                    case FuncKind::Exp:
                        return jexp(a);
                    case FuncKind::Ln:
                        return jln(a);
                    case FuncKind::Sqrt:
                        return jsqrt(a);
                    case FuncKind::Abs:
                        return jabs(a);
                }
            }
            throw DomainError("expression: unreachable function kind");
        }
        case NodeKind::Pow: {
            T a = evaluate(ast, nd.a, vars, n);
            if (nd.has_int_exponent) return detail::int_power(a, nd.int_exponent);
            T b = evaluate(ast, nd.b, vars, n);
            if constexpr (std::is_same_v<T, double>) {
                if (a <= 0.0) throw DomainError("power requires a positive base");
                return std::exp(b * std::log(a));
            } else {
                return jpow(a, b);
            }
        }
    }
    throw DomainError("expression: unreachable node kind");
}

}  // namespace conflab::expr

#include "biharm/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "biharm/errors.hpp"

namespace biharm {

struct Expression::Node {
    enum class Op { num, var, add, sub, mul, div, pow, neg, exp, log, abs, sqrt, expm1, expm1_minus_arg };
    Op op = Op::num;
    double value = 0;
    std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;
using Op = Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    n->value = value;
    return n;
}

bool same_tree(const NodePtr& x, const NodePtr& y) {
    if (!x || !y) return x == y;
    if (x->op != y->op) return false;
    if (x->op == Op::num) return x->value == y->value;
    return same_tree(x->a, y->a) && same_tree(x->b, y->b);
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::num && n->value == v; }

// exp(E)-1 -> expm1(E);  expm1(E)-E -> expm1_minus_arg(E)
NodePtr fold_sub(NodePtr lhs, NodePtr rhs) {
    if (lhs->op == Op::exp && is_const(rhs, 1.0)) return make(Op::expm1, lhs->a);
    if (lhs->op == Op::expm1 && same_tree(lhs->a, rhs)) return make(Op::expm1_minus_arg, lhs->a);
    return make(Op::sub, std::move(lhs), std::move(rhs));
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse() {
        skip();
        if (pos_ >= s_.size()) throw parse_error("empty expression, expected number, 't', '(' or function", pos_);
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) throw parse_error("unexpected '" + std::string(1, s_[pos_]) + "', expected operator or end", pos_);
        return e;
    }

private:
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

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::add, lhs, term());
            else if (accept('-')) lhs = fold_sub(lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = factor();
        for (;;) {
            if (accept('*')) lhs = make(Op::mul, lhs, factor());
            else if (accept('/')) lhs = make(Op::div, lhs, factor());
            else return lhs;
        }
    }

    NodePtr factor() {
        if (accept('-')) return make(Op::neg, factor());
        NodePtr b = base();
        if (accept('^')) return make(Op::pow, b, factor());
        return b;
    }

    NodePtr base() {
        skip();
        if (pos_ >= s_.size()) throw parse_error("unexpected end, expected number, 't', '(' or function", pos_);
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!accept(')')) throw parse_error("expected ')'", pos_);
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            const std::string_view id = s_.substr(start, pos_ - start);
            if (id == "t") return make(Op::var);
            Op op;
            if (id == "exp") op = Op::exp;
            else if (id == "log") op = Op::log;
            else if (id == "abs") op = Op::abs;
            else if (id == "sqrt") op = Op::sqrt;
            else throw parse_error("unknown identifier '" + std::string(id) + "'", start);
            if (!accept('(')) throw parse_error("function '" + std::string(id) + "' expects '('", pos_);
            NodePtr arg = expr();
            skip();
            if (pos_ < s_.size() && s_[pos_] == ',') throw parse_error("function '" + std::string(id) + "' takes one argument", pos_);
            if (!accept(')')) throw parse_error("expected ')'", pos_);
            return make(op, arg);
        }
        throw parse_error("unexpected '" + std::string(1, c) + "', expected number, 't', '(' or function", pos_);
    }

    NodePtr number() {
        const char* begin = s_.data() + pos_;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw parse_error("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        return make(Op::num, nullptr, nullptr, v);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

// e^x - 1 - x, accurate for small |x|
double expm1_minus_arg(double x) {
    if (std::abs(x) < 1e-2) {
        // x^2/2 + x^3/6 + x^4/24 + x^5/120 + x^6/720
        return x * x * (0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x * (1.0 / 120 + x / 720))));
    }
    return std::expm1(x) - x;
}

double eval(const Node& n, double t) {
    switch (n.op) {
        case Op::num: return n.value;
        case Op::var: return t;
        case Op::add: return eval(*n.a, t) + eval(*n.b, t);
        case Op::sub: return eval(*n.a, t) - eval(*n.b, t);
        case Op::mul: return eval(*n.a, t) * eval(*n.b, t);
        case Op::div: return eval(*n.a, t) / eval(*n.b, t);
        case Op::pow: {
            const double x = eval(*n.a, t);
            const double y = eval(*n.b, t);
            if (y == 2.0) return x * x;
            return std::pow(x, y);
        }
        case Op::neg: return -eval(*n.a, t);
        case Op::exp: return std::exp(eval(*n.a, t));
        case Op::log: return std::log(eval(*n.a, t));
        case Op::abs: return std::abs(eval(*n.a, t));
        case Op::sqrt: return std::sqrt(eval(*n.a, t));
        case Op::expm1: return std::expm1(eval(*n.a, t));
        case Op::expm1_minus_arg: return expm1_minus_arg(eval(*n.a, t));
    }
    return 0;
}

}  // namespace

Expression Expression::parse(const std::string& src) {
    Expression e;
    e.src_ = src;
    e.root_ = Parser(src).parse();
    return e;
}

double Expression::operator()(double t) const { return eval(*root_, t); }

std::function<double(double)> Expression::as_function() const {
    auto root = root_;
    return [root](double t) { return eval(*root, t); };
}

}  // namespace biharm

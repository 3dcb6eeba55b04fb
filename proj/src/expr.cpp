#include "volterra/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace volterra {

struct Expression::Node {
    enum class Kind { constant, variable, unary, binary, call };
    Kind kind = Kind::constant;
    double value = 0.0;
    char op = 0;                     // + - * / ^ for binary, - for unary
    double (*fn)(double) = nullptr;  // call
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double t) const {
        switch (kind) {
            case Kind::constant: return value;
            case Kind::variable: return t;
            case Kind::unary: return -lhs->eval(t);
            case Kind::call: return fn(lhs->eval(t));
            case Kind::binary: {
                const double a = lhs->eval(t);
                const double b = rhs->eval(t);
                switch (op) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    case '/': return a / b;
                    case '^': return std::pow(a, b);
                }
            }
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::constant;
    n->value = v;
    return n;
}

NodePtr make_binary(char op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::binary;
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
}

struct Parser {
    std::string_view text;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ExprError("expression error at position " + std::to_string(pos) + ": " + what);
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    NodePtr parse_expression() {
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (eat('+')) {
                lhs = make_binary('+', lhs, parse_term());
            } else if (eat('-')) {
                lhs = make_binary('-', lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            skip_ws();
            if (eat('*')) {
                lhs = make_binary('*', lhs, parse_factor());
            } else if (eat('/')) {
                lhs = make_binary('/', lhs, parse_factor());
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_factor() {
        skip_ws();
        if (eat('-')) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::unary;
            n->lhs = parse_factor();
            return n;
        }
        if (eat('+')) return parse_factor();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        skip_ws();
        if (eat('^')) return make_binary('^', base, parse_factor());  // right associative
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        const char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        if (eat('(')) {
            NodePtr inner = parse_expression();
            if (!eat(')')) fail("missing ')'");
            return inner;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        const char* begin = text.data() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos += static_cast<std::size_t>(end - begin);
        return make_const(v);
    }

    NodePtr parse_ident() {
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
            ++pos;
        }
        const std::string name(text.substr(start, pos - start));
        skip_ws();
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            NodePtr arg = parse_expression();
            if (!eat(')')) fail("missing ')' after function argument");
            static const std::vector<std::pair<std::string, double (*)(double)>> table = {
                {"sin", [](double v) { return std::sin(v); }},
                {"cos", [](double v) { return std::cos(v); }},
                {"tan", [](double v) { return std::tan(v); }},
                {"exp", [](double v) { return std::exp(v); }},
                {"log", [](double v) { return std::log(v); }},
                {"sqrt", [](double v) { return std::sqrt(v); }},
                {"abs", [](double v) { return std::abs(v); }},
                {"sinh", [](double v) { return std::sinh(v); }},
                {"cosh", [](double v) { return std::cosh(v); }},
                {"tanh", [](double v) { return std::tanh(v); }},
            };
            for (const auto& [fname, fn] : table) {
                if (fname == name) {
                    auto n = std::make_shared<Node>();
                    n->kind = Node::Kind::call;
                    n->fn = fn;
                    n->lhs = std::move(arg);
                    return n;
                }
            }
            fail("unknown function '" + name + "'");
        }
        if (name == "t" || name == "s" || name == "u") {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::variable;
            return n;
        }
        if (name == "pi") return make_const(3.14159265358979323846);
        if (name == "e") return make_const(2.71828182845904523536);
        fail("unknown identifier '" + name + "'");
    }
};

}  // namespace

Expression Expression::parse(std::string_view text) {
    Parser p{text};
    Expression e;
    e.root_ = p.parse_expression();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing characters");
    e.text_ = std::string(text);
    return e;
}

double Expression::operator()(double t) const {
    if (!root_) throw ExprError("evaluating an empty expression");
    return root_->eval(t);
}

}  // namespace volterra

#include "weakflow/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace weakflow {

struct Expression::Node {
    enum class Op { constant, x, y, add, sub, mul, div, neg, sin, cos, exp, abs, sign, pw };
    Op op;
    double value = 0.0;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;
using Ptr = std::shared_ptr<const Node>;

Ptr make(Op op, std::vector<Ptr> args = {}, double value = 0.0)
{
    return std::make_shared<const Node>(Node{op, value, std::move(args)});
}

Ptr constant(double v)
{
    return make(Op::constant, {}, v);
}

bool is_value(const Ptr& n, double v)
{
    return n->op == Op::constant && n->value == v;
}

// Light simplification keeps derived expressions readable and cheap.
Ptr add(Ptr a, Ptr b)
{
    if (is_value(a, 0.0)) {
        return b;
    }
    if (is_value(b, 0.0)) {
        return a;
    }
    return make(Op::add, {std::move(a), std::move(b)});
}

Ptr sub(Ptr a, Ptr b)
{
    if (is_value(b, 0.0)) {
        return a;
    }
    if (is_value(a, 0.0)) {
        return make(Op::neg, {std::move(b)});
    }
    return make(Op::sub, {std::move(a), std::move(b)});
}

Ptr mul(Ptr a, Ptr b)
{
    if (is_value(a, 0.0) || is_value(b, 0.0)) {
        return constant(0.0);
    }
    if (is_value(a, 1.0)) {
        return b;
    }
    if (is_value(b, 1.0)) {
        return a;
    }
    return make(Op::mul, {std::move(a), std::move(b)});
}

Ptr div(Ptr a, Ptr b)
{
    if (is_value(a, 0.0)) {
        return constant(0.0);
    }
    return make(Op::div, {std::move(a), std::move(b)});
}

double eval(const Node& n, double x, double y)
{
    switch (n.op) {
    case Op::constant: return n.value;
    case Op::x: return x;
    case Op::y: return y;
    case Op::add: return eval(*n.args[0], x, y) + eval(*n.args[1], x, y);
    case Op::sub: return eval(*n.args[0], x, y) - eval(*n.args[1], x, y);
    case Op::mul: return eval(*n.args[0], x, y) * eval(*n.args[1], x, y);
    case Op::div: return eval(*n.args[0], x, y) / eval(*n.args[1], x, y);
    case Op::neg: return -eval(*n.args[0], x, y);
    case Op::sin: return std::sin(eval(*n.args[0], x, y));
    case Op::cos: return std::cos(eval(*n.args[0], x, y));
    case Op::exp: return std::exp(eval(*n.args[0], x, y));
    case Op::abs: return std::abs(eval(*n.args[0], x, y));
    case Op::sign: {
        const double v = eval(*n.args[0], x, y);
        return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
    }
    case Op::pw: return eval(*n.args[0], x, y) < 0.0 ? eval(*n.args[1], x, y) : eval(*n.args[2], x, y);
    }
    return 0.0;
}

Ptr diff(const Ptr& n, Op var)
{
    const auto& a = n->args;
    switch (n->op) {
    case Op::constant: return constant(0.0);
    case Op::x:
    case Op::y: return constant(n->op == var ? 1.0 : 0.0);
    case Op::add: return add(diff(a[0], var), diff(a[1], var));
    case Op::sub: return sub(diff(a[0], var), diff(a[1], var));
    case Op::mul: return add(mul(diff(a[0], var), a[1]), mul(a[0], diff(a[1], var)));
    case Op::div:
        return div(sub(mul(diff(a[0], var), a[1]), mul(a[0], diff(a[1], var))), mul(a[1], a[1]));
    case Op::neg: {
        Ptr d = diff(a[0], var);
        return is_value(d, 0.0) ? d : make(Op::neg, {d});
    }
    case Op::sin: return mul(make(Op::cos, {a[0]}), diff(a[0], var));
    case Op::cos: return mul(make(Op::neg, {make(Op::sin, {a[0]})}), diff(a[0], var));
    case Op::exp: return mul(n, diff(a[0], var));
    case Op::abs: return mul(make(Op::sign, {a[0]}), diff(a[0], var));
    case Op::sign: return constant(0.0);
    case Op::pw: {
        Ptr lo = diff(a[1], var);
        Ptr hi = diff(a[2], var);
        if (is_value(lo, 0.0) && is_value(hi, 0.0)) {
            return constant(0.0);
        }
        return make(Op::pw, {a[0], lo, hi});
    }
    }
    return constant(0.0);
}

bool depends_on_position(const Node& n)
{
    if (n.op == Op::x || n.op == Op::y) {
        return true;
    }
    for (const auto& c : n.args) {
        if (depends_on_position(*c)) {
            return true;
        }
    }
    return false;
}

std::string render(const Node& n)
{
    std::ostringstream s;
    s.precision(17);
    const auto& a = n.args;
    const auto call = [&](const char* name) {
        s << name << '(';
        for (std::size_t i = 0; i < a.size(); ++i) {
            s << (i ? ", " : "") << render(*a[i]);
        }
        s << ')';
    };
    switch (n.op) {
    case Op::constant: s << n.value; break;
    case Op::x: s << 'x'; break;
    case Op::y: s << 'y'; break;
    case Op::add: s << '(' << render(*a[0]) << " + " << render(*a[1]) << ')'; break;
    case Op::sub: s << '(' << render(*a[0]) << " - " << render(*a[1]) << ')'; break;
    case Op::mul: s << '(' << render(*a[0]) << " * " << render(*a[1]) << ')'; break;
    case Op::div: s << '(' << render(*a[0]) << " / " << render(*a[1]) << ')'; break;
    case Op::neg: s << "(-" << render(*a[0]) << ')'; break;
    case Op::sin: call("sin"); break;
    case Op::cos: call("cos"); break;
    case Op::exp: call("exp"); break;
    case Op::abs: call("abs"); break;
    case Op::sign: call("sign"); break;
    case Op::pw: call("pw"); break;
    }
    return s.str();
}

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    Ptr parse()
    {
        Ptr e = expression();
        skip();
        if (pos_ != text_.size()) {
            fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw std::invalid_argument("expression '" + text_ + "' at position " + std::to_string(pos_ + 1) + ": " +
                                    what);
    }

    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            fail(std::string("expected '") + c + "'");
        }
    }

    Ptr expression()
    {
        Ptr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = make(Op::add, {lhs, term()});
            } else if (accept('-')) {
                lhs = make(Op::sub, {lhs, term()});
            } else {
                return lhs;
            }
        }
    }

    Ptr term()
    {
        Ptr lhs = unary();
        for (;;) {
            if (accept('*')) {
                lhs = make(Op::mul, {lhs, unary()});
            } else if (accept('/')) {
                lhs = make(Op::div, {lhs, unary()});
            } else {
                return lhs;
            }
        }
    }

    Ptr unary()
    {
        if (accept('-')) {
            return make(Op::neg, {unary()});
        }
        if (accept('+')) {
            return unary();
        }
        return primary();
    }

    Ptr primary()
    {
        skip();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Ptr e = expression();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                fail("malformed number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            return constant(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "x") {
                return make(Op::x);
            }
            if (name == "y") {
                return make(Op::y);
            }
            if (name == "pi") {
                return constant(std::numbers::pi);
            }
            Op op;
            std::size_t arity = 1;
            if (name == "sin") {
                op = Op::sin;
            } else if (name == "cos") {
                op = Op::cos;
            } else if (name == "exp") {
                op = Op::exp;
            } else if (name == "abs") {
                op = Op::abs;
            } else if (name == "pw") {
                op = Op::pw;
                arity = 3;
            } else {
                pos_ = start;
                fail("unknown name '" + name + "'");
            }
            expect('(');
            std::vector<Ptr> args{expression()};
            while (args.size() < arity) {
                expect(',');
                args.push_back(expression());
            }
            expect(')');
            return make(op, std::move(args));
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& text_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression() : root_(constant(0.0)), text_("0") {}

Expression::Expression(std::shared_ptr<const Node> root, std::string text)
    : root_(std::move(root)), text_(std::move(text))
{
}

Expression Expression::parse(const std::string& text)
{
    Parser p(text);
    return Expression(p.parse(), text);
}

double Expression::operator()(double x, double y) const
{
    return eval(*root_, x, y);
}

Expression Expression::derivative(int axis) const
{
    if (axis != 0 && axis != 1) {
        throw std::invalid_argument("expression derivative axis must be 0 or 1");
    }
    Ptr d = diff(root_, axis == 0 ? Op::x : Op::y);
    std::string text = render(*d);
    return Expression(std::move(d), std::move(text));
}

bool Expression::is_constant() const
{
    return !depends_on_position(*root_);
}

}  // namespace weakflow

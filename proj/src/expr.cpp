#include "dynab/expr.hpp"

#include <cctype>
#include <cmath>

#include "dynab/errors.hpp"

namespace dynab {

struct Expr::Node {
    enum Kind { Const, Var, Add, Sub, Mul, Div, Neg, Sin, Cos, ExpFn } kind;
    double value = 0.0;
    int var = -1;
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Parser {
    const std::string& s;
    const std::vector<std::string>& vars;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression error at position " + std::to_string(pos) +
                          " in \"" + s + "\": " + msg);
    }

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }

    NodePtr make(Expr::Node n) { return std::make_shared<Expr::Node>(std::move(n)); }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (eat('+')) lhs = make({Expr::Node::Add, 0, -1, lhs, term()});
            else if (eat('-')) lhs = make({Expr::Node::Sub, 0, -1, lhs, term()});
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (eat('*')) lhs = make({Expr::Node::Mul, 0, -1, lhs, unary()});
            else if (eat('/')) lhs = make({Expr::Node::Div, 0, -1, lhs, unary()});
            else return lhs;
        }
    }

    NodePtr unary() {
        if (eat('-')) return make({Expr::Node::Neg, 0, -1, unary(), nullptr});
        if (eat('+')) return unary();
        return atom();
    }

    NodePtr atom() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of input");
        char c = s[pos];
        if (c == '(') {
            ++pos;
            NodePtr e = expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t end = 0;
            double v = std::stod(s.substr(pos), &end);
            pos += end;
            return make({Expr::Node::Const, v, -1, nullptr, nullptr});
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            std::string name = s.substr(start, pos - start);
            if (name == "sin" || name == "cos" || name == "exp") {
                if (!eat('(')) fail("expected '(' after " + name);
                NodePtr arg = expr();
                if (!eat(')')) fail("expected ')'");
                Expr::Node::Kind k = name == "sin" ? Expr::Node::Sin
                                   : name == "cos" ? Expr::Node::Cos
                                                   : Expr::Node::ExpFn;
                return make({k, 0, -1, arg, nullptr});
            }
            if (name == "pi")
                return make({Expr::Node::Const, 3.14159265358979323846, -1, nullptr, nullptr});
            for (size_t i = 0; i < vars.size(); ++i)
                if (vars[i] == name)
                    return make({Expr::Node::Var, 0, static_cast<int>(i), nullptr, nullptr});
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

double eval_node(const Expr::Node* n, const Eigen::VectorXd& v) {
    switch (n->kind) {
        case Expr::Node::Const: return n->value;
        case Expr::Node::Var:   return v[n->var];
        case Expr::Node::Add:   return eval_node(n->a.get(), v) + eval_node(n->b.get(), v);
        case Expr::Node::Sub:   return eval_node(n->a.get(), v) - eval_node(n->b.get(), v);
        case Expr::Node::Mul:   return eval_node(n->a.get(), v) * eval_node(n->b.get(), v);
        case Expr::Node::Div:   return eval_node(n->a.get(), v) / eval_node(n->b.get(), v);
        case Expr::Node::Neg:   return -eval_node(n->a.get(), v);
        case Expr::Node::Sin:   return std::sin(eval_node(n->a.get(), v));
        case Expr::Node::Cos:   return std::cos(eval_node(n->a.get(), v));
        case Expr::Node::ExpFn: return std::exp(eval_node(n->a.get(), v));
    }
    return 0.0;
}

}  // namespace

Expr Expr::parse(const std::string& text, const std::vector<std::string>& vars) {
    Parser p{text, vars};
    Expr e;
    e.root_ = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    e.text_ = text;
    return e;
}

double Expr::eval(const Eigen::VectorXd& values) const {
    return eval_node(root_.get(), values);
}

double Expr::eval1(double v) const {
    Eigen::VectorXd x(1);
    x[0] = v;
    return eval(x);
}

double Expr::eval2(double a, double b) const {
    Eigen::VectorXd x(2);
    x[0] = a;
    x[1] = b;
    return eval(x);
}

std::vector<std::string> state_var_names(int dim) {
    std::vector<std::string> names;
    for (int i = 0; i < dim; ++i) names.push_back("x" + std::to_string(i));
    const char* alias[] = {"x", "y", "z"};
    for (int i = 0; i < dim && i < 3; ++i) names.push_back(alias[i]);
    return names;
}

Eigen::VectorXd eval_field(const std::vector<Expr>& comps, const Eigen::VectorXd& x) {
    // Alias slots x,y,z follow the x0..x{d-1} slots.
    int dim = static_cast<int>(comps.size());
    Eigen::VectorXd vals(dim + std::min(dim, 3));
    vals.head(dim) = x;
    for (int i = 0; i < dim && i < 3; ++i) vals[dim + i] = x[i];
    Eigen::VectorXd out(dim);
    for (int i = 0; i < dim; ++i) out[i] = comps[i].eval(vals);
    return out;
}

}  // namespace dynab

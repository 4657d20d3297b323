#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dynab {

// Arithmetic expressions over named scalar variables.
// Grammar: + - * / unary minus, parentheses, sin cos exp, numeric
// literals, the constant pi.  Variable names are fixed at parse time.
class Expr {
public:
    Expr() = default;

    // Throws ConfigError with a position-anchored message on bad input.
    static Expr parse(const std::string& text, const std::vector<std::string>& vars);

    double eval(const Eigen::VectorXd& values) const;
    double eval1(double v) const;           // single-variable convenience
    double eval2(double a, double b) const;

    bool empty() const { return !root_; }
    const std::string& text() const { return text_; }

    struct Node;  // exposed for the parser/evaluator in expr.cpp

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

// State-variable name list for a d-dimensional system: x0..x{d-1},
// with aliases x, y, z for the first three coordinates.
std::vector<std::string> state_var_names(int dim);

// Evaluate a vector of expressions as a vector field right-hand side.
Eigen::VectorXd eval_field(const std::vector<Expr>& comps, const Eigen::VectorXd& x);

}  // namespace dynab

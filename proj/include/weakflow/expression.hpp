#pragma once

#include <memory>
#include <string>

namespace weakflow {

/// Arithmetic expression in x and y used for initial data and bottom
/// elevations. Grammar: numbers, pi, x, y, + - * /, unary minus,
/// parentheses, sin, cos, exp, abs and pw(t, a, b), which is a when t < 0
/// and b otherwise.
class Expression {
public:
    /// The constant 0.
    Expression();

    /// Throws std::invalid_argument naming the offending position.
    static Expression parse(const std::string& text);

    double operator()(double x, double y = 0.0) const;

    /// Symbolic partial derivative (axis 0 = x, 1 = y). pw differentiates
    /// branchwise, abs as sign, so both are exact away from their kinks.
    Expression derivative(int axis) const;

    /// True when the value does not depend on x or y.
    bool is_constant() const;

    /// Source text, or a generated form for derived expressions.
    const std::string& text() const noexcept { return text_; }

    struct Node;

private:
    Expression(std::shared_ptr<const Node> root, std::string text);

    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace weakflow

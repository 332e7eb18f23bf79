#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "mbvp/geometry.hpp"

namespace mbvp {

/// Arithmetic expression in t, x1..xn, y1..ym, normx, normy.
///
///   expr   := term (('+' | '-') term)*
///   term   := factor (('*' | '/') factor)*
///   factor := unary ('^' unary)*           right-associative
///   unary  := '-' unary | atom
///   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
///
/// Functions: sin, cos, exp, sqrt, abs. There is no built-in pi.
class Expression {
public:
    struct Node;

    /// Throws ParseError carrying the byte offset and the expected-token set.
    static Expression parse(std::string_view text);

    /// Throws EvalError on division by zero, sqrt of a negative number, a
    /// variable index beyond the supplied dimensions, or any non-finite value.
    double evaluate(double t, const Vec& x, const Vec& y) const;

    /// Fully parenthesized text that parses back to an equivalent expression.
    std::string render() const;

    /// Largest index used among x1..xn (y1..ym); 0 when none.
    int max_x_index() const;
    int max_y_index() const;

private:
    explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    std::shared_ptr<const Node> root_;
};

}  // namespace mbvp

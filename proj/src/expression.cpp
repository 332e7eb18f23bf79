#include "mbvp/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "mbvp/errors.hpp"

namespace mbvp {

enum class Func { Sin, Cos, Exp, Sqrt, Abs };

struct Expression::Node {
    enum class Kind { Number, Time, X, Y, NormX, NormY, Neg, Call, Binary };

    Kind kind = Kind::Number;
    double value = 0.0;
    int index = 0;
    Func func = Func::Sin;
    char op = '+';
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

struct FuncEntry {
    std::string_view name;
    Func func;
};

constexpr std::array<FuncEntry, 5> kFunctions{{
    {"sin", Func::Sin}, {"cos", Func::Cos}, {"exp", Func::Exp}, {"sqrt", Func::Sqrt}, {"abs", Func::Abs},
}};

std::string_view func_name(Func f) {
    for (const auto& e : kFunctions) {
        if (e.func == f) return e.name;
    }
    return "?";
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

Node node_of(Node::Kind kind) {
    Node n;
    n.kind = kind;
    return n;
}

NodePtr make(Node node) {
    return std::make_shared<const Node>(std::move(node));
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse() {
        if (text_.find_first_not_of(" \t\r\n") == std::string_view::npos) {
            fail("empty expression", {"number", "identifier", "(", "-"});
        }
        NodePtr root = expr();
        skip_ws();
        if (pos_ < text_.size()) {
            fail(std::string("unexpected character '") + text_[pos_] + "'",
                 {"+", "-", "*", "/", "^", "end of input"});
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what, std::set<std::string> expected) const {
        throw ParseError("parse error at offset " + std::to_string(pos_) + ": " + what, pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr binary(char op, NodePtr lhs, NodePtr rhs) {
        Node n = node_of(Node::Kind::Binary);
        n.op = op;
        n.lhs = std::move(lhs);
        n.rhs = std::move(rhs);
        return make(std::move(n));
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) {
                lhs = binary('+', lhs, term());
            } else if (accept('-')) {
                lhs = binary('-', lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = factor();
        for (;;) {
            if (accept('*')) {
                lhs = binary('*', lhs, factor());
            } else if (accept('/')) {
                lhs = binary('/', lhs, factor());
            } else {
                return lhs;
            }
        }
    }

    NodePtr factor() {
        NodePtr base = unary();
        if (accept('^')) {
            return binary('^', base, factor());
        }
        return base;
    }

    NodePtr unary() {
        if (accept('-')) {
            Node n = node_of(Node::Kind::Neg);
            n.lhs = unary();
            return make(std::move(n));
        }
        return atom();
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input", {"number", "identifier", "(", "-"});
        }
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return number();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            return identifier();
        }
        if (c == '(') {
            ++pos_;
            NodePtr inner = expr();
            if (!accept(')')) {
                skip_ws();
                fail("missing ')'", {")", "+", "-", "*", "/", "^"});
            }
            return inner;
        }
        fail(std::string("unexpected character '") + c + "'", {"number", "identifier", "(", "-"});
    }

    NodePtr number() {
        double value = 0.0;
        const char* first = text_.data() + pos_;
        const auto res = std::from_chars(first, text_.data() + text_.size(), value);
        if (res.ec != std::errc()) {
            fail("malformed number", {"number"});
        }
        pos_ += static_cast<std::size_t>(res.ptr - first);
        Node n = node_of(Node::Kind::Number);
        n.value = value;
        return make(std::move(n));
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);

        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            for (const auto& e : kFunctions) {
                if (e.name == name) {
                    ++pos_;
                    Node n = node_of(Node::Kind::Call);
                    n.func = e.func;
                    n.lhs = expr();
                    if (!accept(')')) {
                        skip_ws();
                        fail("missing ')' after function argument", {")", "+", "-", "*", "/", "^"});
                    }
                    return make(std::move(n));
                }
            }
            pos_ = start;
            fail("unknown function '" + std::string(name) + "'", {"sin", "cos", "exp", "sqrt", "abs"});
        }

        if (name == "t") return make(node_of(Node::Kind::Time));
        if (name == "normx") return make(node_of(Node::Kind::NormX));
        if (name == "normy") return make(node_of(Node::Kind::NormY));
        if (name.size() >= 2 && (name[0] == 'x' || name[0] == 'y')) {
            int index = 0;
            const auto digits = name.substr(1);
            const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), index);
            if (res.ec == std::errc() && res.ptr == digits.data() + digits.size() && index >= 1 &&
                digits[0] != '0') {
                Node n = node_of(name[0] == 'x' ? Node::Kind::X : Node::Kind::Y);
                n.index = index;
                return make(std::move(n));
            }
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'", {"t", "x<k>", "y<k>", "normx", "normy"});
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

double checked(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw EvalError(std::string("non-finite value in ") + what);
    }
    return v;
}

double eval(const Node& n, double t, const Vec& x, const Vec& y) {
    switch (n.kind) {
        case Node::Kind::Number:
            return n.value;
        case Node::Kind::Time:
            return t;
        case Node::Kind::X:
            if (n.index > x.size()) throw EvalError("x" + std::to_string(n.index) + " exceeds the dimension of x");
            return x[n.index - 1];
        case Node::Kind::Y:
            if (n.index > y.size()) throw EvalError("y" + std::to_string(n.index) + " exceeds the dimension of y");
            return y[n.index - 1];
        case Node::Kind::NormX:
            return checked(x.norm(), "normx");
        case Node::Kind::NormY:
            return checked(y.norm(), "normy");
        case Node::Kind::Neg:
            return -eval(*n.lhs, t, x, y);
        case Node::Kind::Call: {
            const double a = eval(*n.lhs, t, x, y);
            switch (n.func) {
                case Func::Sin: return checked(std::sin(a), "sin");
                case Func::Cos: return checked(std::cos(a), "cos");
                case Func::Exp: return checked(std::exp(a), "exp");
                case Func::Sqrt:
                    if (a < 0.0) throw EvalError("sqrt of a negative number");
                    return std::sqrt(a);
                case Func::Abs: return std::abs(a);
            }
            break;
        }
        case Node::Kind::Binary: {
            const double a = eval(*n.lhs, t, x, y);
            const double b = eval(*n.rhs, t, x, y);
            switch (n.op) {
                case '+': return checked(a + b, "addition");
                case '-': return checked(a - b, "subtraction");
                case '*': return checked(a * b, "multiplication");
                case '/':
                    if (b == 0.0) throw EvalError("division by zero");
                    return checked(a / b, "division");
                case '^': return checked(std::pow(a, b), "power");
            }
            break;
        }
    }
    throw EvalError("malformed expression tree");
}

std::string render(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Number: return format_number(n.value);
        case Node::Kind::Time: return "t";
        case Node::Kind::X: return "x" + std::to_string(n.index);
        case Node::Kind::Y: return "y" + std::to_string(n.index);
        case Node::Kind::NormX: return "normx";
        case Node::Kind::NormY: return "normy";
        case Node::Kind::Neg: return "(-" + render(*n.lhs) + ")";
        case Node::Kind::Call: return std::string(func_name(n.func)) + "(" + render(*n.lhs) + ")";
        case Node::Kind::Binary: return "(" + render(*n.lhs) + " " + n.op + " " + render(*n.rhs) + ")";
    }
    return "";
}

int max_index(const Node& n, Node::Kind kind) {
    int here = n.kind == kind ? n.index : 0;
    if (n.lhs) here = std::max(here, max_index(*n.lhs, kind));
    if (n.rhs) here = std::max(here, max_index(*n.rhs, kind));
    return here;
}

}  // namespace

Expression Expression::parse(std::string_view text) {
    return Expression(Parser(text).parse());
}

double Expression::evaluate(double t, const Vec& x, const Vec& y) const {
    return eval(*root_, t, x, y);
}

std::string Expression::render() const {
    return mbvp::render(*root_);
}

int Expression::max_x_index() const {
    return max_index(*root_, Node::Kind::X);
}

int Expression::max_y_index() const {
    return max_index(*root_, Node::Kind::Y);
}

}  // namespace mbvp

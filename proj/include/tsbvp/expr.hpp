#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsbvp {

/// Syntax error with the byte offset of the offending position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : std::runtime_error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Runtime evaluation failure (unbound variable, division by zero, domain
/// error, or a non-finite intermediate value).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable arithmetic expression over named variables.
///
/// Grammar, loosest to tightest binding: `+ -` (left), `* /` (left), unary
/// `-`, `^` (right). Functions: abs, sqrt, exp, sin, cos (one argument),
/// min, max (two arguments). There is no implicit multiplication: write
/// `100*(1+x^2)`, not `100(1+x^2)`.
///
/// Expressions hold a shared immutable tree, so copies are cheap and
/// evaluation is safe from any number of threads.
class Expr {
public:
    static Expr parse(std::string_view text);

    double eval(std::span<const std::pair<std::string_view, double>> bindings) const;
    double eval(const std::map<std::string, double>& bindings) const;

    /// Canonical text form; parsing it reproduces the same tree.
    std::string print() const;

    /// Sorted unique free variable names.
    std::vector<std::string> free_variables() const;

private:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        enum class Kind { Number, Variable, Unary, Binary, Call };
        Kind kind;
        double number = 0.0;
        std::string name;  // variable or function name
        char op = 0;       // one of + - * / ^ for Binary, '-' for Unary
        std::vector<NodePtr> args;
    };

    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    static double eval_node(const Node& n,
                            std::span<const std::pair<std::string_view, double>> bindings);
    static void print_node(const Node& n, std::string& out);
    static int precedence(const Node& n);
    static void collect_vars(const Node& n, std::set<std::string>& out);

    friend class ExprParser;
    NodePtr root_;
};

namespace detail {

inline bool known_function(std::string_view name, std::size_t& arity) {
    if (name == "abs" || name == "sqrt" || name == "exp" || name == "sin" || name == "cos") {
        arity = 1;
        return true;
    }
    if (name == "min" || name == "max") {
        arity = 2;
        return true;
    }
    return false;
}

inline std::string format_number(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

class ExprParser {
public:
    explicit ExprParser(std::string_view text) : text_(text) {}

    Expr parse() {
        auto root = parse_sum();
        skip_spaces();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return Expr(std::move(root));
    }

private:
    using Node = Expr::Node;
    using NodePtr = Expr::NodePtr;

    std::string_view text_;
    std::size_t pos_ = 0;

    void skip_spaces() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool peek_is(char c) {
        skip_spaces();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool consume(char c) {
        if (peek_is(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        NodePtr left = parse_product();
        for (;;) {
            skip_spaces();
            if (pos_ >= text_.size())
                break;
            const char c = text_[pos_];
            if (c != '+' && c != '-')
                break;
            ++pos_;
            NodePtr right = parse_product();
            left = make_binary(c, std::move(left), std::move(right));
        }
        return left;
    }

    NodePtr parse_product() {
        NodePtr left = parse_unary();
        for (;;) {
            skip_spaces();
            if (pos_ >= text_.size())
                break;
            const char c = text_[pos_];
            if (c != '*' && c != '/')
                break;
            ++pos_;
            NodePtr right = parse_unary();
            left = make_binary(c, std::move(left), std::move(right));
        }
        return left;
    }

    NodePtr parse_unary() {
        skip_spaces();
        if (consume('-')) {
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::Unary;
            node->op = '-';
            node->args.push_back(parse_unary());
            return node;
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        skip_spaces();
        if (consume('^')) {
            NodePtr exponent = parse_unary();  // right-associative, allows 2^-3
            return make_binary('^', std::move(base), std::move(exponent));
        }
        return base;
    }

    NodePtr parse_primary() {
        skip_spaces();
        if (pos_ >= text_.size())
            throw ParseError("expected an operand", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_sum();
            skip_spaces();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)))
            return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return parse_identifier();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                throw ParseError("expected digits after decimal point", pos_);
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
                ++pos_;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                pos_ = mark;  // not an exponent; treat 'e' as trailing input
            } else {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        double value = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc())
            throw ParseError("invalid numeric literal", start);
        auto node = std::make_shared<Node>();
        node->kind = Node::Kind::Number;
        node->number = value;
        return node;
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));
        if (peek_is('(')) {
            std::size_t arity = 0;
            if (!detail::known_function(name, arity))
                throw ParseError("unknown function '" + name + "'", start);
            ++pos_;  // '('
            auto node = std::make_shared<Node>();
            node->kind = Node::Kind::Call;
            node->name = std::move(name);
            node->args.push_back(parse_sum());
            while (consume(','))
                node->args.push_back(parse_sum());
            skip_spaces();
            if (!consume(')'))
                throw ParseError("expected ')'", pos_);
            if (node->args.size() != arity)
                throw ParseError("function '" + node->name + "' takes " +
                                     std::to_string(arity) + " argument(s)",
                                 start);
            return node;
        }
        auto node = std::make_shared<Node>();
        node->kind = Node::Kind::Variable;
        node->name = std::move(name);
        return node;
    }

    static NodePtr make_binary(char op, NodePtr left, NodePtr right) {
        auto node = std::make_shared<Node>();
        node->kind = Node::Kind::Binary;
        node->op = op;
        node->args.push_back(std::move(left));
        node->args.push_back(std::move(right));
        return node;
    }
};

inline Expr Expr::parse(std::string_view text) { return ExprParser(text).parse(); }

inline double Expr::eval_node(const Node& n,
                              std::span<const std::pair<std::string_view, double>> bindings) {
    switch (n.kind) {
        case Node::Kind::Number:
            return n.number;
        case Node::Kind::Variable: {
            for (const auto& [name, value] : bindings)
                if (name == n.name)
                    return value;
            throw EvalError("unbound variable '" + n.name + "'");
        }
        case Node::Kind::Unary:
            return -eval_node(*n.args[0], bindings);
        case Node::Kind::Binary: {
            const double a = eval_node(*n.args[0], bindings);
            const double b = eval_node(*n.args[1], bindings);
            double r = 0.0;
            switch (n.op) {
                case '+': r = a + b; break;
                case '-': r = a - b; break;
                case '*': r = a * b; break;
                case '/':
                    if (b == 0.0)
                        throw EvalError("division by zero");
                    r = a / b;
                    break;
                case '^': r = std::pow(a, b); break;
                default: throw EvalError("corrupt expression tree");
            }
            if (!std::isfinite(r))
                throw EvalError(std::string("non-finite value from '") + n.op + "'");
            return r;
        }
        case Node::Kind::Call: {
            const double a = eval_node(*n.args[0], bindings);
            double r = 0.0;
            if (n.name == "abs") {
                r = std::abs(a);
            } else if (n.name == "sqrt") {
                if (a < 0.0)
                    throw EvalError("sqrt of a negative value");
                r = std::sqrt(a);
            } else if (n.name == "exp") {
                r = std::exp(a);
            } else if (n.name == "sin") {
                r = std::sin(a);
            } else if (n.name == "cos") {
                r = std::cos(a);
            } else {
                const double b = eval_node(*n.args[1], bindings);
                r = n.name == "min" ? std::min(a, b) : std::max(a, b);
            }
            if (!std::isfinite(r))
                throw EvalError("non-finite value from '" + n.name + "'");
            return r;
        }
    }
    throw EvalError("corrupt expression tree");
}

inline double Expr::eval(std::span<const std::pair<std::string_view, double>> bindings) const {
    return eval_node(*root_, bindings);
}

inline double Expr::eval(const std::map<std::string, double>& bindings) const {
    std::vector<std::pair<std::string_view, double>> flat;
    flat.reserve(bindings.size());
    for (const auto& [k, v] : bindings)
        flat.emplace_back(k, v);
    return eval_node(*root_, flat);
}

inline int Expr::precedence(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Binary:
            if (n.op == '+' || n.op == '-')
                return 1;
            if (n.op == '*' || n.op == '/')
                return 2;
            return 4;  // '^'
        case Node::Kind::Unary:
            return 3;
        default:
            return 5;
    }
}

inline void Expr::print_node(const Node& n, std::string& out) {
    const auto wrapped = [&out](const Node& child, bool needs_parens) {
        if (needs_parens)
            out += '(';
        print_node(child, out);
        if (needs_parens)
            out += ')';
    };
    switch (n.kind) {
        case Node::Kind::Number:
            out += detail::format_number(n.number);
            return;
        case Node::Kind::Variable:
            out += n.name;
            return;
        case Node::Kind::Unary:
            out += '-';
            wrapped(*n.args[0], precedence(*n.args[0]) < precedence(n));
            return;
        case Node::Kind::Binary: {
            const int prec = precedence(n);
            const Node& left = *n.args[0];
            const Node& right = *n.args[1];
            // '^' is right-associative; everything else groups leftward, so a
            // same-precedence right child always keeps its parentheses.
            wrapped(left, precedence(left) < prec || (precedence(left) == prec && n.op == '^'));
            out += n.op;
            wrapped(right, n.op == '^' ? precedence(right) < prec : precedence(right) <= prec);
            return;
        }
        case Node::Kind::Call: {
            out += n.name;
            out += '(';
            for (std::size_t i = 0; i < n.args.size(); ++i) {
                if (i > 0)
                    out += ", ";
                print_node(*n.args[i], out);
            }
            out += ')';
            return;
        }
    }
}

inline std::string Expr::print() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

inline void Expr::collect_vars(const Node& n, std::set<std::string>& out) {
    if (n.kind == Node::Kind::Variable)
        out.insert(n.name);
    for (const auto& child : n.args)
        collect_vars(*child, out);
}

inline std::vector<std::string> Expr::free_variables() const {
    std::set<std::string> vars;
    collect_vars(*root_, vars);
    return {vars.begin(), vars.end()};
}

}  // namespace tsbvp

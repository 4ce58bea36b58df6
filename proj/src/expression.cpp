#include "finitopo/expression.hpp"

#include "finitopo/error.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <variant>

namespace finitopo {

namespace {

enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh, Atan, Abs };

const std::map<std::string, Fn>& function_table() {
    static const std::map<std::string, Fn> table = {
        {"sin", Fn::Sin},   {"cos", Fn::Cos},   {"tan", Fn::Tan},   {"exp", Fn::Exp},
        {"log", Fn::Log},   {"sqrt", Fn::Sqrt}, {"sinh", Fn::Sinh}, {"cosh", Fn::Cosh},
        {"tanh", Fn::Tanh}, {"atan", Fn::Atan}, {"abs", Fn::Abs},
    };
    return table;
}

}  // namespace

struct Expression::Node {
    enum class Kind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Call };
    Kind kind = Kind::Constant;
    double constant = 0.0;
    std::size_t variable = 0;
    Fn fn = Fn::Sin;
    std::shared_ptr<const Node> lhs, rhs;

    bool is_constant() const { return kind == Kind::Constant; }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

template <typename T>
T apply(Fn fn, const T& a) {
    using std::abs, std::atan, std::cos, std::cosh, std::exp, std::log, std::sin, std::sinh,
        std::sqrt, std::tan, std::tanh;
    switch (fn) {
        case Fn::Sin: return sin(a);
        case Fn::Cos: return cos(a);
        case Fn::Tan: return tan(a);
        case Fn::Exp: return exp(a);
        case Fn::Log: return log(a);
        case Fn::Sqrt: return sqrt(a);
        case Fn::Sinh: return sinh(a);
        case Fn::Cosh: return cosh(a);
        case Fn::Tanh: return tanh(a);
        case Fn::Atan: return atan(a);
        case Fn::Abs:
            if constexpr (std::is_same_v<T, double>) {
                return abs(a);
            } else {
                return a.value() < 0.0 ? -a : a;
            }
    }
    return a;
}

template <typename T>
T eval(const Expression::Node& n, std::span<const T> vars) {
    switch (n.kind) {
        case Kind::Constant: return T(n.constant);
        case Kind::Variable: return vars[n.variable];
        case Kind::Add: return eval(*n.lhs, vars) + eval(*n.rhs, vars);
        case Kind::Sub: return eval(*n.lhs, vars) - eval(*n.rhs, vars);
        case Kind::Mul: return eval(*n.lhs, vars) * eval(*n.rhs, vars);
        case Kind::Div: return eval(*n.lhs, vars) / eval(*n.rhs, vars);
        case Kind::Neg: return -eval(*n.lhs, vars);
        case Kind::Call: return apply(n.fn, eval(*n.lhs, vars));
        case Kind::Pow: {
            const T base = eval(*n.lhs, vars);
            if (n.rhs->is_constant()) {
                using std::pow;
                return pow(base, n.rhs->constant);
            }
            using std::exp, std::log;
            return exp(eval(*n.rhs, vars) * log(base));
        }
    }
    return T(0.0);
}

NodePtr make_constant(double v) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = Kind::Constant;
    n->constant = v;
    return n;
}

NodePtr make_binary(Kind kind, NodePtr lhs, NodePtr rhs) {
    if (lhs->is_constant() && rhs->is_constant() && kind != Kind::Pow) {
        const double a = lhs->constant, b = rhs->constant;
        switch (kind) {
            case Kind::Add: return make_constant(a + b);
            case Kind::Sub: return make_constant(a - b);
            case Kind::Mul: return make_constant(a * b);
            case Kind::Div: return make_constant(a / b);
            default: break;
        }
    }
    if (kind == Kind::Pow && lhs->is_constant() && rhs->is_constant())
        return make_constant(std::pow(lhs->constant, rhs->constant));
    auto n = std::make_shared<Expression::Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& vars,
           const std::map<std::string, double>& constants)
        : src_(src), vars_(vars), constants_(constants) {}

    NodePtr parse() {
        NodePtr n = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw GeometryError(ErrorCode::ParseError,
                            "expression '" + src_ + "' at column " + std::to_string(pos_ + 1) +
                                ": " + msg);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (accept('+')) lhs = make_binary(Kind::Add, lhs, parse_product());
            else if (accept('-')) lhs = make_binary(Kind::Sub, lhs, parse_product());
            else return lhs;
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = make_binary(Kind::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = make_binary(Kind::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept('-')) {
            NodePtr operand = parse_unary();
            if (operand->is_constant()) return make_constant(-operand->constant);
            auto n = std::make_shared<Expression::Node>();
            n->kind = Kind::Neg;
            n->lhs = operand;
            return n;
        }
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept('^')) return make_binary(Kind::Pow, base, parse_unary());
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of expression");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(src_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("malformed number");
            }
            pos_ += used;
            return make_constant(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string name = src_.substr(start, pos_ - start);
            if (accept('(')) {
                const auto it = function_table().find(name);
                if (it == function_table().end()) fail("unknown function '" + name + "'");
                NodePtr arg = parse_sum();
                if (!accept(')')) fail("expected ')' after argument of " + name);
                if (arg->is_constant()) return make_constant(apply(it->second, arg->constant));
                auto n = std::make_shared<Expression::Node>();
                n->kind = Kind::Call;
                n->fn = it->second;
                n->lhs = arg;
                return n;
            }
            for (std::size_t i = 0; i < vars_.size(); ++i) {
                if (vars_[i] == name) {
                    auto n = std::make_shared<Expression::Node>();
                    n->kind = Kind::Variable;
                    n->variable = i;
                    return n;
                }
            }
            if (const auto it = constants_.find(name); it != constants_.end())
                return make_constant(it->second);
            if (name == "pi") return make_constant(std::numbers::pi);
            if (name == "e") return make_constant(std::numbers::e);
            fail("unknown identifier '" + name + "'");
        }
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    const std::string& src_;
    const std::vector<std::string>& vars_;
    const std::map<std::string, double>& constants_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& source, const std::vector<std::string>& variables,
                       const std::map<std::string, double>& constants)
    : source_(source) {
    if (variables.size() > Taylor2::kMaxVars)
        throw GeometryError(ErrorCode::ParseError, "at most 4 chart variables are supported");
    root_ = Parser(source_, variables, constants).parse();
}

Taylor2 Expression::evaluate(std::span<const Taylor2> vars) const { return eval(*root_, vars); }

double Expression::evaluate(std::span<const double> vars) const { return eval(*root_, vars); }

}  // namespace finitopo

#include "longrun/expression.hpp"

#include "longrun/errors.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace longrun {

struct Expression::Node {
    enum class Kind { Constant, Variable, Unary, Binary, Call1, Call2 } kind;
    double value = 0.0;
    char op = 0;
    double (*fn1)(double) = nullptr;
    double (*fn2)(double, double) = nullptr;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double v) const {
        switch (kind) {
            case Kind::Constant: return value;
            case Kind::Variable: return v;
            case Kind::Unary: return -lhs->eval(v);
            case Kind::Call1: return fn1(lhs->eval(v));
            case Kind::Call2: return fn2(lhs->eval(v), rhs->eval(v));
            case Kind::Binary: {
                const double a = lhs->eval(v);
                const double b = rhs->eval(v);
                switch (op) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    case '/': return a / b;
                    default: return std::pow(a, b);
                }
            }
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

double fn_exp(double x) { return std::exp(x); }
double fn_log(double x) { return std::log(x); }
double fn_sqrt(double x) { return std::sqrt(x); }
double fn_abs(double x) { return std::abs(x); }
double fn_lgamma(double x) { return std::lgamma(x); }
double fn_log1p(double x) { return std::log1p(x); }
double fn_expm1(double x) { return std::expm1(x); }
double fn_erf(double x) { return std::erf(x); }
double fn_erfc(double x) { return std::erfc(x); }
double fn_sin(double x) { return std::sin(x); }
double fn_cos(double x) { return std::cos(x); }
double fn_tanh(double x) { return std::tanh(x); }
double fn_pow(double a, double b) { return std::pow(a, b); }
double fn_min(double a, double b) { return std::fmin(a, b); }
double fn_max(double a, double b) { return std::fmax(a, b); }

class Parser {
public:
    Parser(const std::string& src, const std::string& variable, const std::map<std::string, double>& constants)
        : src_(src), variable_(variable), constants_(constants) {}

    NodePtr parse() {
        NodePtr n = expr();
        skip();
        if (pos_ != src_.size()) error("unexpected character");
        return n;
    }

private:
    [[noreturn]] void error(const std::string& what) const {
        throw ConfigError("expression '" + src_ + "': " + what + " at offset " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static NodePtr binary(char op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Binary;
        n->op = op;
        n->lhs = std::move(a);
        n->rhs = std::move(b);
        return n;
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+')) n = binary('+', n, term());
            else if (accept('-')) n = binary('-', n, term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) n = binary('*', n, unary());
            else if (accept('/')) n = binary('/', n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Unary;
            n->lhs = unary();
            return n;
        }
        if (accept('+')) return unary();
        return power();
    }

    // Right-associative, binds tighter than unary minus on its left operand only.
    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return binary('^', base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= src_.size()) error("unexpected end");
        const char c = src_[pos_];
        if (accept('(')) {
            NodePtr n = expr();
            if (!accept(')')) error("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) error("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Constant;
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string id = src_.substr(start, pos_ - start);
            if (accept('(')) return call(id);
            auto n = std::make_shared<Node>();
            if (id == variable_) {
                n->kind = Node::Kind::Variable;
                return n;
            }
            n->kind = Node::Kind::Constant;
            if (id == "pi") n->value = std::numbers::pi;
            else if (auto it = constants_.find(id); it != constants_.end()) n->value = it->second;
            else error("unknown identifier '" + id + "'");
            return n;
        }
        error("unexpected character");
    }

    NodePtr call(const std::string& id) {
        static const std::map<std::string, double (*)(double)> one = {
            {"exp", fn_exp},     {"log", fn_log},     {"sqrt", fn_sqrt}, {"abs", fn_abs},
            {"lgamma", fn_lgamma}, {"log1p", fn_log1p}, {"expm1", fn_expm1}, {"erf", fn_erf},
            {"erfc", fn_erfc},   {"sin", fn_sin},     {"cos", fn_cos},   {"tanh", fn_tanh}};
        static const std::map<std::string, double (*)(double, double)> two = {
            {"pow", fn_pow}, {"min", fn_min}, {"max", fn_max}};
        auto n = std::make_shared<Node>();
        n->lhs = expr();
        if (auto it = one.find(id); it != one.end()) {
            n->kind = Node::Kind::Call1;
            n->fn1 = it->second;
        } else if (auto it2 = two.find(id); it2 != two.end()) {
            if (!accept(',')) error("expected ','");
            n->kind = Node::Kind::Call2;
            n->fn2 = it2->second;
            n->rhs = expr();
        } else {
            error("unknown function '" + id + "'");
        }
        if (!accept(')')) error("expected ')'");
        return n;
    }

    const std::string& src_;
    const std::string& variable_;
    const std::map<std::string, double>& constants_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& source, const std::string& variable,
                       const std::map<std::string, double>& constants)
    : source_(source), root_(Parser(source_, variable, constants).parse()) {}

double Expression::operator()(double value) const { return root_->eval(value); }

}  // namespace longrun

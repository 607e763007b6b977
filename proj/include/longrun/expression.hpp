#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace longrun {

/// A compiled arithmetic expression in one free variable (x or t) plus named
/// constants. Supports + - * / ^, unary minus, parentheses and the functions
/// exp log sqrt abs pow lgamma log1p expm1 erf erfc sin cos tanh min max.
class Expression {
public:
    struct Node;

    /// Throws ConfigError on syntax errors or unknown identifiers.
    Expression(const std::string& source, const std::string& variable,
               const std::map<std::string, double>& constants = {});

    double operator()(double value) const;
    const std::string& source() const { return source_; }

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

}  // namespace longrun

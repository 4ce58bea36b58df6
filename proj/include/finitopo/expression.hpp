#pragma once

#include "finitopo/taylor2.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace finitopo {

/// Compiled arithmetic expression over named chart variables.
///
/// Grammar: numbers, variables, named constants (pi, e, user parameters),
/// + - * / ^ with the usual precedence (^ is right-associative), unary minus,
/// parentheses, and calls to sin cos tan exp log sqrt sinh cosh tanh atan abs.
/// Evaluated in second-order forward mode so surfaces given as expressions
/// get exact jets.
class Expression {
public:
    struct Node;

    /// Throws GeometryError(ParseError) on malformed input or unknown names.
    Expression(const std::string& source, const std::vector<std::string>& variables,
               const std::map<std::string, double>& constants = {});

    Taylor2 evaluate(std::span<const Taylor2> vars) const;
    double evaluate(std::span<const double> vars) const;

    const std::string& source() const { return source_; }

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

}  // namespace finitopo

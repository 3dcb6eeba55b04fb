#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace volterra {

struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A compiled scalar expression of one variable, for scenario files and CLI
/// flags. Grammar: + - * / ^ and parentheses; functions sin cos tan exp log
/// sqrt abs sinh cosh tanh; constants pi, e; the variable may be written t, s
/// or u. Example: "0.7 + exp(-t)*sin(t)".
class Expression {
public:
    static Expression parse(std::string_view text);

    double operator()(double t) const;
    const std::string& text() const { return text_; }

    Expression() = default;
    bool valid() const { return root_ != nullptr; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

}  // namespace volterra

#pragma once

#include <functional>
#include <memory>
#include <string>

namespace biharm {

// Scalar expression in one variable t.
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | base ('^' factor)?
//   base   := number | 't' | '(' expr ')' | func '(' expr ')'
//   func   := exp | log | abs | sqrt
class Expression {
public:
    struct Node;

    static Expression parse(const std::string& src);

    double operator()(double t) const;
    const std::string& source() const { return src_; }
    std::function<double(double)> as_function() const;

private:
    std::string src_;
    std::shared_ptr<const Node> root_;
};

}  // namespace biharm

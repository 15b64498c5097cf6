#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mdag/errors.hpp"
#include "mdag/node.hpp"

namespace mdag {

// Arithmetic over parent values for structural-equation parameters:
//   + - * /, exp, sqrt, log, I(cond), comparisons (= == != < <= > >=),
//   parentheses, numeric literals, variable tokens ("Weight@6", "Age").
class Formula {
public:
    Formula() = default;
    static Formula parse(const std::string& text);

    const std::string& text() const { return text_; }
    const std::vector<NodeId>& variables() const { return vars_; }

    // Binds variable slots to value indices; `columns` lists the values
    // the evaluator will later pass in the same order.
    void bind(const std::vector<NodeId>& columns);

    // Evaluates with the bound slots; values[i] belongs to columns[i].
    double eval(std::span<const double> values) const;

private:
    struct Node {
        enum class Op {
            Num, Var, Add, Sub, Mul, Div, Neg, Exp, Sqrt, Log, Indicator,
            Eq, Ne, Lt, Le, Gt, Ge
        };
        Op op = Op::Num;
        double num = 0.0;
        int var_slot = -1;  // index into vars_, rebased by bind()
        int a = -1, b = -1;  // child indices
    };

    double eval_node(int idx, std::span<const double> values) const;

    std::string text_;
    std::vector<Node> nodes_;
    int root_ = -1;
    std::vector<NodeId> vars_;
    std::vector<int> slot_to_column_;
};

}  // namespace mdag

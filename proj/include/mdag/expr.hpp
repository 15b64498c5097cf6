#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "mdag/node.hpp"

namespace mdag {

// A free variable occurrence. po_m0 carries the X^{M=0} potential-outcome
// annotation used for partially observed variables before recovery.
struct VarTerm {
    NodeId id;
    bool po_m0 = false;

    bool operator==(const VarTerm& o) const { return id == o.id && po_m0 == o.po_m0; }
};

// Either a concrete level or a symbolic intervention value such as "a".
using Value = std::variant<double, std::string>;

// A variable pinned to a value: intervention fixes (EFV_6 = a), outcome
// slices (VL_36 = 1) and recovered missingness conditions (M_{VL_36} = 0,
// flagged is_m0).
struct FixedTerm {
    NodeId id;
    Value value = 0.0;
    bool po_m0 = false;
    bool is_m0 = false;

    bool operator==(const FixedTerm& o) const {
        return id == o.id && value == o.value && po_m0 == o.po_m0 && is_m0 == o.is_m0;
    }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Probability-expression AST. `Conditional` with an empty given part doubles
// as the Marginal node; `Quotient` appears only in estimands emitted from
// nested identification steps where conditionals of derived distributions
// cannot be written against the observational joint.
struct Expr {
    enum class Kind { Conditional, Product, SumOver, Quotient };

    Kind kind = Kind::Conditional;

    // Conditional
    std::vector<VarTerm> targets;
    std::vector<FixedTerm> target_fixed;
    std::vector<VarTerm> given;
    std::vector<FixedTerm> given_fixed;

    // Product
    std::vector<ExprPtr> factors;

    // SumOver
    std::vector<NodeId> sum_vars;
    ExprPtr body;

    // Quotient
    ExprPtr num, den;

    bool is_marginal() const {
        return kind == Kind::Conditional && given.empty() && given_fixed.empty();
    }
};

ExprPtr make_conditional(std::vector<VarTerm> targets, std::vector<VarTerm> given,
                         std::vector<FixedTerm> given_fixed = {},
                         std::vector<FixedTerm> target_fixed = {});
ExprPtr make_marginal(std::vector<VarTerm> targets);
// Flattens nested products and drops constant-1 factors.
ExprPtr make_product(std::vector<ExprPtr> factors);
// Drops sum variables that are not free in the body.
ExprPtr make_sum(std::vector<NodeId> vars, ExprPtr body);
ExprPtr make_quotient(ExprPtr num, ExprPtr den);

// Free variables (table dimensions of the evaluated expression).
std::vector<NodeId> free_vars(const ExprPtr& e);
// Every NodeId referenced anywhere, including fixed and summed ones.
std::vector<NodeId> all_vars(const ExprPtr& e);
// All conditional/marginal leaves, left to right.
std::vector<ExprPtr> leaf_factors(const ExprPtr& e);

bool contains_quotient(const ExprPtr& e);

// Structural equality up to ordering of targets / given / sums / products.
bool expr_equal_canonical(const ExprPtr& a, const ExprPtr& b);

// Rewrites free occurrences of the given variables into fixed-value
// conditioning terms: used to bind do-values after identification.
ExprPtr fix_variables(const ExprPtr& e, const std::vector<std::pair<NodeId, Value>>& fixes);

enum class PrintStyle { Text, Latex };
std::string pretty_print(const ExprPtr& e, PrintStyle style = PrintStyle::Text);

// Display convention for variables in formulas: "VL_36"; missingness
// indicators named "M_<target>" render as "M_{VL_36}" when timed.
std::string var_display(const NodeId& id, PrintStyle style = PrintStyle::Text);

std::string value_display(const Value& v);

// JSON (de)serialization; the same structured format as graph files.
std::string expr_to_json(const ExprPtr& e);
ExprPtr expr_from_json(const std::string& text);

}  // namespace mdag

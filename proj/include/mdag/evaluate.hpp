#pragma once

#include <map>
#include <string>

#include "mdag/expr.hpp"
#include "mdag/factor.hpp"
#include "mdag/graph.hpp"

namespace mdag {

// Bindings for symbolic intervention values ("a" → 1.0).
using SymbolEnv = std::map<std::string, double>;

// Exact evaluation of a probability expression against a finite joint.
// The result is a table over the free variables of `e`. Potential-outcome
// annotations are ignored (they are bookkeeping, not semantics); fixed
// M = 0 terms require the indicator variables to be present in the joint.
// With strict=true any 0/0 conditioning cell raises PositivityViolation;
// otherwise such cells evaluate to 0.
template <typename T>
FactorT<T> evaluate(const ExprPtr& e, const DiscreteJointT<T>& j, const SymbolEnv& env = {},
                    bool strict = true);

extern template FactorT<double> evaluate<double>(const ExprPtr&, const DiscreteJointT<double>&,
                                                 const SymbolEnv&, bool);
extern template FactorT<Rat> evaluate<Rat>(const ExprPtr&, const DiscreteJointT<Rat>&,
                                           const SymbolEnv&, bool);

// Ground-truth do-operator semantics: replaces the factors of intervened
// nodes by point masses and drops their dimensions. `g` must contain every
// joint variable, and the parent sets of `g` must factorize the joint.
// The result is the interventional distribution over the remaining
// variables.
template <typename T>
FactorT<T> truncated_factorization(const DiscreteJointT<T>& j, const MDag& g,
                                   const std::vector<std::pair<NodeId, double>>& do_assignments);

extern template FactorT<double> truncated_factorization<double>(
    const DiscreteJointT<double>&, const MDag&, const std::vector<std::pair<NodeId, double>>&);
extern template FactorT<Rat> truncated_factorization<Rat>(
    const DiscreteJointT<Rat>&, const MDag&, const std::vector<std::pair<NodeId, double>>&);

// Marginal of the joint onto a subset of its variables (e.g. dropping
// latents to form the observed-data distribution).
template <typename T>
DiscreteJointT<T> joint_marginal(const DiscreteJointT<T>& j, const std::vector<NodeId>& keep);

extern template DiscreteJointT<double> joint_marginal<double>(const DiscreteJointT<double>&,
                                                              const std::vector<NodeId>&);
extern template DiscreteJointT<Rat> joint_marginal<Rat>(const DiscreteJointT<Rat>&,
                                                        const std::vector<NodeId>&);

}  // namespace mdag

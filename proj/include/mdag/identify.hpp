#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdag/expr.hpp"
#include "mdag/graph.hpp"

namespace mdag {

// P(outcome = value ; do(interventions)). Intervention values may be
// symbolic ("a") or concrete.
struct CausalQuery {
    NodeId outcome;
    // absent value → the estimand stays a distribution over the outcome
    std::optional<Value> outcome_value;
    // absent values → intervened variables stay as free conditioning slots
    std::vector<std::pair<NodeId, std::optional<Value>>> interventions;
    // ordered adjustment variables for the back-door factorization;
    // prior outcomes (same base name as the outcome, earlier time) are
    // added automatically
    std::vector<NodeId> confounders;
};

CausalQuery query_from_json(const std::string& text);
std::string query_to_json(const CausalQuery& q);
CausalQuery load_query_file(const std::string& path);

struct HedgeWitness {
    std::vector<NodeId> component;     // C(G) = G district that forms the hedge
    std::vector<NodeId> subcomponent;  // S = C(G \ X)
    std::string description;
};

struct IdentificationResult {
    bool identifiable = false;
    ExprPtr estimand;               // outcome sliced at its queried value
    ExprPtr estimand_distribution;  // same estimand with the outcome free
    std::optional<HedgeWitness> failure_witness;
    // Variables the recursion absorbed into the intervention set because
    // they cannot affect the outcome once the query's interventions are
    // held. They appear in the estimand as conditioning values and the
    // estimand is constant in them; each is pinned to a named symbol.
    std::vector<std::pair<NodeId, std::string>> reference_values;
};

// Latent projection of a c-DAG: directed edges through latent-only paths,
// bidirected edges for latent-only treks. The projection is what the
// identification recursion runs on.
struct Admg {
    std::vector<NodeId> ids;
    std::vector<NodeSet> pa, ch, sib;
    std::vector<int> topo_pos;  // position in the inherited topological order

    static Admg project(const MDag& cdag);

    int n() const { return static_cast<int>(ids.size()); }
    NodeSet all() const;
    // ancestors within `alive`, optionally with directed/bidirected edges
    // into `cut_into` removed
    NodeSet ancestors(const NodeSet& s, const NodeSet& alive) const;
    NodeSet ancestors_cut(const NodeSet& s, const NodeSet& alive, const NodeSet& cut_into) const;
    std::vector<NodeSet> districts(const NodeSet& within) const;
    NodeSet topo_sorted(NodeSet s) const;  // ascending topological position
};

// Sound and complete identification of P(y ; do(x)) from the c-DAG of
// q's graph (roles other than latent are treated as observable).
// Non-identifiability is reported, not thrown.
IdentificationResult idc(const MDag& graph, const CausalQuery& q);

// Conditional-query variant P(y | w ; do(x)): do-calculus rule 2 moves
// conditioning variables into the intervention set, the rest is handled by
// a final quotient.
IdentificationResult idc_conditional(const MDag& graph, const CausalQuery& q,
                                     const std::vector<NodeId>& conditioning);

// Robins g-formula for time-ordered interventions over the supplied
// ordered confounder list. The sequential back-door condition is verified
// per intervention time via d-separation; a violation is reported with an
// open back-door path as witness.
IdentificationResult backdoor_gformula(const MDag& graph, const CausalQuery& q);

// All inclusion-minimal sets Z with X ⊥ Y | Z, smallest first, ties
// lexicographic. Exhaustive over An(X ∪ Y); desk scale only.
std::vector<std::vector<NodeId>> minimal_separating_sets(const MDag& g,
                                                         const std::vector<NodeId>& x,
                                                         const std::vector<NodeId>& y);

// Spec surface: minimal sets rendering the outcome independent of the
// intervention variables.
std::vector<std::vector<NodeId>> minimal_adjustment_sets(const MDag& graph,
                                                         const CausalQuery& q);

// Marks every variable occurrence whose node is partially observed in `g`
// with the X^{M=0} potential-outcome annotation.
ExprPtr annotate_potential_outcomes(const ExprPtr& e, const MDag& g);

}  // namespace mdag

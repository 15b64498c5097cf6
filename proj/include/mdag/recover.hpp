#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdag/expr.hpp"
#include "mdag/graph.hpp"
#include "mdag/identify.hpp"

namespace mdag {

// One rewrite step of a factor derivation, printable in the two-column
// style: the rewritten expression plus its justification (a d-separation
// statement, closedness, or consistency).
struct DerivationStep {
    ExprPtr expr;
    std::string justification;
};

struct FactorFailure {
    ExprPtr factor;
    NodeId indicator;  // one M node that cannot be discharged
    // structural dead ends: direct causes of in-scope indicators among the
    // factor's variables or the attempted mediators, e.g. MV_6 → M_{EFV_6}
    std::vector<std::pair<NodeId, NodeId>> reason_edges;
    std::string note;
};

struct FactorRecovery {
    ExprPtr original;
    ExprPtr recovered;  // null when the factor failed
    std::vector<DerivationStep> steps;
    std::optional<FactorFailure> failure;
};

struct RecoverabilityReport {
    bool recoverable = false;
    std::vector<FactorRecovery> per_factor;
    std::string strategy_note;  // states the strategy-relative meaning of a negative verdict
};

// Factor-by-factor recoverability of an identified estimand over
// V_o ∪ V_m against the m-DAG: closed-mechanism shortcut, direct
// d-separation conditioning, and a one-level expansion over auxiliary
// mediators (depth-capped). Expressions referencing latent or missingness
// nodes are rejected with NotIdentifiedInput.
RecoverabilityReport recover_estimand(const ExprPtr& e, const MDag& g);

enum class IdentifyMethod { Idc, Backdoor };

struct RecoverQueryResult {
    IdentificationResult identification;
    std::optional<RecoverabilityReport> recoverability;  // absent if not identifiable
    MDag analysis_graph;  // the time-restricted m-DAG the analysis ran on
};

// Pipeline: identify (on the query-relevant time-restricted subgraph),
// then recover. Non-identifiable queries short-circuit.
RecoverQueryResult recover_query(const MDag& g, const CausalQuery& q,
                                 IdentifyMethod method = IdentifyMethod::Idc);

// For each recovered factor, the variables whose joint observedness
// defines that factor's available-case subsample (partially observed
// variables only; fully observed ones are always present).
std::vector<std::pair<ExprPtr, std::vector<NodeId>>> available_case_plan(
    const RecoverabilityReport& report, const MDag& g);

std::string format_recoverability_report(const RecoverabilityReport& r, const MDag& g);

}  // namespace mdag

#include "mdag/recover.hpp"

#include "mdag/taxonomy.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace mdag {

namespace {

std::string display_set(const MDag& g, const NodeSet& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ", ";
        out += g.display(s[i]);
    }
    return out;
}

std::string indep_statement(const MDag& g, const NodeSet& t, const NodeSet& ms,
                            const NodeSet& cond) {
    std::ostringstream os;
    os << "(" << display_set(g, t) << " ⊥ ";
    if (ms.size() > 1) os << "{";
    os << display_set(g, ms);
    if (ms.size() > 1) os << "}";
    if (!cond.empty()) os << " | " << display_set(g, cond);
    os << ")";
    return os.str();
}

// Clears potential-outcome annotations (the consistency step).
ExprPtr strip_po(const ExprPtr& e) {
    auto out = std::make_shared<Expr>(*e);
    for (auto& t : out->targets) t.po_m0 = false;
    for (auto& t : out->target_fixed) t.po_m0 = false;
    for (auto& t : out->given) t.po_m0 = false;
    for (auto& t : out->given_fixed) t.po_m0 = false;
    return out;
}

ExprPtr with_m0(const ExprPtr& e, const MDag& g, const NodeSet& indicators) {
    auto out = std::make_shared<Expr>(*e);
    for (int m : indicators) out->given_fixed.push_back({g.id(m), 0.0, false, true});
    return out;
}

struct FactorScope {
    NodeSet targets, cond, all;
    NodeSet partials;    // partially observed variables in scope
    NodeSet indicators;  // their missingness indicators
};

FactorScope factor_scope(const ExprPtr& f, const MDag& g) {
    FactorScope s;
    auto add = [&](const NodeId& id, NodeSet& dst) {
        int v = g.index(id);
        if (g.role(v) == NodeRole::Latent || g.role(v) == NodeRole::Missingness)
            throw NotIdentifiedInput("estimand references " + g.display(v) +
                                     " which is not an identified quantity");
        dst.push_back(v);
    };
    for (const auto& t : f->targets) add(t.id, s.targets);
    for (const auto& t : f->target_fixed) add(t.id, s.targets);
    for (const auto& c : f->given) add(c.id, s.cond);
    for (const auto& c : f->given_fixed)
        if (!c.is_m0) add(c.id, s.cond);
    s.targets = make_set(std::move(s.targets));
    s.cond = make_set(std::move(s.cond));
    s.all = set_union(s.targets, s.cond);
    for (int v : s.all)
        if (g.role(v) == NodeRole::Partial) {
            s.partials.push_back(v);
            s.indicators.push_back(g.indicator_of(v));
        }
    s.partials = make_set(std::move(s.partials));
    s.indicators = make_set(std::move(s.indicators));
    return s;
}

struct Recoverer {
    const MDag& g;
    bool closed;
    static constexpr int kMaxExpansionDepth = 2;
    static constexpr int kMaxMediatorSize = 4;

    // Auxiliary mediator candidates: ancestors of the indicators among the
    // auxiliary nodes, ordered by (time, name) via node index.
    NodeSet mediator_candidates(const NodeSet& indicators, const NodeSet& exclude) const {
        NodeSet anc = g.ancestors(indicators);
        NodeSet aux = g.nodes_with_role(NodeRole::Auxiliary);
        return set_minus(set_intersect(anc, aux), exclude);
    }

    FactorRecovery recover_factor(const ExprPtr& f, int depth) const {
        FactorRecovery out;
        out.original = f;
        FactorScope s = factor_scope(f, g);

        if (s.indicators.empty()) {
            out.recovered = strip_po(f);
            return out;
        }

        if (closed) {
            ExprPtr cond = with_m0(f, g, s.indicators);
            out.steps.push_back(
                {cond, "closed mechanism: no path connects substantive variables to indicators"});
            out.recovered = strip_po(cond);
            out.steps.push_back({out.recovered, "(by consistency)"});
            return out;
        }

        // a target that directly causes an in-scope indicator can never be
        // separated from it
        {
            std::vector<std::pair<NodeId, NodeId>> dead;
            std::string note;
            for (int t : s.targets)
                for (int m : s.indicators)
                    if (g.has_edge(t, m)) {
                        dead.push_back({g.id(t), g.id(m)});
                        if (!note.empty()) note += "; ";
                        note += g.display(t) + " is a parent of " + g.display(m);
                    }
            if (!dead.empty()) {
                out.failure =
                    FactorFailure{f, dead.front().second, std::move(dead), std::move(note)};
                return out;
            }
        }

        if (g.d_separated(s.targets, s.indicators, s.cond)) {
            ExprPtr cond = with_m0(f, g, s.indicators);
            out.steps.push_back({cond, indep_statement(g, s.targets, s.indicators, s.cond)});
            out.recovered = strip_po(cond);
            out.steps.push_back({out.recovered, "(by consistency)"});
            return out;
        }

        if (depth >= kMaxExpansionDepth) {
            out.failure = FactorFailure{f, g.id(s.indicators.front()), {},
                                        "expansion depth cap reached"};
            return out;
        }

        // expansion: sum over a mediating auxiliary set W with
        // (T ⊥ M_S | C ∪ W), then recover P(W | C) recursively
        NodeSet cands = mediator_candidates(s.indicators, s.all);
        std::optional<FactorFailure> first_failure;
        int n = static_cast<int>(cands.size());
        for (int size = 1; size <= std::min(n, kMaxMediatorSize); ++size) {
            std::vector<int> pick(size);
            std::optional<FactorRecovery> done;
            std::function<void(int, int)> rec = [&](int start, int d) {
                if (done) return;
                if (d == size) {
                    NodeSet w;
                    for (int i = 0; i < size; ++i) w.push_back(cands[pick[i]]);
                    w = make_set(std::move(w));
                    if (!g.d_separated(s.targets, s.indicators, set_union(s.cond, w))) return;
                    auto attempt = try_expansion(f, s, w, depth);
                    if (attempt.recovered)
                        done = std::move(attempt);
                    else if (!first_failure && attempt.failure)
                        first_failure = attempt.failure;
                    return;
                }
                for (int i = start; i < n; ++i) {
                    pick[d] = i;
                    rec(i + 1, d + 1);
                }
            };
            rec(0, 0);
            if (done) return *done;
        }

        if (first_failure)
            out.failure = first_failure;
        else
            out.failure = FactorFailure{f, g.id(s.indicators.front()), {},
                                        "no auxiliary mediator set achieves the required "
                                        "conditional independence"};
        return out;
    }

    FactorRecovery try_expansion(const ExprPtr& f, const FactorScope& s, const NodeSet& w,
                                 int depth) const {
        FactorRecovery out;
        out.original = f;

        // inner factor P(W | C): same conditioning, targets replaced by W
        std::vector<VarTerm> w_terms;
        for (int v : w) w_terms.push_back({g.id(v), false});
        auto inner = std::make_shared<Expr>(*f);
        inner->targets = w_terms;
        inner->target_fixed.clear();

        // structural dead end: a mediator that causes an indicator of the
        // conditioning variables cannot be discharged, whatever we add
        FactorScope is = factor_scope(inner, g);
        {
            std::vector<std::pair<NodeId, NodeId>> dead;
            std::string note;
            for (int vv : w)
                for (int m : is.indicators)
                    if (g.has_edge(vv, m)) {
                        dead.push_back({g.id(vv), g.id(m)});
                        if (!note.empty()) note += "; ";
                        note += g.display(vv) + " is a parent of " + g.display(m);
                    }
            if (!dead.empty()) {
                out.failure =
                    FactorFailure{f, dead.front().second, std::move(dead), std::move(note)};
                return out;
            }
        }

        FactorRecovery inner_rec = recover_factor(inner, depth + 1);
        if (!inner_rec.recovered) {
            out.failure = inner_rec.failure;
            if (out.failure) out.failure->factor = f;
            return out;
        }

        // outer factor conditioned on W with its indicators discharged
        auto outer = std::make_shared<Expr>(*f);
        for (const auto& t : w_terms) outer->given.push_back(t);
        ExprPtr outer_m0 = with_m0(outer, g, s.indicators);
        out.steps.push_back(
            {outer_m0, indep_statement(g, s.targets, s.indicators, set_union(s.cond, w))});
        ExprPtr outer_done = strip_po(outer_m0);
        out.steps.push_back({outer_done, "(by consistency)"});
        for (const auto& st : inner_rec.steps) out.steps.push_back(st);

        std::vector<NodeId> sum_ids;
        for (int v : w) sum_ids.push_back(g.id(v));
        out.recovered =
            make_sum(sum_ids, make_product({outer_done, inner_rec.recovered}));
        return out;
    }
};

}  // namespace

RecoverabilityReport recover_estimand(const ExprPtr& e, const MDag& g) {
    // the input must be an identified estimand over V_o ∪ V_m
    for (const auto& id : all_vars(e)) {
        int v = g.index(id);
        NodeRole r = g.role(v);
        if (r != NodeRole::Observed && r != NodeRole::Partial)
            throw NotIdentifiedInput("estimand references " + g.display(v) +
                                     " which is not a substantive observable");
    }
    RecoverabilityReport report;
    Recoverer rec{g, is_closed(g).closed};
    for (const auto& f : leaf_factors(e)) {
        report.per_factor.push_back(rec.recover_factor(f, 0));
    }
    report.recoverable = !report.per_factor.empty();
    for (const auto& fr : report.per_factor)
        if (!fr.recovered) report.recoverable = false;
    if (!report.recoverable)
        report.strategy_note =
            "not recoverable by the implemented strategy set (direct conditioning, closed "
            "shortcut, auxiliary-mediator expansion up to depth 2); other factorizations are "
            "not searched";
    return report;
}

RecoverQueryResult recover_query(const MDag& g, const CausalQuery& q, IdentifyMethod method) {
    // restrict to the subgraph up to the latest time the query mentions
    int max_time = -1;
    auto bump = [&](const NodeId& id) {
        if (id.time) max_time = std::max(max_time, *id.time);
    };
    bump(q.outcome);
    for (const auto& [id, value] : q.interventions) bump(id);
    for (const auto& c : q.confounders) bump(c);

    RecoverQueryResult out{{},
                           std::nullopt,
                           max_time >= 0 ? g.restricted_to_time(max_time) : g};
    const MDag& sub = out.analysis_graph;
    out.identification =
        method == IdentifyMethod::Idc ? idc(sub, q) : backdoor_gformula(sub, q);
    if (out.identification.identifiable)
        out.recoverability = recover_estimand(out.identification.estimand, sub);
    return out;
}

std::vector<std::pair<ExprPtr, std::vector<NodeId>>> available_case_plan(
    const RecoverabilityReport& report, const MDag& g) {
    if (!report.recoverable)
        throw NotRecoverableInput("available-case plan requires a recoverable estimand");
    std::vector<std::pair<ExprPtr, std::vector<NodeId>>> out;
    for (const auto& fr : report.per_factor) {
        FactorScope s = factor_scope(fr.original, g);
        std::vector<NodeId> vars;
        for (int v : s.partials) vars.push_back(g.id(v));
        out.push_back({fr.recovered, std::move(vars)});
    }
    return out;
}

std::string format_recoverability_report(const RecoverabilityReport& r, const MDag& g) {
    (void)g;
    std::ostringstream os;
    os << (r.recoverable ? "RECOVERABLE" : "NOT RECOVERABLE") << "\n";
    if (!r.strategy_note.empty()) os << "note: " << r.strategy_note << "\n";
    for (const auto& fr : r.per_factor) {
        os << "\nfactor: " << pretty_print(fr.original) << "\n";
        for (const auto& st : fr.steps)
            os << "  = " << pretty_print(st.expr) << "\n        " << st.justification << "\n";
        if (fr.recovered && fr.steps.empty())
            os << "  (fully observed; no rewrite needed)\n";
        if (fr.failure) {
            os << "  FAILS: indicator " << var_display(fr.failure->indicator)
               << " cannot be discharged";
            if (!fr.failure->note.empty()) os << " because " << fr.failure->note;
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace mdag

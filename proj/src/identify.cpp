#include "mdag/identify.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace mdag {

// ---------------------------------------------------------------------------
// Admg

Admg Admg::project(const MDag& cdag) {
    Admg a;
    NodeSet latents = cdag.nodes_with_role(NodeRole::Latent);
    std::vector<char> latent(cdag.size(), 0);
    for (int v : latents) latent[v] = 1;

    std::vector<int> to_admg(cdag.size(), -1);
    for (int i = 0; i < cdag.size(); ++i) {
        if (latent[i]) continue;
        to_admg[i] = static_cast<int>(a.ids.size());
        a.ids.push_back(cdag.id(i));
    }
    a.pa.resize(a.n());
    a.ch.resize(a.n());
    a.sib.resize(a.n());
    a.topo_pos.resize(a.n());
    {
        int pos = 0;
        for (int v : cdag.topo_order())
            if (!latent[v]) a.topo_pos[to_admg[v]] = pos++;
    }

    // directed edges: observed → observed via latent-only directed paths
    for (int src = 0; src < cdag.size(); ++src) {
        if (latent[src]) continue;
        std::vector<char> seen(cdag.size(), 0);
        std::deque<int> work{src};
        seen[src] = 1;
        while (!work.empty()) {
            int v = work.front();
            work.pop_front();
            for (int c : cdag.children(v)) {
                if (seen[c]) continue;
                seen[c] = 1;
                if (latent[c]) {
                    work.push_back(c);
                } else if (c != src) {
                    a.pa[to_admg[c]].push_back(to_admg[src]);
                    a.ch[to_admg[src]].push_back(to_admg[c]);
                }
            }
        }
    }

    // bidirected edges: pairs of observed nodes reachable from one latent
    // source through latent-only directed paths
    for (int s = 0; s < cdag.size(); ++s) {
        if (!latent[s]) continue;
        std::vector<char> seen(cdag.size(), 0);
        std::deque<int> work{s};
        seen[s] = 1;
        std::vector<int> reached;
        while (!work.empty()) {
            int v = work.front();
            work.pop_front();
            for (int c : cdag.children(v)) {
                if (seen[c]) continue;
                seen[c] = 1;
                if (latent[c])
                    work.push_back(c);
                else
                    reached.push_back(to_admg[c]);
            }
        }
        for (size_t i = 0; i < reached.size(); ++i)
            for (size_t j = i + 1; j < reached.size(); ++j) {
                a.sib[reached[i]].push_back(reached[j]);
                a.sib[reached[j]].push_back(reached[i]);
            }
    }

    for (auto& s : a.pa) s = make_set(std::move(s));
    for (auto& s : a.ch) s = make_set(std::move(s));
    for (auto& s : a.sib) s = make_set(std::move(s));
    return a;
}

NodeSet Admg::all() const {
    NodeSet out(n());
    for (int i = 0; i < n(); ++i) out[i] = i;
    return out;
}

NodeSet Admg::ancestors(const NodeSet& s, const NodeSet& alive) const {
    return ancestors_cut(s, alive, {});
}

NodeSet Admg::ancestors_cut(const NodeSet& s, const NodeSet& alive,
                            const NodeSet& cut_into) const {
    std::vector<char> in_alive(n(), 0), seen(n(), 0);
    for (int v : alive) in_alive[v] = 1;
    std::deque<int> work;
    for (int v : s)
        if (in_alive[v]) {
            seen[v] = 1;
            work.push_back(v);
        }
    while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        if (set_contains(cut_into, v)) continue;  // no edges enter a cut node
        for (int p : pa[v])
            if (in_alive[p] && !seen[p]) {
                seen[p] = 1;
                work.push_back(p);
            }
    }
    NodeSet out;
    for (int i = 0; i < n(); ++i)
        if (seen[i]) out.push_back(i);
    return out;
}

std::vector<NodeSet> Admg::districts(const NodeSet& within) const {
    std::vector<char> in(n(), 0), seen(n(), 0);
    for (int v : within) in[v] = 1;
    std::vector<NodeSet> out;
    for (int v : within) {
        if (seen[v]) continue;
        NodeSet comp;
        std::deque<int> work{v};
        seen[v] = 1;
        while (!work.empty()) {
            int u = work.front();
            work.pop_front();
            comp.push_back(u);
            for (int w : sib[u])
                if (in[w] && !seen[w]) {
                    seen[w] = 1;
                    work.push_back(w);
                }
        }
        out.push_back(make_set(std::move(comp)));
    }
    std::sort(out.begin(), out.end());
    return out;
}

NodeSet Admg::topo_sorted(NodeSet s) const {
    std::sort(s.begin(), s.end(), [&](int a, int b) { return topo_pos[a] < topo_pos[b]; });
    return s;
}

// ---------------------------------------------------------------------------
// ID recursion

namespace {

struct HedgeFail {
    NodeSet component, subcomponent;
};

// The distribution parameter of the recursion: either the observational
// joint itself (conditionals can be written directly against it) or a
// derived expression over `scope`.
struct Dist {
    bool atomic = true;
    ExprPtr expr;
    NodeSet scope;
};

struct IdEngine {
    const Admg& g;

    std::vector<NodeId> ids_of(const NodeSet& s) const {
        std::vector<NodeId> out;
        out.reserve(s.size());
        for (int v : s) out.push_back(g.ids[v]);
        return out;
    }

    std::vector<VarTerm> terms_of(const NodeSet& s) const {
        std::vector<VarTerm> out;
        out.reserve(s.size());
        for (int v : s) out.push_back({g.ids[v], false});
        return out;
    }

    // variables of `sum_set` ordered by topological position for output
    std::vector<NodeId> sum_ids(const NodeSet& s) const { return ids_of(g.topo_sorted(s)); }

    ExprPtr marginal_expr(const Dist& p, const NodeSet& keep) const {
        if (p.atomic) return make_marginal(terms_of(g.topo_sorted(keep)));
        return make_sum(sum_ids(set_minus(p.scope, keep)), p.expr);
    }

    Dist marginal_dist(const Dist& p, const NodeSet& keep) const {
        if (p.atomic) return Dist{true, nullptr, keep};
        return Dist{false, marginal_expr(p, keep), keep};
    }

    ExprPtr conditional_expr(const Dist& p, int v, const NodeSet& pred) const {
        if (p.atomic)
            return make_conditional({{g.ids[v], false}}, terms_of(g.topo_sorted(pred)));
        NodeSet vp = set_union(pred, {v});
        ExprPtr num = make_sum(sum_ids(set_minus(p.scope, vp)), p.expr);
        if (pred.empty()) return num;
        ExprPtr den = make_sum(sum_ids(set_minus(p.scope, pred)), p.expr);
        return make_quotient(num, den);
    }

    // product over `s` of P(v | topological predecessors within `alive`),
    // outcome-side factors first (descending topological position)
    ExprPtr chain_product(const Dist& p, const NodeSet& s, const NodeSet& alive) const {
        NodeSet order = g.topo_sorted(s);
        std::vector<ExprPtr> factors;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int v = *it;
            NodeSet pred;
            for (int u : alive)
                if (g.topo_pos[u] < g.topo_pos[v]) pred.push_back(u);
            factors.push_back(conditional_expr(p, v, make_set(std::move(pred))));
        }
        return make_product(std::move(factors));
    }

    ExprPtr run(NodeSet y, NodeSet x, const Dist& p, const NodeSet& vertices) const {
        // 1: no interventions left
        if (x.empty()) return marginal_expr(p, y);

        // 2: restrict to ancestors of Y
        NodeSet an_y = g.ancestors(y, vertices);
        if (an_y != vertices)
            return run(y, set_intersect(x, an_y), marginal_dist(p, an_y), an_y);

        // 3: enlarge X with variables that cannot affect Y once X is held
        NodeSet an_y_cut = g.ancestors_cut(y, vertices, x);
        NodeSet w = set_minus(set_minus(vertices, x), an_y_cut);
        if (!w.empty()) return run(y, set_union(x, w), p, vertices);

        // 4: factorize over the districts of G \ X
        std::vector<NodeSet> ds = g.districts(set_minus(vertices, x));
        if (ds.size() > 1) {
            // print outcome-side factors first
            std::sort(ds.begin(), ds.end(), [&](const NodeSet& a, const NodeSet& b) {
                int ma = 0, mb = 0;
                for (int v : a) ma = std::max(ma, g.topo_pos[v]);
                for (int v : b) mb = std::max(mb, g.topo_pos[v]);
                return ma > mb;
            });
            std::vector<ExprPtr> factors;
            for (const auto& d : ds) factors.push_back(run(d, set_minus(vertices, d), p, vertices));
            return make_sum(sum_ids(set_minus(vertices, set_union(y, x))),
                            make_product(std::move(factors)));
        }

        const NodeSet& s = ds.at(0);
        std::vector<NodeSet> cg = g.districts(vertices);

        // 5a: the single district spans the whole graph — a hedge
        if (cg.size() == 1 && cg[0] == vertices) throw HedgeFail{vertices, s};

        // 5b: S is itself a district of G
        for (const auto& d : cg)
            if (d == s)
                return make_sum(sum_ids(set_minus(s, y)), chain_product(p, s, vertices));

        // 5c: S sits strictly inside a district S'
        for (const auto& d : cg) {
            if (set_subset(s, d)) {
                Dist np{false, chain_product(p, d, vertices), d};
                return run(y, set_intersect(x, d), np, d);
            }
        }
        throw InvalidSpec("identification recursion reached an impossible state");
    }
};

std::string join_displays(const std::vector<NodeId>& ids) {
    std::string out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ", ";
        out += var_display(ids[i]);
    }
    return out;
}

void validate_query(const MDag& graph, const CausalQuery& q) {
    graph.index(q.outcome);
    std::vector<NodeId> seen;
    for (const auto& [id, value] : q.interventions) {
        graph.index(id);
        if (id == q.outcome) throw InvalidSpec("outcome cannot be intervened on");
        for (const auto& s : seen)
            if (s == id) throw InvalidSpec("duplicate intervention on " + id.token());
        seen.push_back(id);
    }
}

}  // namespace

ExprPtr annotate_potential_outcomes(const ExprPtr& e, const MDag& g) {
    auto is_partial = [&](const NodeId& id) {
        auto idx = g.find(id);
        return idx && g.role(*idx) == NodeRole::Partial;
    };
    std::function<ExprPtr(const ExprPtr&)> walk = [&](const ExprPtr& node) -> ExprPtr {
        auto out = std::make_shared<Expr>(*node);
        switch (node->kind) {
            case Expr::Kind::Conditional:
                for (auto& t : out->targets) t.po_m0 = is_partial(t.id);
                for (auto& t : out->target_fixed) t.po_m0 = is_partial(t.id);
                for (auto& t : out->given) t.po_m0 = is_partial(t.id);
                for (auto& t : out->given_fixed)
                    if (!t.is_m0) t.po_m0 = is_partial(t.id);
                break;
            case Expr::Kind::Product:
                out->factors.clear();
                for (const auto& f : node->factors) out->factors.push_back(walk(f));
                break;
            case Expr::Kind::SumOver: out->body = walk(node->body); break;
            case Expr::Kind::Quotient:
                out->num = walk(node->num);
                out->den = walk(node->den);
                break;
        }
        return out;
    };
    return walk(e);
}

IdentificationResult idc(const MDag& graph, const CausalQuery& q) {
    validate_query(graph, q);
    MDag cdag = graph.c_dag();
    Admg admg = Admg::project(cdag);

    auto admg_index = [&](const NodeId& id) {
        for (int i = 0; i < admg.n(); ++i)
            if (admg.ids[i] == id) return i;
        throw UnknownNode("node " + id.token() + " is latent or absent from the c-DAG");
    };

    NodeSet y{admg_index(q.outcome)};
    NodeSet x;
    for (const auto& [id, value] : q.interventions) x.push_back(admg_index(id));
    x = make_set(std::move(x));

    IdEngine engine{admg};
    IdentificationResult out;
    try {
        ExprPtr raw = engine.run(y, x, Dist{true, nullptr, admg.all()}, admg.all());
        std::vector<std::pair<NodeId, Value>> fixes;
        for (const auto& iv : q.interventions)
            if (iv.second) fixes.push_back({iv.first, *iv.second});
        // free variables beyond the outcome and the interventions are
        // phantom interventions picked up by the recursion; the estimand
        // does not depend on their values, so pin them to named reference
        // symbols
        for (const auto& id : free_vars(raw)) {
            if (id == q.outcome) continue;
            bool is_x = false;
            for (const auto& iv : q.interventions)
                if (iv.first == id) is_x = true;
            if (is_x) continue;
            std::string sym = var_display(id) + "*";
            fixes.push_back({id, sym});
            out.reference_values.push_back({id, sym});
        }
        ExprPtr dist = fix_variables(raw, fixes);
        dist = annotate_potential_outcomes(dist, graph);
        out.identifiable = true;
        out.estimand_distribution = dist;
        out.estimand = q.outcome_value
                           ? fix_variables(dist, {{q.outcome, *q.outcome_value}})
                           : dist;
    } catch (const HedgeFail& h) {
        out.identifiable = false;
        HedgeWitness w;
        w.component = engine.ids_of(h.component);
        w.subcomponent = engine.ids_of(h.subcomponent);
        w.description = "hedge: district {" + join_displays(w.component) +
                        "} has no proper root set for {" + join_displays(w.subcomponent) + "}";
        out.failure_witness = std::move(w);
    }
    return out;
}

IdentificationResult idc_conditional(const MDag& graph, const CausalQuery& q,
                                     const std::vector<NodeId>& conditioning) {
    validate_query(graph, q);
    MDag cdag = graph.c_dag();

    NodeSet y{cdag.index(q.outcome)};
    NodeSet x;
    for (const auto& [id, value] : q.interventions) x.push_back(cdag.index(id));
    x = make_set(std::move(x));
    NodeSet w = cdag.parse_set([&] {
        std::vector<std::string> tokens;
        for (const auto& id : conditioning) tokens.push_back(id.token());
        return tokens;
    }());

    // do-calculus rule 2: move W-variables whose observation is equivalent
    // to intervention into X, iterating to a fixpoint
    bool moved = true;
    while (moved) {
        moved = false;
        for (int cand : w) {
            // graph with edges into X removed and edges out of cand removed
            std::vector<NodeDecl> decls;
            std::vector<std::pair<NodeId, NodeId>> edges;
            for (int i = 0; i < cdag.size(); ++i) {
                NodeDecl d;
                d.id = cdag.id(i);
                d.role = cdag.role(i);
                decls.push_back(d);
            }
            for (int i = 0; i < cdag.size(); ++i)
                for (int c : cdag.children(i)) {
                    if (set_contains(x, c)) continue;  // edge into X
                    if (i == cand) continue;           // edge out of cand
                    edges.push_back({cdag.id(i), cdag.id(c)});
                }
            MDag cut = MDag::build(decls, edges);
            NodeSet rest = set_minus(w, {cand});
            NodeSet cond = set_union(set_union(x, rest),
                                     NodeSet{});  // condition on X ∪ W∖cand
            NodeSet yy, cc, zz;
            for (int v : y) yy.push_back(cut.index(cdag.id(v)));
            zz.push_back(cut.index(cdag.id(cand)));
            for (int v : cond) cc.push_back(cut.index(cdag.id(v)));
            if (cut.d_separated(make_set(std::move(yy)), make_set(std::move(zz)),
                                make_set(std::move(cc)))) {
                x = set_union(x, {cand});
                w = rest;
                moved = true;
                break;
            }
        }
    }

    CausalQuery joint_query = q;
    joint_query.interventions.clear();
    for (int v : x) {
        bool from_query = false;
        for (const auto& iv : q.interventions)
            if (iv.first == cdag.id(v)) {
                joint_query.interventions.push_back(iv);
                from_query = true;
            }
        if (!from_query)
            joint_query.interventions.push_back(
                {cdag.id(v), Value(cdag.id(v).display())});
    }

    // identify P(y, w_rest ; do(x)) and condition on the remaining w
    MDag sub = graph;  // same graph; idc() extracts the c-DAG again
    CausalQuery dist_query = joint_query;
    IdentificationResult joint = idc(sub, dist_query);
    if (!joint.identifiable) return joint;

    if (w.empty()) return joint;

    ExprPtr num = joint.estimand_distribution;
    std::vector<NodeId> out_vars{q.outcome};
    ExprPtr den = make_sum(out_vars, num);
    IdentificationResult out;
    out.identifiable = true;
    out.estimand_distribution = make_quotient(num, den);
    out.estimand = q.outcome_value ? fix_variables(out.estimand_distribution,
                                                   {{q.outcome, *q.outcome_value}})
                                   : out.estimand_distribution;
    return out;
}

// ---------------------------------------------------------------------------
// back-door g-formula

namespace {

struct TimeSlice {
    int time = 0;
    std::vector<NodeId> confounders;  // ordered within the slice
    std::optional<NodeId> treatment;
    std::optional<NodeId> prior_outcome;
};

}  // namespace

IdentificationResult backdoor_gformula(const MDag& graph, const CausalQuery& q) {
    validate_query(graph, q);
    if (q.interventions.empty()) throw InvalidSpec("back-door factorization needs interventions");
    MDag cdag = graph.c_dag();

    cdag.index(q.outcome);
    int outcome_time = q.outcome.time.value_or(0);

    // assemble slices: baseline = untimed or pre-first-intervention
    std::vector<std::pair<NodeId, std::optional<Value>>> ivs = q.interventions;
    std::sort(ivs.begin(), ivs.end(), [](const auto& a, const auto& b) {
        return a.first.time.value_or(0) < b.first.time.value_or(0);
    });
    int first_time = ivs.front().first.time.value_or(0);

    std::vector<NodeId> confs = q.confounders;
    // prior outcomes join the adjustment history automatically
    for (int i = 0; i < cdag.size(); ++i) {
        const NodeId& id = cdag.id(i);
        if (id.name == q.outcome.name && id.time && *id.time < outcome_time) {
            bool already = false;
            for (const auto& c : confs)
                if (c == id) already = true;
            if (!already) confs.push_back(id);
        }
    }
    for (const auto& c : confs) cdag.index(c);  // existence check

    std::map<int, TimeSlice> slices;
    std::vector<NodeId> baseline;
    for (const auto& c : confs) {
        if (!c.time || *c.time < first_time) {
            if (c.name == q.outcome.name && c.time)
                slices[*c.time].prior_outcome = c;  // pre-treatment outcome, e.g. VL_0
            else
                baseline.push_back(c);
        } else if (c.name == q.outcome.name) {
            slices[*c.time].prior_outcome = c;
        } else {
            slices[*c.time].confounders.push_back(c);
        }
    }
    for (const auto& [id, value] : ivs) slices[id.time.value_or(0)].treatment = id;
    for (auto& [t, s] : slices) s.time = t;

    // move pre-treatment outcomes into the baseline block (they precede the
    // first treatment, so they belong to L_0's joint)
    for (auto& [t, s] : slices)
        if (t < first_time && s.prior_outcome) {
            baseline.push_back(*s.prior_outcome);
            s.prior_outcome.reset();
        }
    std::erase_if(slices, [&](const auto& kv) {
        const TimeSlice& s = kv.second;
        return !s.treatment && s.confounders.empty() && !s.prior_outcome;
    });

    // --- sequential back-door verification (Pearl–Robins) ---
    // for each treatment time s: in the graph with edges out of A_s removed
    // and edges into later treatments removed, the outcome must be
    // d-separated from A_s by the history up to s
    for (size_t k = 0; k < ivs.size(); ++k) {
        const NodeId& a_s = ivs[k].first;
        int s_time = a_s.time.value_or(0);
        std::vector<NodeDecl> decls;
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (int i = 0; i < cdag.size(); ++i) {
            NodeDecl d;
            d.id = cdag.id(i);
            d.role = cdag.role(i);
            decls.push_back(d);
        }
        NodeSet later;
        for (size_t j = k + 1; j < ivs.size(); ++j) later.push_back(cdag.index(ivs[j].first));
        later = make_set(std::move(later));
        int a_idx = cdag.index(a_s);
        for (int i = 0; i < cdag.size(); ++i)
            for (int c : cdag.children(i)) {
                if (i == a_idx) continue;               // edge out of A_s
                if (set_contains(later, c)) continue;   // edge into future treatment
                edges.push_back({cdag.id(i), cdag.id(c)});
            }
        MDag cut = MDag::build(decls, edges);

        NodeSet hist;
        for (const auto& b : baseline) hist.push_back(cut.index(b));
        for (const auto& [t, sl] : slices) {
            if (t <= s_time)
                for (const auto& c : sl.confounders) hist.push_back(cut.index(c));
            if (t < s_time && sl.prior_outcome) hist.push_back(cut.index(*sl.prior_outcome));
        }
        for (size_t j = 0; j < k; ++j) hist.push_back(cut.index(ivs[j].first));
        hist = make_set(std::move(hist));

        NodeSet yy{cut.index(q.outcome)}, aa{cut.index(a_s)};
        if (auto path = cut.find_active_path(aa, yy, hist)) {
            std::string desc = "open back-door path for " + var_display(a_s) + ":";
            for (int v : *path) desc += " " + cut.display(v);
            throw BackdoorBlockedViolation(desc);
        }
    }

    // --- expression assembly (exact chain-rule factorization) ---
    auto term = [](const NodeId& id) { return VarTerm{id, false}; };

    std::vector<ExprPtr> factors;  // assembled outcome-side first
    std::vector<NodeId> history;   // grows in temporal order
    std::vector<std::pair<NodeId, std::optional<Value>>> treatments_so_far;

    auto conditional_on_history = [&](const NodeId& target,
                                      const std::vector<NodeId>& within_slice) {
        std::vector<VarTerm> given;
        std::vector<FixedTerm> given_fixed;
        for (const auto& [id, value] : treatments_so_far) {
            if (value)
                given_fixed.push_back({id, *value, false, false});
            else
                given.push_back(term(id));
        }
        for (const auto& h : history) given.push_back(term(h));
        for (const auto& w : within_slice) given.push_back(term(w));
        return make_conditional({term(target)}, std::move(given), std::move(given_fixed));
    };

    std::vector<ExprPtr> reverse_factors;
    if (!baseline.empty()) {
        std::vector<VarTerm> base_terms;
        for (const auto& b : baseline) base_terms.push_back(term(b));
        reverse_factors.push_back(make_marginal(std::move(base_terms)));
        history.insert(history.end(), baseline.begin(), baseline.end());
    }

    for (const auto& [t, sl] : slices) {
        std::vector<NodeId> within;
        for (const auto& c : sl.confounders) {
            reverse_factors.push_back(conditional_on_history(c, within));
            within.push_back(c);
        }
        if (sl.treatment) {
            for (const auto& iv : ivs)
                if (iv.first == *sl.treatment) treatments_so_far.push_back(iv);
            // within-slice confounders precede the treatment in the history
        }
        if (sl.prior_outcome)
            reverse_factors.push_back(conditional_on_history(*sl.prior_outcome, within));
        history.insert(history.end(), within.begin(), within.end());
        if (sl.prior_outcome) history.push_back(*sl.prior_outcome);
    }

    // outcome factor
    {
        std::vector<VarTerm> given;
        std::vector<FixedTerm> given_fixed;
        for (const auto& [id, value] : treatments_so_far) {
            if (value)
                given_fixed.push_back({id, *value, false, false});
            else
                given.push_back(term(id));
        }
        for (const auto& h : history) given.push_back(term(h));
        reverse_factors.push_back(make_conditional({term(q.outcome)}, std::move(given),
                                                   std::move(given_fixed)));
    }

    factors.assign(reverse_factors.rbegin(), reverse_factors.rend());
    ExprPtr body = make_product(std::move(factors));
    ExprPtr dist = make_sum(history, body);
    dist = annotate_potential_outcomes(dist, graph);

    IdentificationResult out;
    out.identifiable = true;
    out.estimand_distribution = dist;
    out.estimand = q.outcome_value
                       ? fix_variables(dist, {{q.outcome, *q.outcome_value}})
                       : dist;
    return out;
}

// ---------------------------------------------------------------------------
// minimal separating sets

std::vector<std::vector<NodeId>> minimal_separating_sets(const MDag& g,
                                                         const std::vector<NodeId>& x,
                                                         const std::vector<NodeId>& y) {
    NodeSet xs, ys;
    for (const auto& id : x) xs.push_back(g.index(id));
    for (const auto& id : y) ys.push_back(g.index(id));
    xs = make_set(std::move(xs));
    ys = make_set(std::move(ys));

    NodeSet xy = set_union(xs, ys);
    NodeSet candidates = set_minus(g.ancestors(xy), xy);
    if (candidates.size() > 22)
        throw InvalidSpec("separator enumeration capped at 22 candidate nodes");

    std::vector<NodeSet> found;
    std::vector<std::vector<NodeId>> out;
    int n = static_cast<int>(candidates.size());
    for (int size = 0; size <= n; ++size) {
        // lexicographic subsets of the given size
        std::vector<int> pick(size);
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == size) {
                NodeSet z;
                for (int i = 0; i < size; ++i) z.push_back(candidates[pick[i]]);
                z = make_set(std::move(z));
                for (const auto& f : found)
                    if (set_subset(f, z)) return;  // a smaller separator inside
                if (g.d_separated(xs, ys, z)) {
                    found.push_back(z);
                    std::vector<NodeId> ids;
                    for (int v : z) ids.push_back(g.id(v));
                    out.push_back(std::move(ids));
                }
                return;
            }
            for (int i = start; i < n; ++i) {
                pick[depth] = i;
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);
    }
    return out;
}

std::vector<std::vector<NodeId>> minimal_adjustment_sets(const MDag& graph,
                                                         const CausalQuery& q) {
    std::vector<NodeId> x;
    for (const auto& [id, value] : q.interventions) x.push_back(id);
    return minimal_separating_sets(graph, x, {q.outcome});
}

// ---------------------------------------------------------------------------
// query JSON

CausalQuery query_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidSpec(std::string("query JSON parse error: ") + e.what());
    }
    CausalQuery q;
    q.outcome = NodeId::parse(j.at("outcome").at("var").get<std::string>());
    if (j.at("outcome").contains("value")) {
        const auto& v = j.at("outcome").at("value");
        q.outcome_value = v.is_number() ? Value(v.get<double>()) : Value(v.get<std::string>());
    }
    for (const auto& iv : j.at("interventions")) {
        NodeId id = NodeId::parse(iv.at("var").get<std::string>());
        std::optional<Value> val;
        if (iv.contains("value")) {
            const auto& v = iv.at("value");
            val = v.is_number() ? Value(v.get<double>()) : Value(v.get<std::string>());
        }
        q.interventions.push_back({id, val});
    }
    if (j.contains("confounders"))
        for (const auto& c : j.at("confounders"))
            q.confounders.push_back(NodeId::parse(c.get<std::string>()));
    return q;
}

std::string query_to_json(const CausalQuery& q) {
    nlohmann::json j;
    j["outcome"]["var"] = q.outcome.token();
    if (q.outcome_value) {
        if (std::holds_alternative<double>(*q.outcome_value))
            j["outcome"]["value"] = std::get<double>(*q.outcome_value);
        else
            j["outcome"]["value"] = std::get<std::string>(*q.outcome_value);
    }
    j["interventions"] = nlohmann::json::array();
    for (const auto& [id, value] : q.interventions) {
        nlohmann::json o;
        o["var"] = id.token();
        if (value) {
            if (std::holds_alternative<double>(*value))
                o["value"] = std::get<double>(*value);
            else
                o["value"] = std::get<std::string>(*value);
        }
        j["interventions"].push_back(std::move(o));
    }
    if (!q.confounders.empty()) {
        j["confounders"] = nlohmann::json::array();
        for (const auto& c : q.confounders) j["confounders"].push_back(c.token());
    }
    return j.dump(2);
}

CausalQuery load_query_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open query file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return query_from_json(ss.str());
}

}  // namespace mdag

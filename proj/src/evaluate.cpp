#include "mdag/evaluate.hpp"

#include <algorithm>

namespace mdag {

namespace {

template <typename T>
struct Evaluator {
    const DiscreteJointT<T>& joint;
    const SymbolEnv& env;
    bool strict;

    double bind(const Value& v) const {
        if (std::holds_alternative<double>(v)) return std::get<double>(v);
        const std::string& sym = std::get<std::string>(v);
        auto it = env.find(sym);
        if (it == env.end()) throw UnboundVariable("no binding for symbol '" + sym + "'");
        return it->second;
    }

    FactorT<T> conditional(const Expr& e) const {
        const VarTable& vt = joint.table;
        std::vector<int> target_vars, given_vars, fixed_vars;
        std::vector<std::pair<int, int>> fixes;  // (var, level)
        for (const auto& t : e.targets) target_vars.push_back(vt.index(t.id));
        for (const auto& t : e.target_fixed) {
            int v = vt.index(t.id);
            fixes.push_back({v, vt.level_of(v, bind(t.value))});
            target_vars.push_back(v);
        }
        for (const auto& g : e.given) given_vars.push_back(vt.index(g.id));
        for (const auto& g : e.given_fixed) {
            int v = vt.index(g.id);
            fixes.push_back({v, vt.level_of(v, bind(g.value))});
            fixed_vars.push_back(v);
        }
        target_vars = make_set(std::move(target_vars));
        given_vars = make_set(std::move(given_vars));
        fixed_vars = make_set(std::move(fixed_vars));

        std::vector<int> scope = set_union(set_union(target_vars, given_vars), fixed_vars);
        FactorT<T> num = factor_marginal_to(joint.probs, scope, vt);
        FactorT<T> den = factor_sum_out(num, target_vars, vt);
        for (const auto& [v, level] : fixes) {
            num = factor_restrict(num, v, level, vt);
            den = factor_restrict(den, v, level, vt);
        }
        // after the restrictions num spans free targets ∪ free given and den
        // spans free given, so the quotient has exactly the free variables
        return factor_divide(num, den, vt, strict);
    }

    FactorT<T> operator()(const ExprPtr& e) const {
        const VarTable& vt = joint.table;
        switch (e->kind) {
            case Expr::Kind::Conditional: return conditional(*e);
            case Expr::Kind::Product: {
                FactorT<T> acc = FactorT<T>::constant(T(1));
                for (const auto& f : e->factors) acc = factor_multiply(acc, (*this)(f), vt);
                return acc;
            }
            case Expr::Kind::SumOver: {
                FactorT<T> body = (*this)(e->body);
                std::vector<int> remove;
                for (const auto& v : e->sum_vars) remove.push_back(vt.index(v));
                return factor_sum_out(body, make_set(std::move(remove)), vt);
            }
            case Expr::Kind::Quotient:
                return factor_divide((*this)(e->num), (*this)(e->den), vt, strict);
        }
        throw InvalidSpec("unreachable expression kind");
    }
};

}  // namespace

template <typename T>
FactorT<T> evaluate(const ExprPtr& e, const DiscreteJointT<T>& j, const SymbolEnv& env,
                    bool strict) {
    Evaluator<T> ev{j, env, strict};
    return ev(e);
}

template FactorT<double> evaluate<double>(const ExprPtr&, const DiscreteJointT<double>&,
                                          const SymbolEnv&, bool);
template FactorT<Rat> evaluate<Rat>(const ExprPtr&, const DiscreteJointT<Rat>&, const SymbolEnv&,
                                    bool);

template <typename T>
FactorT<T> truncated_factorization(const DiscreteJointT<T>& j, const MDag& g,
                                   const std::vector<std::pair<NodeId, double>>& do_assignments) {
    const VarTable& vt = j.table;
    std::vector<int> do_vars;
    std::vector<std::pair<int, int>> do_levels;
    for (const auto& [id, value] : do_assignments) {
        if (!g.find(id)) throw UnknownNode("do() on unknown node " + id.token());
        int v = vt.index(id);
        do_vars.push_back(v);
        do_levels.push_back({v, vt.level_of(v, value)});
    }
    do_vars = make_set(std::move(do_vars));

    FactorT<T> acc = FactorT<T>::constant(T(1));
    for (int v = 0; v < vt.size(); ++v) {
        if (set_contains(do_vars, v)) continue;
        int node = g.index(vt.id(v));
        std::vector<int> parent_vars;
        for (int p : g.parents(node)) parent_vars.push_back(vt.index(g.id(p)));
        parent_vars = make_set(std::move(parent_vars));
        std::vector<int> scope = set_union(parent_vars, {v});
        FactorT<T> num = factor_marginal_to(j.probs, scope, vt);
        FactorT<T> den = factor_sum_out(num, {v}, vt);
        // zero-probability parent contexts never occur downstream: their
        // conditional cells are multiplied by zero mass, so divide leniently
        FactorT<T> cpt = factor_divide(num, den, vt, /*strict=*/false);
        acc = factor_multiply(acc, cpt, vt);
    }
    for (const auto& [v, level] : do_levels) acc = factor_restrict(acc, v, level, vt);
    return acc;
}

template FactorT<double> truncated_factorization<double>(
    const DiscreteJointT<double>&, const MDag&, const std::vector<std::pair<NodeId, double>>&);
template FactorT<Rat> truncated_factorization<Rat>(const DiscreteJointT<Rat>&, const MDag&,
                                                   const std::vector<std::pair<NodeId, double>>&);

template <typename T>
DiscreteJointT<T> joint_marginal(const DiscreteJointT<T>& j, const std::vector<NodeId>& keep) {
    std::vector<int> keep_vars;
    for (const auto& id : keep) keep_vars.push_back(j.table.index(id));
    keep_vars = make_set(std::move(keep_vars));
    DiscreteJointT<T> out;
    std::vector<int> remap(j.table.size(), -1);
    for (int v : keep_vars)
        remap[v] = out.table.add(j.table.id(v), j.table.domain(v));
    FactorT<T> marg = factor_marginal_to(j.probs, keep_vars, j.table);
    out.probs.vars.resize(keep_vars.size());
    for (size_t i = 0; i < keep_vars.size(); ++i) out.probs.vars[i] = remap[keep_vars[i]];
    out.probs.values = std::move(marg.values);
    return out;
}

template DiscreteJointT<double> joint_marginal<double>(const DiscreteJointT<double>&,
                                                       const std::vector<NodeId>&);
template DiscreteJointT<Rat> joint_marginal<Rat>(const DiscreteJointT<Rat>&,
                                                 const std::vector<NodeId>&);

}  // namespace mdag

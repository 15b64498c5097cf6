#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mdag/errors.hpp"
#include "mdag/node.hpp"
#include "mdag/rational.hpp"

namespace mdag {

// Variable metadata shared by all factors of one evaluation: identifiers,
// level values, cardinalities. Factors reference variables by index here.
class VarTable {
public:
    int add(const NodeId& id, std::vector<double> levels) {
        ids_.push_back(id);
        domains_.push_back(std::move(levels));
        return static_cast<int>(ids_.size()) - 1;
    }

    int size() const { return static_cast<int>(ids_.size()); }
    const NodeId& id(int v) const { return ids_[v]; }
    int card(int v) const { return static_cast<int>(domains_[v].size()); }
    const std::vector<double>& domain(int v) const { return domains_[v]; }

    int index(const NodeId& id) const {
        for (int i = 0; i < size(); ++i)
            if (ids_[i] == id) return i;
        throw UnboundVariable("variable " + id.token() + " not present in the joint");
    }
    bool has(const NodeId& id) const {
        for (int i = 0; i < size(); ++i)
            if (ids_[i] == id) return true;
        return false;
    }

    // Maps a concrete value to its level index; conditioning on a value
    // outside the domain is an impossible event.
    int level_of(int v, double value) const {
        const auto& dom = domains_[v];
        for (size_t k = 0; k < dom.size(); ++k)
            if (std::abs(dom[k] - value) < 1e-9) return static_cast<int>(k);
        throw PositivityViolation("value " + std::to_string(value) + " not in the domain of " +
                                  ids_[v].token());
    }

private:
    std::vector<NodeId> ids_;
    std::vector<std::vector<double>> domains_;
};

// Dense table over a sorted subset of VarTable variables, last variable
// fastest. T is double or Rat.
template <typename T>
struct FactorT {
    std::vector<int> vars;  // ascending
    std::vector<T> values;

    static size_t table_size(const std::vector<int>& vars, const VarTable& vt) {
        size_t n = 1;
        for (int v : vars) n *= static_cast<size_t>(vt.card(v));
        return n;
    }

    static FactorT constant(T value) { return FactorT{{}, {value}}; }
};

using Factor = FactorT<double>;

namespace factor_detail {

// Odometer over the assignment of `vars`; returns false when wrapped.
inline bool advance(std::vector<int>& asg, const std::vector<int>& vars, const VarTable& vt) {
    for (int i = static_cast<int>(vars.size()) - 1; i >= 0; --i) {
        if (++asg[i] < vt.card(vars[i])) return true;
        asg[i] = 0;
    }
    return false;
}

// Positions of `sub` inside `sup` (both ascending, sub ⊆ sup).
inline std::vector<int> positions(const std::vector<int>& sub, const std::vector<int>& sup) {
    std::vector<int> pos(sub.size());
    size_t j = 0;
    for (size_t i = 0; i < sub.size(); ++i) {
        while (j < sup.size() && sup[j] != sub[i]) ++j;
        pos[i] = static_cast<int>(j);
    }
    return pos;
}

inline size_t flat_index(const std::vector<int>& asg_positions, const std::vector<int>& vars,
                         const std::vector<int>& asg, const VarTable& vt) {
    size_t idx = 0;
    for (size_t i = 0; i < vars.size(); ++i)
        idx = idx * static_cast<size_t>(vt.card(vars[i])) +
              static_cast<size_t>(asg[asg_positions[i]]);
    return idx;
}

}  // namespace factor_detail

template <typename T>
FactorT<T> factor_multiply(const FactorT<T>& a, const FactorT<T>& b, const VarTable& vt) {
    std::vector<int> vars;
    std::set_union(a.vars.begin(), a.vars.end(), b.vars.begin(), b.vars.end(),
                   std::back_inserter(vars));
    FactorT<T> out;
    out.vars = vars;
    out.values.resize(FactorT<T>::table_size(vars, vt));
    auto pa = factor_detail::positions(a.vars, vars);
    auto pb = factor_detail::positions(b.vars, vars);
    std::vector<int> asg(vars.size(), 0);
    size_t i = 0;
    do {
        out.values[i++] = a.values[factor_detail::flat_index(pa, a.vars, asg, vt)] *
                          b.values[factor_detail::flat_index(pb, b.vars, asg, vt)];
    } while (factor_detail::advance(asg, vars, vt));
    return out;
}

template <typename T>
FactorT<T> factor_sum_out(const FactorT<T>& f, const std::vector<int>& remove,
                          const VarTable& vt) {
    std::vector<int> keep;
    std::set_difference(f.vars.begin(), f.vars.end(), remove.begin(), remove.end(),
                        std::back_inserter(keep));
    if (keep.size() == f.vars.size()) return f;
    FactorT<T> out;
    out.vars = keep;
    out.values.assign(FactorT<T>::table_size(keep, vt), T{});
    auto pk = factor_detail::positions(keep, f.vars);
    std::vector<int> asg(f.vars.size(), 0);
    size_t i = 0;
    do {
        out.values[factor_detail::flat_index(pk, keep, asg, vt)] += f.values[i++];
    } while (factor_detail::advance(asg, f.vars, vt));
    return out;
}

template <typename T>
FactorT<T> factor_marginal_to(const FactorT<T>& f, const std::vector<int>& keep,
                              const VarTable& vt) {
    std::vector<int> remove;
    std::set_difference(f.vars.begin(), f.vars.end(), keep.begin(), keep.end(),
                        std::back_inserter(remove));
    return factor_sum_out(f, remove, vt);
}

// Fixes one variable at a level and drops the dimension.
template <typename T>
FactorT<T> factor_restrict(const FactorT<T>& f, int var, int level, const VarTable& vt) {
    auto it = std::lower_bound(f.vars.begin(), f.vars.end(), var);
    if (it == f.vars.end() || *it != var) return f;
    FactorT<T> out;
    out.vars = f.vars;
    out.vars.erase(out.vars.begin() + (it - f.vars.begin()));
    out.values.resize(FactorT<T>::table_size(out.vars, vt));
    auto pk = factor_detail::positions(out.vars, f.vars);
    int var_pos = static_cast<int>(it - f.vars.begin());
    std::vector<int> asg(f.vars.size(), 0);
    asg[var_pos] = level;
    // iterate over the kept dims only
    std::vector<int> kept_positions;
    for (size_t i = 0; i < f.vars.size(); ++i)
        if (static_cast<int>(i) != var_pos) kept_positions.push_back(static_cast<int>(i));
    size_t n = out.values.size();
    std::vector<int> sub(out.vars.size(), 0);
    std::vector<int> identity(f.vars.size());
    std::iota(identity.begin(), identity.end(), 0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t k = 0; k < sub.size(); ++k) asg[kept_positions[k]] = sub[k];
        out.values[i] = f.values[factor_detail::flat_index(identity, f.vars, asg, vt)];
        factor_detail::advance(sub, out.vars, vt);
    }
    return out;
}

// Pointwise division with broadcasting (den.vars ⊆ num.vars not required).
// 0/0 yields 0 when strict is false and throws PositivityViolation when
// strict; x/0 with x ≠ 0 always throws.
template <typename T>
FactorT<T> factor_divide(const FactorT<T>& num, const FactorT<T>& den, const VarTable& vt,
                         bool strict) {
    std::vector<int> vars;
    std::set_union(num.vars.begin(), num.vars.end(), den.vars.begin(), den.vars.end(),
                   std::back_inserter(vars));
    FactorT<T> out;
    out.vars = vars;
    out.values.resize(FactorT<T>::table_size(vars, vt));
    auto pn = factor_detail::positions(num.vars, vars);
    auto pd = factor_detail::positions(den.vars, vars);
    std::vector<int> asg(vars.size(), 0);
    size_t i = 0;
    do {
        T n = num.values[factor_detail::flat_index(pn, num.vars, asg, vt)];
        T d = den.values[factor_detail::flat_index(pd, den.vars, asg, vt)];
        if (scalar_is_zero(d)) {
            if (!scalar_is_zero(n))
                throw PositivityViolation("conditioning event has probability zero");
            if (strict)
                throw PositivityViolation("0/0 cell while conditioning (positivity violated)");
            out.values[i++] = T{};
        } else {
            out.values[i++] = n / d;
        }
    } while (factor_detail::advance(asg, vars, vt));
    return out;
}

template <typename T>
T factor_total(const FactorT<T>& f) {
    T acc{};
    for (const auto& v : f.values) acc += v;
    return acc;
}

// Rectangular finite joint distribution: the evaluation oracle substrate.
template <typename T>
struct DiscreteJointT {
    VarTable table;
    FactorT<T> probs;  // over all variables of `table`

    void validate() const;
};

template <typename T>
void DiscreteJointT<T>::validate() const {
    std::vector<int> expect(static_cast<size_t>(table.size()));
    std::iota(expect.begin(), expect.end(), 0);
    if (probs.vars != expect) throw InvalidSpec("joint must span all variables");
    if (probs.values.size() != FactorT<T>::table_size(probs.vars, table))
        throw InvalidSpec("joint table size mismatch");
    if constexpr (std::is_same_v<T, double>) {
        double total = 0.0;
        for (double v : probs.values) {
            if (v < 0) throw InvalidSpec("negative probability in joint");
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw InvalidSpec("joint probabilities sum to " + std::to_string(total));
    } else {
        T total{};
        for (const auto& v : probs.values) total += v;
        if (total != T(1)) throw InvalidSpec("rational joint does not sum to 1");
    }
}

using DiscreteJoint = DiscreteJointT<double>;

}  // namespace mdag

#include "mdag/taxonomy.hpp"

#include <sstream>

namespace mdag {

namespace {

bool mnar_grade(const MDag& g, int parent) {
    switch (g.role(parent)) {
        case NodeRole::Partial:
        case NodeRole::Latent: return true;
        case NodeRole::Auxiliary: return g.aux_latent(parent);
        default: return false;
    }
}

NodeSet substantive_nodes(const MDag& g) {
    return set_union(set_union(g.nodes_with_role(NodeRole::Observed),
                               g.nodes_with_role(NodeRole::Partial)),
                     g.nodes_with_role(NodeRole::Latent));
}

}  // namespace

MechanismClass classify_mechanism(const MDag& g) {
    MechanismClass out;
    std::vector<std::pair<int, int>> mar_pairs, mnar_pairs;
    for (int m : g.nodes_with_role(NodeRole::Missingness)) {
        for (int p : g.parents(m)) {
            if (g.role(p) == NodeRole::Missingness) continue;
            if (mnar_grade(g, p))
                mnar_pairs.push_back({m, p});
            else
                mar_pairs.push_back({m, p});
        }
    }
    if (!mnar_pairs.empty()) {
        out.mechanism = Mechanism::MNAR;
        out.evidence = std::move(mnar_pairs);
    } else if (!mar_pairs.empty()) {
        out.mechanism = Mechanism::MAR;
        out.evidence = std::move(mar_pairs);
    } else {
        out.mechanism = Mechanism::MCAR;
    }
    return out;
}

ClosednessReport is_closed(const MDag& g) {
    ClosednessReport out;
    NodeSet v_block = substantive_nodes(g);
    NodeSet m_block = g.nodes_with_role(NodeRole::Missingness);
    if (v_block.empty() || m_block.empty()) return out;  // vacuously closed
    auto path = g.skeleton_path(v_block, m_block);
    if (path) {
        out.closed = false;
        out.witness_path = std::move(path);
    }
    return out;
}

bool closed_implies_independence_check(const MDag& g) {
    if (!is_closed(g).closed)
        throw NotClosed("mechanism is not closed; the corollary does not apply");
    NodeSet empty;
    for (int v : substantive_nodes(g))
        for (int m : g.nodes_with_role(NodeRole::Missingness))
            if (!g.d_separated({v}, {m}, empty)) return false;
    return true;
}

std::string format_mechanism_report(const MDag& g, const MechanismClass& mc,
                                    const ClosednessReport& cr) {
    std::ostringstream os;
    os << "mechanism: " << mechanism_name(mc.mechanism) << "\n";
    if (!mc.evidence.empty()) {
        os << "evidence:\n";
        for (const auto& [m, p] : mc.evidence) {
            os << "  " << g.display(m) << " <- " << g.display(p) << "  ["
               << role_name(g.role(p));
            if (g.role(p) == NodeRole::Auxiliary && g.aux_latent(p)) os << ", unmeasured";
            os << "]\n";
        }
    }
    os << "closed: " << (cr.closed ? "yes" : "no") << "\n";
    if (cr.witness_path) {
        os << "witness:";
        for (size_t i = 0; i < cr.witness_path->size(); ++i)
            os << (i ? " -> " : " ") << g.display((*cr.witness_path)[i]);
        os << "\n";
    }
    return os.str();
}

}  // namespace mdag

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdag/node.hpp"

namespace mdag {

// One variable in an m-DAG. `aux_latent` marks auxiliary causes of
// missingness that are themselves unmeasured (e.g. technical issues); the
// flag matters for mechanism classification, not for d-separation.
struct NodeDecl {
    NodeId id;
    NodeRole role = NodeRole::Observed;
    bool aux_latent = false;
    std::optional<NodeId> target;  // missingness nodes: the partial variable indicated
};

using NodeSet = std::vector<int>;  // sorted node indices

// Immutable DAG over V_o ∪ V_m ∪ U ∪ M ∪ Z with per-node roles.
//
// Nodes are stored sorted by (time, name) so indices, topological order and
// every derived output are deterministic. All queries are const and safe to
// call concurrently.
class MDag {
public:
    static MDag build(std::vector<NodeDecl> nodes,
                      const std::vector<std::pair<NodeId, NodeId>>& edges);

    int size() const { return static_cast<int>(nodes_.size()); }

    int index(const NodeId& id) const;          // throws UnknownNode
    int index(const std::string& token) const;  // accepts "VL@36" tokens
    std::optional<int> find(const NodeId& id) const;

    const NodeId& id(int i) const { return nodes_[i].id; }
    NodeRole role(int i) const { return nodes_[i].role; }
    bool aux_latent(int i) const { return nodes_[i].aux_latent; }

    // Missingness wiring. indicator_of(v) is -1 when v has none.
    int target_of(int m_node) const { return nodes_[m_node].target_index; }
    int indicator_of(int v_node) const { return nodes_[v_node].indicator_index; }

    const NodeSet& parents(int i) const { return parents_[i]; }
    const NodeSet& children(int i) const { return children_[i]; }
    bool has_edge(int from, int to) const;

    const std::vector<int>& topo_order() const { return topo_order_; }
    int topo_pos(int i) const { return topo_pos_[i]; }

    // Display: missingness nodes render as M_{VL_36}-style when their
    // target is timed, matching the derivation output conventions.
    std::string display(int i) const;
    std::string token(int i) const { return nodes_[i].id.token(); }

    NodeSet nodes_with_role(NodeRole r) const;
    NodeSet all_nodes() const;

    // Ancestral closure of S including S itself.
    NodeSet ancestors(const NodeSet& s) const;
    NodeSet descendants(const NodeSet& s) const;

    // Reachability-based d-separation (linear in |E| per query).
    bool d_separated(const NodeSet& x, const NodeSet& y, const NodeSet& z) const;

    // One active (d-connecting) path from X to Y given Z, as a node
    // sequence; nullopt when d-separated. Used for violation witnesses.
    std::optional<std::vector<int>> find_active_path(const NodeSet& x, const NodeSet& y,
                                                     const NodeSet& z) const;

    // Shortest path in the undirected skeleton between two blocks;
    // deterministic tie-breaking by node index.
    std::optional<std::vector<int>> skeleton_path(const NodeSet& from, const NodeSet& to) const;

    // Districts of the latent projection onto nodes ∖ latent_set: observed
    // nodes joined whenever some latent-only trek connects them.
    std::vector<NodeSet> c_components(const NodeSet& latent_set) const;

    // Induced subgraph; missingness nodes whose target is dropped are
    // dropped as well so the result is still a valid m-DAG.
    MDag induced(const NodeSet& keep) const;

    // Substantive subgraph over V_o ∪ V_m ∪ U.
    MDag c_dag() const;

    // Nodes with time ≤ max_time plus all untimed nodes.
    MDag restricted_to_time(int max_time) const;

    NodeSet parse_set(const std::vector<std::string>& tokens) const;
    std::vector<std::string> tokens(const NodeSet& s) const;
    std::vector<std::string> displays(const NodeSet& s) const;

private:
    struct Node {
        NodeId id;
        NodeRole role;
        bool aux_latent = false;
        int target_index = -1;
        int indicator_index = -1;
    };

    std::vector<Node> nodes_;
    std::vector<NodeSet> parents_, children_;
    std::vector<int> topo_order_, topo_pos_;

    void check_nodes(const NodeSet& s) const;
};

// Set helpers used across the identification / recoverability code.
NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_minus(const NodeSet& a, const NodeSet& b);
NodeSet set_intersect(const NodeSet& a, const NodeSet& b);
bool set_contains(const NodeSet& s, int v);
bool set_subset(const NodeSet& a, const NodeSet& b);  // a ⊆ b
NodeSet make_set(std::vector<int> v);

// JSON graph file format:
//   {"nodes":[{"name":"VL","time":36,"role":"partial"},
//             {"name":"M_VL","time":36,"role":"missingness","target":"VL@36"},...],
//    "edges":[["EFV@36","VL@36"],...]}
MDag graph_from_json(const std::string& text);
std::string graph_to_json(const MDag& g);
MDag load_graph_file(const std::string& path);

}  // namespace mdag

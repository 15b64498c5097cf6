#include "mdag/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace mdag {

namespace {

bool is_substantive(NodeRole r) {
    return r == NodeRole::Observed || r == NodeRole::Partial || r == NodeRole::Latent;
}

}  // namespace

NodeSet make_set(std::vector<int> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

NodeSet set_minus(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

NodeSet set_intersect(const NodeSet& a, const NodeSet& b) {
    NodeSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool set_contains(const NodeSet& s, int v) {
    return std::binary_search(s.begin(), s.end(), v);
}

bool set_subset(const NodeSet& a, const NodeSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

MDag MDag::build(std::vector<NodeDecl> decls,
                 const std::vector<std::pair<NodeId, NodeId>>& edges) {
    std::sort(decls.begin(), decls.end(),
              [](const NodeDecl& a, const NodeDecl& b) { return a.id < b.id; });
    for (size_t i = 1; i < decls.size(); ++i) {
        if (decls[i].id == decls[i - 1].id)
            throw InvalidSpec("duplicate node " + decls[i].id.token());
    }

    MDag g;
    g.nodes_.reserve(decls.size());
    std::map<std::pair<int, std::string>, int> lookup;
    for (const auto& d : decls) {
        Node n;
        n.id = d.id;
        n.role = d.role;
        n.aux_latent = d.aux_latent;
        lookup[{d.id.time ? *d.id.time : -1, d.id.name}] = static_cast<int>(g.nodes_.size());
        g.nodes_.push_back(std::move(n));
    }
    g.parents_.resize(g.nodes_.size());
    g.children_.resize(g.nodes_.size());

    auto find_index = [&](const NodeId& id) -> int {
        auto it = lookup.find({id.time ? *id.time : -1, id.name});
        if (it == lookup.end()) throw UnknownNode("unknown node " + id.token());
        return it->second;
    };

    for (const auto& [from, to] : edges) {
        int f = find_index(from);
        int t = find_index(to);
        if (f == t) throw CycleDetected("self-loop on " + from.token());
        g.parents_[t].push_back(f);
        g.children_[f].push_back(t);
    }
    for (auto& p : g.parents_) p = make_set(std::move(p));
    for (auto& c : g.children_) c = make_set(std::move(c));

    // Kahn with a min-heap keeps the order deterministic: among ready nodes
    // the smallest (time, name) index goes first.
    {
        std::vector<int> indeg(g.size());
        for (int i = 0; i < g.size(); ++i) indeg[i] = static_cast<int>(g.parents_[i].size());
        std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
        for (int i = 0; i < g.size(); ++i)
            if (indeg[i] == 0) ready.push(i);
        while (!ready.empty()) {
            int v = ready.top();
            ready.pop();
            g.topo_order_.push_back(v);
            for (int c : g.children_[v])
                if (--indeg[c] == 0) ready.push(c);
        }
        if (static_cast<int>(g.topo_order_.size()) != g.size())
            throw CycleDetected("graph contains a directed cycle");
        g.topo_pos_.resize(g.size());
        for (int p = 0; p < g.size(); ++p) g.topo_pos_[g.topo_order_[p]] = p;
    }

    // Missingness wiring and the m-DAG structural constraints.
    for (size_t di = 0; di < decls.size(); ++di) {
        // after the sort decls[i] corresponds to nodes_[i]
        const NodeDecl& d = decls[di];
        int i = static_cast<int>(di);
        if (d.role == NodeRole::Missingness) {
            if (!d.target)
                throw OrphanIndicator("missingness node " + d.id.token() + " has no target");
            int t = find_index(*d.target);
            if (g.nodes_[t].role != NodeRole::Partial)
                throw OrphanIndicator("target of " + d.id.token() + " is not a partial node");
            if (g.nodes_[t].indicator_index != -1)
                throw OrphanIndicator("two indicators for " + g.nodes_[t].id.token());
            g.nodes_[i].target_index = t;
            g.nodes_[t].indicator_index = i;
        }
    }
    for (int i = 0; i < g.size(); ++i) {
        if (g.nodes_[i].role == NodeRole::Partial && g.nodes_[i].indicator_index == -1)
            throw OrphanIndicator("partial node " + g.nodes_[i].id.token() +
                                  " has no missingness indicator");
        if (g.nodes_[i].role == NodeRole::Missingness) {
            for (int c : g.children_[i])
                if (g.nodes_[c].role != NodeRole::Missingness)
                    throw IllegalMEdge("missingness node " + g.nodes_[i].id.token() +
                                       " is a parent of " + g.nodes_[c].id.token());
        }
    }
    return g;
}

int MDag::index(const NodeId& id) const {
    auto f = find(id);
    if (!f) throw UnknownNode("unknown node " + id.token());
    return *f;
}

int MDag::index(const std::string& token) const { return index(NodeId::parse(token)); }

std::optional<int> MDag::find(const NodeId& id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const Node& n, const NodeId& v) { return n.id < v; });
    if (it == nodes_.end() || !(it->id == id)) return std::nullopt;
    return static_cast<int>(it - nodes_.begin());
}

bool MDag::has_edge(int from, int to) const { return set_contains(parents_[to], from); }

std::string MDag::display(int i) const {
    const Node& n = nodes_[i];
    if (n.role == NodeRole::Missingness && n.target_index >= 0) {
        const NodeId& t = nodes_[n.target_index].id;
        if (t.time) return "M_{" + t.display() + "}";
        return "M_" + t.display();
    }
    return n.id.display();
}

NodeSet MDag::nodes_with_role(NodeRole r) const {
    NodeSet out;
    for (int i = 0; i < size(); ++i)
        if (nodes_[i].role == r) out.push_back(i);
    return out;
}

NodeSet MDag::all_nodes() const {
    NodeSet out(size());
    for (int i = 0; i < size(); ++i) out[i] = i;
    return out;
}

void MDag::check_nodes(const NodeSet& s) const {
    for (int v : s)
        if (v < 0 || v >= size()) throw UnknownNode("node index out of range");
}

NodeSet MDag::ancestors(const NodeSet& s) const {
    check_nodes(s);
    std::vector<char> seen(size(), 0);
    std::deque<int> work(s.begin(), s.end());
    for (int v : s) seen[v] = 1;
    while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        for (int p : parents_[v])
            if (!seen[p]) {
                seen[p] = 1;
                work.push_back(p);
            }
    }
    NodeSet out;
    for (int i = 0; i < size(); ++i)
        if (seen[i]) out.push_back(i);
    return out;
}

NodeSet MDag::descendants(const NodeSet& s) const {
    check_nodes(s);
    std::vector<char> seen(size(), 0);
    std::deque<int> work(s.begin(), s.end());
    for (int v : s) seen[v] = 1;
    while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        for (int c : children_[v])
            if (!seen[c]) {
                seen[c] = 1;
                work.push_back(c);
            }
    }
    NodeSet out;
    for (int i = 0; i < size(); ++i)
        if (seen[i]) out.push_back(i);
    return out;
}

// Reachability formulation of d-separation. States are (node, direction of
// approach); "up" means the trail arrives from a child, "down" from a
// parent. A collider may be crossed only when it is in An(Z).
bool MDag::d_separated(const NodeSet& x, const NodeSet& y, const NodeSet& z) const {
    return !find_active_path(x, y, z).has_value();
}

std::optional<std::vector<int>> MDag::find_active_path(const NodeSet& x, const NodeSet& y,
                                                       const NodeSet& z) const {
    check_nodes(x);
    check_nodes(y);
    check_nodes(z);

    std::vector<char> in_z(size(), 0), in_y(size(), 0);
    for (int v : z) in_z[v] = 1;
    for (int v : y) in_y[v] = 1;

    std::vector<char> anc_z(size(), 0);
    for (int v : ancestors(z)) anc_z[v] = 1;

    // state id = node * 2 + dir (0 = up, 1 = down); prev[state] for replay
    const int UP = 0, DOWN = 1;
    std::vector<int> prev(static_cast<size_t>(size()) * 2, -2);
    std::deque<int> work;

    auto push = [&](int node, int dir, int from_state) {
        int s = node * 2 + dir;
        if (prev[s] != -2) return;
        prev[s] = from_state;
        work.push_back(s);
    };

    for (int v : x) push(v, UP, -1);

    while (!work.empty()) {
        int s = work.front();
        work.pop_front();
        int v = s / 2;
        int dir = s % 2;

        if (in_y[v]) {
            std::vector<int> path;
            for (int cur = s; cur != -1; cur = prev[cur]) path.push_back(cur / 2);
            std::reverse(path.begin(), path.end());
            // drop repeated entries from the two directions of one node
            path.erase(std::unique(path.begin(), path.end()), path.end());
            return path;
        }

        if (dir == UP) {
            if (!in_z[v]) {
                for (int p : parents_[v]) push(p, UP, s);
                for (int c : children_[v]) push(c, DOWN, s);
            }
        } else {
            if (!in_z[v])
                for (int c : children_[v]) push(c, DOWN, s);
            if (anc_z[v])
                for (int p : parents_[v]) push(p, UP, s);
        }
    }
    return std::nullopt;
}

std::optional<std::vector<int>> MDag::skeleton_path(const NodeSet& from,
                                                    const NodeSet& to) const {
    check_nodes(from);
    check_nodes(to);
    std::vector<char> in_to(size(), 0);
    for (int v : to) in_to[v] = 1;
    std::vector<int> prev(size(), -2);
    std::deque<int> work;
    for (int v : from) {
        prev[v] = -1;
        work.push_back(v);
    }
    while (!work.empty()) {
        int v = work.front();
        work.pop_front();
        if (in_to[v]) {
            std::vector<int> path;
            for (int cur = v; cur != -1; cur = prev[cur]) path.push_back(cur);
            std::reverse(path.begin(), path.end());
            return path;
        }
        NodeSet nbrs = set_union(parents_[v], children_[v]);
        for (int n : nbrs)
            if (prev[n] == -2) {
                prev[n] = v;
                work.push_back(n);
            }
    }
    return std::nullopt;
}

std::vector<NodeSet> MDag::c_components(const NodeSet& latent_set) const {
    check_nodes(latent_set);
    std::vector<char> latent(size(), 0);
    for (int v : latent_set) latent[v] = 1;

    // union-find over kept nodes
    std::vector<int> uf(size());
    for (int i = 0; i < size(); ++i) uf[i] = i;
    std::function<int(int)> root = [&](int v) {
        while (uf[v] != v) v = uf[v] = uf[uf[v]];
        return v;
    };

    // Two kept nodes share a district iff some latent source reaches both
    // through latent-only directed paths.
    for (int s = 0; s < size(); ++s) {
        if (!latent[s]) continue;
        std::vector<char> seen(size(), 0);
        std::deque<int> work{s};
        seen[s] = 1;
        std::vector<int> reached;
        while (!work.empty()) {
            int v = work.front();
            work.pop_front();
            for (int c : children_[v]) {
                if (seen[c]) continue;
                seen[c] = 1;
                if (latent[c])
                    work.push_back(c);
                else
                    reached.push_back(c);
            }
        }
        for (size_t i = 1; i < reached.size(); ++i) uf[root(reached[0])] = root(reached[i]);
    }

    std::map<int, NodeSet> comps;
    for (int i = 0; i < size(); ++i)
        if (!latent[i]) comps[root(i)].push_back(i);
    std::vector<NodeSet> out;
    for (auto& [r, members] : comps) out.push_back(make_set(std::move(members)));
    std::sort(out.begin(), out.end());
    return out;
}

MDag MDag::induced(const NodeSet& keep) const {
    check_nodes(keep);
    std::vector<char> kept(size(), 0);
    for (int v : keep) kept[v] = 1;
    // drop indicators whose target is gone
    for (int v : keep)
        if (nodes_[v].role == NodeRole::Missingness && !kept[nodes_[v].target_index])
            kept[v] = 0;

    std::vector<NodeDecl> decls;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 0; i < size(); ++i) {
        if (!kept[i]) continue;
        NodeDecl d;
        d.id = nodes_[i].id;
        d.role = nodes_[i].role;
        d.aux_latent = nodes_[i].aux_latent;
        if (nodes_[i].target_index >= 0) d.target = nodes_[nodes_[i].target_index].id;
        decls.push_back(std::move(d));
        for (int c : children_[i])
            if (kept[c]) edges.push_back({nodes_[i].id, nodes_[c].id});
    }
    return build(std::move(decls), edges);
}

MDag MDag::c_dag() const {
    // partial variables are treated as observable in the substantive graph
    // (identification reasons about the no-missingness world)
    std::vector<NodeDecl> decls;
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::vector<char> kept(size(), 0);
    for (int i = 0; i < size(); ++i)
        if (is_substantive(nodes_[i].role)) kept[i] = 1;
    for (int i = 0; i < size(); ++i) {
        if (!kept[i]) continue;
        NodeDecl d;
        d.id = nodes_[i].id;
        d.role = nodes_[i].role == NodeRole::Latent ? NodeRole::Latent : NodeRole::Observed;
        decls.push_back(std::move(d));
        for (int c : children_[i])
            if (kept[c]) edges.push_back({nodes_[i].id, nodes_[c].id});
    }
    return build(std::move(decls), edges);
}

MDag MDag::restricted_to_time(int max_time) const {
    NodeSet keep;
    for (int i = 0; i < size(); ++i)
        if (!nodes_[i].id.time || *nodes_[i].id.time <= max_time) keep.push_back(i);
    return induced(keep);
}

NodeSet MDag::parse_set(const std::vector<std::string>& tokens) const {
    NodeSet out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(index(t));
    return make_set(std::move(out));
}

std::vector<std::string> MDag::tokens(const NodeSet& s) const {
    std::vector<std::string> out;
    out.reserve(s.size());
    for (int v : s) out.push_back(token(v));
    return out;
}

std::vector<std::string> MDag::displays(const NodeSet& s) const {
    std::vector<std::string> out;
    out.reserve(s.size());
    for (int v : s) out.push_back(display(v));
    return out;
}

MDag graph_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidSpec(std::string("graph JSON parse error: ") + e.what());
    }
    if (!j.contains("nodes") || !j.contains("edges"))
        throw InvalidSpec("graph JSON needs 'nodes' and 'edges'");

    std::vector<NodeDecl> decls;
    for (const auto& n : j.at("nodes")) {
        NodeDecl d;
        d.id.name = n.at("name").get<std::string>();
        if (n.contains("time") && !n.at("time").is_null()) d.id.time = n.at("time").get<int>();
        d.role = role_from_name(n.at("role").get<std::string>());
        if (n.contains("latent") && d.role == NodeRole::Auxiliary)
            d.aux_latent = n.at("latent").get<bool>();
        if (n.contains("target")) d.target = NodeId::parse(n.at("target").get<std::string>());
        decls.push_back(std::move(d));
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2) throw InvalidSpec("edge entries must be pairs");
        edges.push_back({NodeId::parse(e.at(0).get<std::string>()),
                         NodeId::parse(e.at(1).get<std::string>())});
    }
    return MDag::build(std::move(decls), edges);
}

std::string graph_to_json(const MDag& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (int i = 0; i < g.size(); ++i) {
        nlohmann::json n;
        n["name"] = g.id(i).name;
        if (g.id(i).time) n["time"] = *g.id(i).time;
        n["role"] = role_name(g.role(i));
        if (g.role(i) == NodeRole::Auxiliary && g.aux_latent(i)) n["latent"] = true;
        if (g.target_of(i) >= 0) n["target"] = g.token(g.target_of(i));
        nodes.push_back(std::move(n));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (int i = 0; i < g.size(); ++i)
        for (int c : g.children(i)) edges.push_back({g.token(i), g.token(c)});
    nlohmann::json j;
    j["nodes"] = std::move(nodes);
    j["edges"] = std::move(edges);
    return j.dump(2);
}

MDag load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open graph file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return graph_from_json(ss.str());
}

}  // namespace mdag

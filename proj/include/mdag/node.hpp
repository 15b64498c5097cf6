#pragma once

#include <optional>
#include <string>
#include <tuple>

#include "mdag/errors.hpp"

namespace mdag {

// A variable symbol, e.g. VL@36 (name "VL", time 36) or Age (untimed).
// The time field is display/wiring metadata only; graph algorithms never
// look at it.
struct NodeId {
    std::string name;
    std::optional<int> time;

    NodeId() = default;
    NodeId(std::string n) : name(std::move(n)) {}
    NodeId(std::string n, int t) : name(std::move(n)), time(t) {}

    // Canonical token used in files and CLI arguments: "VL@36" / "Age".
    std::string token() const {
        return time ? name + "@" + std::to_string(*time) : name;
    }

    // Human-readable rendering: "VL_36" / "Age".
    std::string display() const {
        return time ? name + "_" + std::to_string(*time) : name;
    }

    static NodeId parse(const std::string& token) {
        auto at = token.rfind('@');
        if (at == std::string::npos) return NodeId(token);
        std::string name = token.substr(0, at);
        std::string t = token.substr(at + 1);
        if (name.empty() || t.empty()) throw UnknownNode("bad node token '" + token + "'");
        try {
            int ti = std::stoi(t);
            if (ti < 0) throw UnknownNode("negative time in '" + token + "'");
            return NodeId(name, ti);
        } catch (const std::invalid_argument&) {
            throw UnknownNode("bad node token '" + token + "'");
        }
    }

    // Deterministic order: (time, name), untimed nodes first.
    std::tuple<int, const std::string&> sort_key() const {
        return {time ? *time : -1, name};
    }

    bool operator==(const NodeId& o) const { return name == o.name && time == o.time; }
    bool operator<(const NodeId& o) const { return sort_key() < o.sort_key(); }
};

enum class NodeRole { Observed, Partial, Latent, Missingness, Auxiliary };

inline const char* role_name(NodeRole r) {
    switch (r) {
        case NodeRole::Observed: return "observed";
        case NodeRole::Partial: return "partial";
        case NodeRole::Latent: return "latent";
        case NodeRole::Missingness: return "missingness";
        case NodeRole::Auxiliary: return "auxiliary";
    }
    return "?";
}

inline NodeRole role_from_name(const std::string& s) {
    if (s == "observed") return NodeRole::Observed;
    if (s == "partial") return NodeRole::Partial;
    if (s == "latent") return NodeRole::Latent;
    if (s == "missingness") return NodeRole::Missingness;
    if (s == "auxiliary") return NodeRole::Auxiliary;
    throw InvalidSpec("unknown role '" + s + "'");
}

}  // namespace mdag

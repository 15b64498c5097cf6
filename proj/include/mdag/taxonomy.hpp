#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdag/graph.hpp"

namespace mdag {

enum class Mechanism { MCAR, MAR, MNAR };

inline const char* mechanism_name(Mechanism m) {
    switch (m) {
        case Mechanism::MCAR: return "MCAR";
        case Mechanism::MAR: return "MAR";
        case Mechanism::MNAR: return "MNAR";
    }
    return "?";
}

// (indicator, offending parent) pairs justifying the class. For MAR these
// are the fully-observed causes of missingness; for MNAR the partial /
// latent / unmeasured-auxiliary ones.
struct MechanismClass {
    Mechanism mechanism = Mechanism::MCAR;
    std::vector<std::pair<int, int>> evidence;
};

struct ClosednessReport {
    bool closed = true;
    std::optional<std::vector<int>> witness_path;  // V ... M node sequence
};

// Structural missingness taxonomy. An indicator parent counts toward MNAR
// when it is partial, latent, or an unmeasured auxiliary variable; measured
// variables (fully observed or measured auxiliary) keep the mechanism MAR.
MechanismClass classify_mechanism(const MDag& g);

// Closed mechanism: no path in the skeleton between any substantive node
// (V_o ∪ V_m ∪ U) and any missingness indicator. When open, the shortest
// witness path from the substantive block to the indicator block is
// returned.
ClosednessReport is_closed(const MDag& g);

// Cross-check of the available-case corollary: under a closed mechanism
// every substantive variable is marginally d-separated from every
// indicator. Throws NotClosed if the mechanism is not closed.
bool closed_implies_independence_check(const MDag& g);

std::string format_mechanism_report(const MDag& g, const MechanismClass& mc,
                                    const ClosednessReport& cr);

}  // namespace mdag

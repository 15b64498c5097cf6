#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdag/formula.hpp"
#include "mdag/graph.hpp"
#include "mdag/rng.hpp"

namespace mdag {

enum class Family { Bernoulli, Multinomial, Normal, TruncatedNormalRedraw, Poisson, Deterministic };

const char* family_name(Family f);
Family family_from_name(const std::string& s);

// Truncation-with-redraw bounds: draws below `a` are replaced by
// U(a1, a2) draws, above `b` by U(b1, b2) draws.
struct TruncBounds {
    double a = 0, a1 = 0, a2 = 0, b = 0, b1 = 0, b2 = 0;
    void validate() const {
        if (!(a <= a1 && a1 <= a2)) throw InvalidSpec("truncation needs a <= a1 <= a2");
        if (!(b1 <= b2 && b2 <= b)) throw InvalidSpec("truncation needs b1 <= b2 <= b");
    }
};

struct NodeDistribution {
    NodeId id;
    Family family = Family::Deterministic;
    // Bernoulli: {p}; Normal/TruncatedNormalRedraw: {mu, sigma};
    // Poisson: {lambda}; Deterministic: {value};
    // Multinomial: {p1..pk} or {p1..p(k-1)} with implicit_last
    std::vector<Formula> params;
    TruncBounds trunc;
    bool implicit_last = false;   // multinomial: p_k = 1 - Σ p_i
    int categories = 0;           // multinomial: k; values are 1..k
};

// Declarative structural causal model: a companion m-DAG plus one
// distribution per node, in topological order. Formulas may reference only
// declared parents.
struct ScmSpec {
    std::string name;
    MDag graph;
    std::vector<NodeDistribution> nodes;  // topological order of `graph`

    void validate() const;
    const NodeDistribution& dist_of(const NodeId& id) const;
};

ScmSpec scm_from_json(const std::string& text);
std::string scm_to_json(const ScmSpec& spec);
ScmSpec load_scm_file(const std::string& path);

// Rectangular sample table with per-cell missingness.
struct Dataset {
    std::vector<NodeId> columns;
    std::vector<std::vector<double>> values;    // [column][row]
    std::vector<std::vector<uint8_t>> missing;  // empty vector = fully observed column
    size_t n = 0;

    // provenance
    uint64_t seed = 0;
    std::string graph_name;
    std::string scenario = "none";
    std::vector<std::pair<std::string, double>> interventions;
    std::map<std::string, int64_t> counters;  // clamp / redraw events

    int column_index(const NodeId& id) const;
    std::optional<int> find_column(const NodeId& id) const;
    bool is_missing(int col, size_t row) const {
        return !missing[col].empty() && missing[col][row];
    }
    size_t missing_count(int col) const;
};

// i.i.d. sample of n rows in topological order; bit-reproducible for a
// given (spec, n, seed, salt). Every column draws from its own named
// substream so scenarios and replications can share complete data.
Dataset sample(const ScmSpec& spec, size_t n, uint64_t seed, const std::string& salt = "");

// Interventional sampling: intervened nodes become constants, the
// missingness machinery (auxiliary and indicator columns) is skipped, and
// no values are masked. This is the counterfactual ground truth.
Dataset sample_interventional(const ScmSpec& spec,
                              const std::vector<std::pair<NodeId, double>>& do_assignments,
                              size_t n, uint64_t seed, const std::string& salt = "");

enum class Scenario { None, Sim1, Sim2 };
const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& s);

// Families masked per scenario: Sim1 masks VL and MEMS; Sim2 additionally
// Weight and EFV. Masking always follows the sampled indicator columns.
std::vector<std::string> masked_families(Scenario sc);

// Applies missingness flags to a dataset sampled from `spec`, using the
// dataset's indicator columns (re-sampling them from `seed` substreams if
// the dataset lacks them).
Dataset apply_missingness(const Dataset& d, const ScmSpec& spec, Scenario sc, uint64_t seed);

// CSV with NA cells plus a JSON sidecar (seed, scenario, interventions,
// counters). `path` names the CSV; the sidecar is path + ".meta.json".
void dataset_to_csv(const Dataset& d, const std::string& path);
Dataset dataset_from_csv(const std::string& path);

}  // namespace mdag

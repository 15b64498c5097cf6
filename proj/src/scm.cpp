#include "mdag/scm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace mdag {

const char* family_name(Family f) {
    switch (f) {
        case Family::Bernoulli: return "bernoulli";
        case Family::Multinomial: return "multinomial";
        case Family::Normal: return "normal";
        case Family::TruncatedNormalRedraw: return "truncated_normal_redraw";
        case Family::Poisson: return "poisson";
        case Family::Deterministic: return "deterministic";
    }
    return "?";
}

Family family_from_name(const std::string& s) {
    if (s == "bernoulli") return Family::Bernoulli;
    if (s == "multinomial") return Family::Multinomial;
    if (s == "normal") return Family::Normal;
    if (s == "truncated_normal_redraw") return Family::TruncatedNormalRedraw;
    if (s == "poisson") return Family::Poisson;
    if (s == "deterministic") return Family::Deterministic;
    throw InvalidSpec("unknown family '" + s + "'");
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::None: return "none";
        case Scenario::Sim1: return "sim1";
        case Scenario::Sim2: return "sim2";
    }
    return "?";
}

Scenario scenario_from_name(const std::string& s) {
    if (s == "none") return Scenario::None;
    if (s == "sim1" || s == "1") return Scenario::Sim1;
    if (s == "sim2" || s == "2") return Scenario::Sim2;
    throw InvalidSpec("unknown scenario '" + s + "'");
}

std::vector<std::string> masked_families(Scenario sc) {
    switch (sc) {
        case Scenario::None: return {};
        case Scenario::Sim1: return {"VL", "MEMS"};
        case Scenario::Sim2: return {"VL", "MEMS", "Weight", "EFV"};
    }
    return {};
}

void ScmSpec::validate() const {
    if (nodes.size() != static_cast<size_t>(graph.size()))
        throw InvalidSpec("spec must define a distribution for every graph node");
    std::vector<char> defined(graph.size(), 0);
    for (const auto& nd : nodes) {
        int v = graph.index(nd.id);
        // topological order requirement: parents defined before children
        for (int p : graph.parents(v))
            if (!defined[p])
                throw InvalidSpec("node " + nd.id.token() + " defined before its parent " +
                                  graph.id(p).token());
        defined[v] = 1;
        for (const auto& formula : nd.params)
            for (const auto& ref : formula.variables()) {
                int r = graph.index(ref);
                if (!graph.has_edge(r, v))
                    throw InvalidSpec("formula for " + nd.id.token() + " references " +
                                      ref.token() + " which is not a declared parent");
            }
        switch (nd.family) {
            case Family::Bernoulli:
            case Family::Poisson:
            case Family::Deterministic:
                if (nd.params.size() != 1)
                    throw InvalidSpec(nd.id.token() + ": family needs exactly one parameter");
                break;
            case Family::Normal:
                if (nd.params.size() != 2)
                    throw InvalidSpec(nd.id.token() + ": normal needs (mu, sigma)");
                break;
            case Family::TruncatedNormalRedraw:
                if (nd.params.size() != 2)
                    throw InvalidSpec(nd.id.token() + ": truncated normal needs (mu, sigma)");
                nd.trunc.validate();
                break;
            case Family::Multinomial: {
                size_t need = nd.implicit_last ? nd.categories - 1 : nd.categories;
                if (nd.categories < 2 || nd.params.size() != need)
                    throw InvalidSpec(nd.id.token() + ": multinomial parameter count mismatch");
                break;
            }
        }
    }
}

const NodeDistribution& ScmSpec::dist_of(const NodeId& id) const {
    for (const auto& nd : nodes)
        if (nd.id == id) return nd;
    throw UnknownNode("no distribution for " + id.token());
}

int Dataset::column_index(const NodeId& id) const {
    auto f = find_column(id);
    if (!f) throw UnknownNode("dataset has no column " + id.token());
    return *f;
}

std::optional<int> Dataset::find_column(const NodeId& id) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == id) return static_cast<int>(i);
    return std::nullopt;
}

size_t Dataset::missing_count(int col) const {
    if (missing[col].empty()) return 0;
    size_t c = 0;
    for (uint8_t m : missing[col]) c += m;
    return c;
}

namespace {

double clamp01(double p, int64_t& clamps) {
    if (p < 0.0) {
        ++clamps;
        return 0.0;
    }
    if (p > 1.0) {
        ++clamps;
        return 1.0;
    }
    return p;
}

Dataset sample_impl(const ScmSpec& spec, size_t n, uint64_t seed, const std::string& salt,
                    const std::vector<std::pair<NodeId, double>>* do_assignments) {
    spec.validate();
    const bool interventional = do_assignments != nullptr;

    // column set: skip the missingness machinery for interventional draws
    std::vector<const NodeDistribution*> todo;
    for (const auto& nd : spec.nodes) {
        if (interventional) {
            NodeRole role = spec.graph.role(spec.graph.index(nd.id));
            if (role == NodeRole::Missingness || role == NodeRole::Auxiliary) continue;
        }
        todo.push_back(&nd);
    }

    Dataset d;
    d.n = n;
    d.seed = seed;
    d.graph_name = spec.name;
    for (const auto* nd : todo) d.columns.push_back(nd->id);
    d.values.assign(d.columns.size(), {});
    d.missing.assign(d.columns.size(), {});

    std::vector<double> do_values(d.columns.size(), 0.0);
    std::vector<char> is_do(d.columns.size(), 0);
    if (interventional) {
        for (const auto& [id, value] : *do_assignments) {
            spec.graph.index(id);  // UnknownNode check
            if (auto c = d.find_column(id)) {
                is_do[*c] = 1;
                do_values[*c] = value;
                d.interventions.push_back({id.token(), value});
            } else {
                throw UnknownNode("cannot intervene on masked-out column " + id.token());
            }
        }
    }

    // bind formulas against the dataset columns once
    std::vector<NodeDistribution> dists;
    dists.reserve(todo.size());
    for (const auto* nd : todo) {
        dists.push_back(*nd);
        for (auto& f : dists.back().params) f.bind(d.columns);
    }

    std::vector<double> row(d.columns.size(), 0.0);
    std::vector<double> probs;

    for (size_t ci = 0; ci < d.columns.size(); ++ci) {
        const NodeDistribution& nd = dists[ci];
        std::string tag = stream_tag({"sample", salt, nd.id.token()});
        Rng rng = Rng::substream(seed, tag);
        auto& col = d.values[ci];
        col.resize(n);

        int64_t clamps = 0, redraw_low = 0, redraw_high = 0;

        for (size_t i = 0; i < n; ++i) {
            // gather this row's already-sampled values
            for (size_t cj = 0; cj < ci; ++cj) row[cj] = d.values[cj][i];
            double out;
            if (is_do[ci]) {
                out = do_values[ci];
            } else {
                switch (nd.family) {
                    case Family::Deterministic: out = nd.params[0].eval(row); break;
                    case Family::Bernoulli: {
                        double p = clamp01(nd.params[0].eval(row), clamps);
                        out = rng.bernoulli(p) ? 1.0 : 0.0;
                        break;
                    }
                    case Family::Poisson: {
                        double lambda = nd.params[0].eval(row);
                        if (lambda < 0) throw FormulaDomainError("negative Poisson rate");
                        out = rng.poisson(lambda);
                        break;
                    }
                    case Family::Normal: {
                        double mu = nd.params[0].eval(row);
                        double sg = nd.params[1].eval(row);
                        out = rng.normal(mu, sg);
                        break;
                    }
                    case Family::TruncatedNormalRedraw: {
                        double mu = nd.params[0].eval(row);
                        double sg = nd.params[1].eval(row);
                        double v = rng.normal(mu, sg);
                        if (v < nd.trunc.a) {
                            v = rng.uniform(nd.trunc.a1, nd.trunc.a2);
                            ++redraw_low;
                        } else if (v > nd.trunc.b) {
                            v = rng.uniform(nd.trunc.b1, nd.trunc.b2);
                            ++redraw_high;
                        }
                        out = v;
                        break;
                    }
                    case Family::Multinomial: {
                        probs.clear();
                        double s = 0.0;
                        for (const auto& f : nd.params) {
                            double p = f.eval(row);
                            if (p < 0) p = 0;
                            probs.push_back(p);
                            s += p;
                        }
                        if (nd.implicit_last) {
                            if (s > 1.0) {
                                for (auto& p : probs) p /= s;
                                probs.push_back(0.0);
                                ++clamps;
                            } else {
                                probs.push_back(1.0 - s);
                            }
                        } else if (std::abs(s - 1.0) > 1e-12) {
                            if (s <= 0) throw FormulaDomainError("multinomial mass is zero");
                            for (auto& p : probs) p /= s;
                        }
                        out = 1.0 + rng.categorical(probs);
                        break;
                    }
                    default: throw InvalidSpec("unhandled family");
                }
            }
            col[i] = out;
        }

        const std::string tok = nd.id.token();
        if (clamps) d.counters["clamp:" + tok] = clamps;
        if (redraw_low) d.counters["redraw_low:" + tok] = redraw_low;
        if (redraw_high) d.counters["redraw_high:" + tok] = redraw_high;
    }
    return d;
}

}  // namespace

Dataset sample(const ScmSpec& spec, size_t n, uint64_t seed, const std::string& salt) {
    return sample_impl(spec, n, seed, salt, nullptr);
}

Dataset sample_interventional(const ScmSpec& spec,
                              const std::vector<std::pair<NodeId, double>>& do_assignments,
                              size_t n, uint64_t seed, const std::string& salt) {
    return sample_impl(spec, n, seed, salt, &do_assignments);
}

Dataset apply_missingness(const Dataset& d, const ScmSpec& spec, Scenario sc, uint64_t seed) {
    Dataset out = d;
    out.scenario = scenario_name(sc);
    if (sc == Scenario::None) return out;
    auto fams = masked_families(sc);

    const MDag& g = spec.graph;
    for (int v = 0; v < g.size(); ++v) {
        if (g.role(v) != NodeRole::Partial) continue;
        const NodeId& id = g.id(v);
        if (std::find(fams.begin(), fams.end(), id.name) == fams.end()) continue;
        auto col = out.find_column(id);
        if (!col) continue;
        int m_node = g.indicator_of(v);
        const NodeId& m_id = g.id(m_node);

        std::vector<double> indicator;
        if (auto m_col = out.find_column(m_id)) {
            indicator = out.values[*m_col];
        } else {
            // the indicator column was not materialized: draw it now from
            // its structural equation on a named substream
            const NodeDistribution& nd = spec.dist_of(m_id);
            NodeDistribution bound = nd;
            for (auto& f : bound.params) f.bind(out.columns);
            Rng rng = Rng::substream(seed, stream_tag({"mask", m_id.token()}));
            std::vector<double> row(out.columns.size(), 0.0);
            indicator.resize(out.n);
            int64_t clamps = 0;
            for (size_t i = 0; i < out.n; ++i) {
                for (size_t cj = 0; cj < out.columns.size(); ++cj) row[cj] = out.values[cj][i];
                double p = clamp01(bound.params[0].eval(row), clamps);
                indicator[i] = rng.bernoulli(p) ? 1.0 : 0.0;
            }
        }

        auto& mask = out.missing[*col];
        mask.assign(out.n, 0);
        for (size_t i = 0; i < out.n; ++i) mask[i] = indicator[i] >= 0.5 ? 1 : 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON / CSV

ScmSpec scm_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidSpec(std::string("scm JSON parse error: ") + e.what());
    }
    ScmSpec spec;
    spec.name = j.value("name", "");
    spec.graph = graph_from_json(j.at("graph").dump());
    for (const auto& nj : j.at("nodes")) {
        NodeDistribution nd;
        nd.id = NodeId::parse(nj.at("var").get<std::string>());
        nd.family = family_from_name(nj.at("family").get<std::string>());
        for (const auto& p : nj.at("params")) nd.params.push_back(Formula::parse(p.get<std::string>()));
        if (nj.contains("trunc")) {
            const auto& t = nj.at("trunc");
            nd.trunc = TruncBounds{t.at(0).get<double>(), t.at(1).get<double>(),
                                   t.at(2).get<double>(), t.at(3).get<double>(),
                                   t.at(4).get<double>(), t.at(5).get<double>()};
        }
        nd.implicit_last = nj.value("implicit_last", false);
        nd.categories = nj.value("categories", 0);
        spec.nodes.push_back(std::move(nd));
    }
    spec.validate();
    return spec;
}

std::string scm_to_json(const ScmSpec& spec) {
    nlohmann::json j;
    if (!spec.name.empty()) j["name"] = spec.name;
    j["graph"] = nlohmann::json::parse(graph_to_json(spec.graph));
    j["nodes"] = nlohmann::json::array();
    for (const auto& nd : spec.nodes) {
        nlohmann::json nj;
        nj["var"] = nd.id.token();
        nj["family"] = family_name(nd.family);
        nj["params"] = nlohmann::json::array();
        for (const auto& f : nd.params) nj["params"].push_back(f.text());
        if (nd.family == Family::TruncatedNormalRedraw)
            nj["trunc"] = {nd.trunc.a, nd.trunc.a1, nd.trunc.a2,
                           nd.trunc.b, nd.trunc.b1, nd.trunc.b2};
        if (nd.family == Family::Multinomial) {
            nj["categories"] = nd.categories;
            if (nd.implicit_last) nj["implicit_last"] = true;
        }
        j["nodes"].push_back(std::move(nj));
    }
    return j.dump(2);
}

ScmSpec load_scm_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open scm file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scm_from_json(ss.str());
}

void dataset_to_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidSpec("cannot write " + path);
    out << "# mdag-dataset v1\n";
    for (size_t c = 0; c < d.columns.size(); ++c) {
        if (c) out << ",";
        out << d.columns[c].display();
    }
    out << "\n";
    out.precision(17);
    for (size_t i = 0; i < d.n; ++i) {
        for (size_t c = 0; c < d.columns.size(); ++c) {
            if (c) out << ",";
            if (d.is_missing(static_cast<int>(c), i))
                out << "NA";
            else
                out << d.values[c][i];
        }
        out << "\n";
    }

    nlohmann::json meta;
    meta["schema"] = "mdag-dataset v1";
    meta["seed"] = d.seed;
    meta["n"] = d.n;
    meta["graph"] = d.graph_name;
    meta["scenario"] = d.scenario;
    meta["interventions"] = nlohmann::json::array();
    for (const auto& [tok, value] : d.interventions)
        meta["interventions"].push_back({{"var", tok}, {"value", value}});
    meta["counters"] = d.counters;
    std::ofstream ms(path + ".meta.json");
    ms << meta.dump(2) << "\n";
}

Dataset dataset_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open dataset " + path);
    Dataset d;
    std::string line;
    // optional schema comment
    if (!std::getline(in, line)) throw InvalidSpec("empty dataset file");
    if (!line.empty() && line[0] == '#') {
        if (!std::getline(in, line)) throw InvalidSpec("dataset has no header");
    }
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            // header uses display names: Name or Name_<time>
            auto us = cell.rfind('_');
            NodeId id;
            if (us != std::string::npos && us + 1 < cell.size() &&
                std::all_of(cell.begin() + us + 1, cell.end(),
                            [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
                id = NodeId(cell.substr(0, us), std::stoi(cell.substr(us + 1)));
                // M-indicator columns keep their full name ("M_VL_36" → name M_VL)
            } else {
                id = NodeId(cell);
            }
            d.columns.push_back(id);
        }
    }
    d.values.assign(d.columns.size(), {});
    d.missing.assign(d.columns.size(), {});
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= d.columns.size()) throw InvalidSpec("row wider than header in " + path);
            if (cell == "NA") {
                d.missing[c].resize(d.n + 1, 0);
                d.missing[c][d.n] = 1;
                d.values[c].push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
                d.values[c].push_back(std::stod(cell));
            }
            ++c;
        }
        ++d.n;
    }
    for (size_t c = 0; c < d.columns.size(); ++c)
        if (!d.missing[c].empty()) d.missing[c].resize(d.n, 0);

    std::ifstream ms(path + ".meta.json");
    if (ms) {
        nlohmann::json meta = nlohmann::json::parse(ms, nullptr, false);
        if (!meta.is_discarded()) {
            d.seed = meta.value("seed", 0ull);
            d.graph_name = meta.value("graph", "");
            d.scenario = meta.value("scenario", "none");
        }
    }
    return d;
}

}  // namespace mdag

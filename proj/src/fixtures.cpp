#include "mdag/fixtures.hpp"

#include <filesystem>
#include <fstream>

namespace mdag {
namespace fixtures {

namespace {

NodeDecl node(std::string name, NodeRole role) {
    NodeDecl d;
    d.id = NodeId(std::move(name));
    d.role = role;
    return d;
}

NodeDecl node(std::string name, int time, NodeRole role) {
    NodeDecl d;
    d.id = NodeId(std::move(name), time);
    d.role = role;
    return d;
}

NodeDecl aux(std::string name, std::optional<int> time, bool latent) {
    NodeDecl d;
    d.id = time ? NodeId(std::move(name), *time) : NodeId(std::move(name));
    d.role = NodeRole::Auxiliary;
    d.aux_latent = latent;
    return d;
}

NodeDecl indicator(std::string target_name, std::optional<int> time) {
    NodeDecl d;
    d.id = time ? NodeId("M_" + target_name, *time) : NodeId("M_" + target_name);
    d.role = NodeRole::Missingness;
    d.target = time ? NodeId(target_name, *time) : NodeId(target_name);
    return d;
}

}  // namespace

const std::vector<int>& study_weeks() {
    static const std::vector<int> weeks{0, 6, 36, 48, 60, 84};
    return weeks;
}

MDag fig1(char variant) {
    std::vector<NodeDecl> nodes{node("A", NodeRole::Observed), node("X", NodeRole::Observed),
                                node("Y", NodeRole::Partial), indicator("Y", std::nullopt)};
    std::vector<std::pair<NodeId, NodeId>> edges{{NodeId("X"), NodeId("Y")},
                                                 {NodeId("A"), NodeId("Y")}};
    switch (variant) {
        case 'a': break;
        case 'b': edges.push_back({NodeId("A"), NodeId("M_Y")}); break;
        case 'c': edges.push_back({NodeId("Y"), NodeId("M_Y")}); break;
        case 'd':
            nodes.push_back(node("U", NodeRole::Latent));
            edges.push_back({NodeId("U"), NodeId("M_Y")});
            edges.push_back({NodeId("U"), NodeId("A")});
            break;
        default: throw InvalidSpec("fig1 variant must be a..d");
    }
    return MDag::build(std::move(nodes), edges);
}

MDag fig2() {
    std::vector<NodeDecl> nodes{
        node("A1", NodeRole::Observed),  node("A2", NodeRole::Observed),
        node("X1", NodeRole::Partial),   node("X2", NodeRole::Partial),
        node("Y1", NodeRole::Partial),   node("Y2", NodeRole::Partial),
        indicator("X1", std::nullopt),   indicator("X2", std::nullopt),
        indicator("Y1", std::nullopt),   indicator("Y2", std::nullopt)};
    auto id = [](const char* s) { return NodeId(s); };
    std::vector<std::pair<NodeId, NodeId>> edges{
        {id("A1"), id("A2")}, {id("A1"), id("Y2")},   {id("A1"), id("X1")},
        {id("A1"), id("Y1")}, {id("A1"), id("X2")},   {id("Y1"), id("X2")},
        {id("Y1"), id("Y2")}, {id("X1"), id("M_X1")}, {id("X1"), id("M_Y1")},
        {id("M_Y1"), id("M_Y2")},                     {id("X2"), id("M_X2")},
        {id("X2"), id("M_Y2")},                       {id("A2"), id("X2")},
        {id("A2"), id("Y2")}};
    return MDag::build(std::move(nodes), edges);
}

StudyVariant study_variant_from_name(const std::string& s) {
    if (s == "main") return StudyVariant::Main;
    if (s == "alt1") return StudyVariant::Alt1;
    if (s == "alt2") return StudyVariant::Alt2;
    throw InvalidSpec("unknown graph variant '" + s + "' (main|alt1|alt2)");
}

const char* study_variant_name(StudyVariant v) {
    switch (v) {
        case StudyVariant::Main: return "main";
        case StudyVariant::Alt1: return "alt1";
        case StudyVariant::Alt2: return "alt2";
    }
    return "?";
}

namespace {

int prev_week(int w) {
    const auto& weeks = study_weeks();
    for (size_t k = 1; k < weeks.size(); ++k)
        if (weeks[k] == w) return weeks[k - 1];
    throw InvalidSpec("no predecessor week for " + std::to_string(w));
}

// Shared scaffold for the study m-DAGs. `collapsed` selects the simulation
// form (one measured SES_0 proxy) over the figure form (BMQ/SES measured +
// BHV unmeasured).
MDag chapas_build(StudyVariant v, bool collapsed) {
    const auto& weeks = study_weeks();
    std::vector<NodeDecl> nodes;
    std::vector<std::pair<NodeId, NodeId>> edges;
    auto edge = [&](NodeId a, NodeId b) { edges.push_back({std::move(a), std::move(b)}); };

    // baseline substantive variables
    nodes.push_back(node("Age", NodeRole::Observed));
    nodes.push_back(node("Sex", NodeRole::Observed));
    nodes.push_back(node("Genotype", NodeRole::Observed));
    nodes.push_back(node("NRTI", NodeRole::Observed));
    nodes.push_back(node("Weight", 0, NodeRole::Partial));
    nodes.push_back(indicator("Weight", 0));
    nodes.push_back(node("CoMo", 0, NodeRole::Observed));
    nodes.push_back(node("EFV", 0, NodeRole::Observed));  // degenerate zero concentration
    nodes.push_back(node("VL", 0, NodeRole::Partial));
    nodes.push_back(indicator("VL", 0));
    edge(NodeId("Sex"), NodeId("Genotype"));
    edge(NodeId("Sex"), NodeId("Weight", 0));
    edge(NodeId("Age"), NodeId("Weight", 0));
    edge(NodeId("Age"), NodeId("NRTI"));
    edge(NodeId("EFV", 0), NodeId("VL", 0));

    // missingness machinery at every week
    bool alt2 = v == StudyVariant::Alt2;
    if (collapsed) {
        // SES_0 is substantive under Alt2 (it causes adherence)
        nodes.push_back(node("SES", 0, alt2 ? NodeRole::Observed : NodeRole::Auxiliary));
    } else {
        nodes.push_back(aux("BMQ", std::nullopt, false));
        nodes.push_back(aux("SES", std::nullopt, false));
        nodes.push_back(alt2 ? node("BHV", NodeRole::Latent) : aux("BHV", std::nullopt, true));
    }
    for (int w : weeks) {
        nodes.push_back(aux("MV", w, false));
        nodes.push_back(aux("TI", w, true));
        if (collapsed) {
            edge(NodeId("SES", 0), NodeId("MV", w));
            if (w > 0) edge(NodeId("MV", prev_week(w)), NodeId("MV", w));
        } else {
            edge(NodeId("BMQ"), NodeId("MV", w));
            edge(NodeId("SES"), NodeId("MV", w));
            edge(NodeId("BHV"), NodeId("MV", w));
        }
        edge(NodeId("MV", w), NodeId("M_Weight", w));
        edge(NodeId("MV", w), NodeId("M_VL", w));
        edge(NodeId("TI", w), NodeId("M_VL", w));
        if (v == StudyVariant::Alt1) edge(NodeId("VL", w), NodeId("MV", w));
    }

    // follow-up weeks
    for (size_t k = 1; k < weeks.size(); ++k) {
        int w = weeks[k];
        int p = weeks[k - 1];
        nodes.push_back(node("MEMS", w, NodeRole::Partial));
        nodes.push_back(indicator("MEMS", w));
        nodes.push_back(node("Weight", w, NodeRole::Partial));
        nodes.push_back(indicator("Weight", w));
        nodes.push_back(node("CoMo", w, NodeRole::Observed));
        nodes.push_back(node("Dose", w, NodeRole::Observed));
        nodes.push_back(node("EFV", w, NodeRole::Partial));
        nodes.push_back(indicator("EFV", w));
        nodes.push_back(node("VL", w, NodeRole::Partial));
        nodes.push_back(indicator("VL", w));

        edge(NodeId("CoMo", p), NodeId("MEMS", w));
        if (k >= 2) edge(NodeId("MEMS", p), NodeId("MEMS", w));
        if (alt2) {
            if (collapsed)
                edge(NodeId("SES", 0), NodeId("MEMS", w));
            else
                edge(NodeId("BHV"), NodeId("MEMS", w));
        }
        edge(NodeId("Weight", p), NodeId("Weight", w));
        edge(NodeId("CoMo", p), NodeId("Weight", w));
        edge(NodeId("CoMo", p), NodeId("CoMo", w));
        edge(NodeId("Age"), NodeId("CoMo", w));
        edge(NodeId("Weight", p), NodeId("CoMo", w));
        edge(NodeId("VL", p), NodeId("CoMo", w));
        if (k == 1) {
            edge(NodeId("Weight", w), NodeId("Dose", w));
            edge(NodeId("Age"), NodeId("Dose", w));
        } else {
            edge(NodeId("Dose", p), NodeId("Dose", w));
            edge(NodeId("Weight", w), NodeId("Dose", w));
            edge(NodeId("Age"), NodeId("Dose", w));
        }
        edge(NodeId("Dose", w), NodeId("EFV", w));
        edge(NodeId("MEMS", w), NodeId("EFV", w));
        edge(NodeId("Genotype"), NodeId("EFV", w));
        edge(NodeId("VL", p), NodeId("VL", w));
        edge(NodeId("CoMo", p), NodeId("VL", w));
        edge(NodeId("EFV", w), NodeId("VL", w));

        edge(NodeId("MV", w), NodeId("M_EFV", w));
        edge(NodeId("TI", w), NodeId("M_EFV", w));
        edge(NodeId("TI", w), NodeId("M_MEMS", w));
    }
    return MDag::build(std::move(nodes), edges);
}

}  // namespace

MDag chapas_mdag(StudyVariant v) { return chapas_build(v, true); }
MDag chapas_mdag_full(StudyVariant v) { return chapas_build(v, false); }

ScmSpec chapas_scm(StudyVariant v) {
    ScmSpec spec;
    spec.name = std::string("chapas_") + study_variant_name(v);
    spec.graph = chapas_mdag(v);

    auto F = [](const std::string& s) { return Formula::parse(s); };
    auto logistic = [](const std::string& lin) {
        return "1/(1+exp(-(" + lin + ")))";
    };
    auto add = [&](NodeId id, Family fam, std::vector<std::string> params) {
        NodeDistribution nd;
        nd.id = std::move(id);
        nd.family = fam;
        for (const auto& p : params) nd.params.push_back(F(p));
        spec.nodes.push_back(std::move(nd));
        return &spec.nodes.back();
    };

    const bool alt1 = v == StudyVariant::Alt1;
    const bool alt2 = v == StudyVariant::Alt2;

    // ---- baseline ----
    add(NodeId("Sex"), Family::Bernoulli, {"0.5"});
    {
        auto* g = add(NodeId("Genotype"), Family::Multinomial,
                      {logistic("-0.103 + I(Sex=1)*0.223 + I(Sex=0)*0.173"),
                       logistic("-0.086 + I(Sex=1)*0.198 + I(Sex=0)*0.214"),
                       logistic("-0.309 + I(Sex=1)*0.082 + I(Sex=0)*0.170")});
        g->categories = 3;
    }
    {
        auto* a = add(NodeId("Age"), Family::TruncatedNormalRedraw, {"1.501", "0.369"});
        a->trunc = TruncBounds{0.693, 0.693, 1.0, 2.8, 2.7, 2.8};
    }
    {
        auto* w = add(NodeId("Weight", 0), Family::TruncatedNormalRedraw,
                      {"(1.5 + 0.2*Sex + 0.774*Age)*0.94", "0.369"});
        w->trunc = TruncBounds{2.26, 2.26, 2.67, 3.37, 3.02, 3.37};
    }
    {
        auto* n = add(NodeId("NRTI"), Family::Multinomial,
                      {logistic("-0.006 + I(Age>1.4563)*Age*0.1735 + I(Age<=1.4563)*Age*0.1570"),
                       logistic("-0.006 + I(Age>1.4563)*Age*0.1735 + I(Age<=1.4563)*Age*0.1570"),
                       logistic("-0.006 + I(Age>1.4563)*Age*0.1570 + I(Age<=1.4563)*Age*0.1818")});
        n->categories = 3;
    }
    add(NodeId("CoMo", 0), Family::Bernoulli, {"0.15"});
    add(NodeId("EFV", 0), Family::Deterministic, {"0"});
    add(NodeId("VL", 0), Family::Bernoulli,
        {"1 - (" + logistic("0.4 + 1.9*sqrt(EFV@0)") + ")"});
    add(NodeId("SES", 0), Family::Poisson, {"3"});
    {
        std::string lin = "-2.95 + 0.1*SES@0";
        if (alt1) lin += " + 2*VL@0";
        add(NodeId("MV", 0), Family::Bernoulli, {logistic(lin)});
    }
    add(NodeId("TI", 0), Family::Bernoulli, {"0.05"});
    add(NodeId("M_VL", 0), Family::Bernoulli,
        {"I(MV@0=1) + I(MV@0=0)*I(TI@0=1)*0.5"});
    add(NodeId("M_Weight", 0), Family::Bernoulli, {"I(MV@0=1)"});

    // ---- follow-up ----
    const auto& weeks = study_weeks();
    for (size_t k = 1; k < weeks.size(); ++k) {
        int w = weeks[k];
        int p = weeks[k - 1];
        auto at = [&](const char* name, int t) {
            return std::string(name) + "@" + std::to_string(t);
        };

        add(NodeId("TI", w), Family::Bernoulli, {"0.05"});
        {
            std::string lin = "0.71 + " + at("CoMo", p) + "*0.31";
            if (k >= 2) lin += " + " + at("MEMS", p) + "*0.31";
            if (alt2) lin += " - 0.5*SES@0";
            add(NodeId("MEMS", w), Family::Bernoulli, {logistic(lin)});
        }
        {
            auto* wt = add(NodeId("Weight", w), Family::TruncatedNormalRedraw,
                           {at("Weight", p) + "*1.04 - 0.05*I(" + at("CoMo", p) + "=1)", "0.4"});
            wt->trunc = TruncBounds{2.26, 2.26, 2.473, 3.37, 3.2, 3.37};
        }
        add(NodeId("CoMo", w), Family::Bernoulli,
            {"1 - (" +
             logistic("0.5*I(" + at("CoMo", p) + "=1) + Age*0.1 + " + at("Weight", p) + "*0.1") +
             ")"});
        if (k == 1) {
            auto* d = add(NodeId("Dose", w), Family::Multinomial,
                          {logistic("5 + sqrt(" + at("Weight", w) + ")*8 - Age*10"),
                           logistic("4 + sqrt(" + at("Weight", w) + ")*8.768 - Age*9.06"),
                           logistic("3 + sqrt(" + at("Weight", w) + ")*6.562 - Age*8.325")});
            d->categories = 3;
        } else {
            auto* d = add(
                NodeId("Dose", w), Family::Multinomial,
                {logistic("4 + " + at("Dose", p) + "*0.5 + sqrt(" + at("Weight", w) +
                          ")*4 - Age*10"),
                 logistic("-8 + " + at("Dose", p) + "*0.5 + sqrt(" + at("Weight", w) +
                          ")*8.568 - Age*9.06"),
                 logistic("20 + " + at("Dose", p) + "*0.5 + sqrt(" + at("Weight", w) +
                          ")*6.562 - Age*18.325")});
            d->categories = 4;
            d->implicit_last = true;
        }
        {
            auto* e = add(NodeId("EFV", w), Family::TruncatedNormalRedraw,
                          {"0.1*" + at("Dose", w) + " + 0.1*" + at("MEMS", w) +
                               " + I(Genotype<=2)*2.66 + I(Genotype=3)*4.6",
                           "4.06"});
            e->trunc = TruncBounds{0.2032, 0.2032, 0.88, 21.84, 8.37, 21.84};
        }
        {
            // time-index effects resolved per week: k=1 → -0.6, k=4 → -1.2,
            // slope 2 - 0.2*I(k=3)
            std::string intercept = "1";
            if (k == 1) intercept += " - 0.6";
            if (k == 4) intercept += " - 1.2";
            std::string slope = k == 3 ? "1.8" : "2";
            add(NodeId("VL", w), Family::Bernoulli,
                {"1 - (" +
                 logistic(intercept + " + 0.1*" + at("CoMo", p) + " + " + slope + "*sqrt(" +
                          at("EFV", w) + ")") +
                 ")"});
        }
        {
            std::string lin = "-2.95 + 0.1*SES@0 + " + at("MV", p);
            if (alt1) lin += " + 2*" + at("VL", w);
            add(NodeId("MV", w), Family::Bernoulli, {logistic(lin)});
        }
        add(NodeId("M_EFV", w), Family::Bernoulli,
            {"I(" + at("MV", w) + "=1) + I(" + at("MV", w) + "=0)*I(" + at("TI", w) +
             "=1)*0.5"});
        add(NodeId("M_Weight", w), Family::Bernoulli, {"I(" + at("MV", w) + "=1)"});
        add(NodeId("M_VL", w), Family::Bernoulli,
            {"I(" + at("MV", w) + "=1) + I(" + at("MV", w) + "=0)*I(" + at("TI", w) +
             "=1)*0.5"});
        add(NodeId("M_MEMS", w), Family::Bernoulli,
            {logistic("0.5*I(" + at("TI", w) + "=1) + 0.2")});
    }

    // definition order above is temporal; validate() checks it against the graph
    spec.validate();
    return spec;
}

CausalQuery theta36() {
    CausalQuery q;
    q.outcome = NodeId("VL", 36);
    q.outcome_value = 1.0;
    q.interventions = {{NodeId("EFV", 6), Value(std::string("a"))},
                       {NodeId("EFV", 36), Value(std::string("a"))}};
    q.confounders = {NodeId("Age"),          NodeId("Sex"),      NodeId("Genotype"),
                     NodeId("NRTI"),         NodeId("Weight", 0), NodeId("Weight", 6),
                     NodeId("MEMS", 6),      NodeId("Weight", 36), NodeId("MEMS", 36)};
    return q;
}

CausalQuery theta84() {
    CausalQuery q;
    q.outcome = NodeId("VL", 84);
    q.outcome_value = 1.0;
    for (int w : {6, 36, 48, 60, 84})
        q.interventions.push_back({NodeId("EFV", w), Value(std::string("a"))});
    q.confounders = {NodeId("Age"), NodeId("Sex"), NodeId("Genotype"), NodeId("NRTI"),
                     NodeId("Weight", 0)};
    for (int w : {6, 36, 48, 60, 84}) {
        q.confounders.push_back(NodeId("Weight", w));
        q.confounders.push_back(NodeId("MEMS", w));
    }
    return q;
}

void write_fixture_files(const std::string& directory) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream out(fs::path(directory) / name);
        if (!out) throw InvalidSpec("cannot write fixture " + name);
        out << text;
        if (!text.empty() && text.back() != '\n') out << "\n";
    };
    for (char c : {'a', 'b', 'c', 'd'})
        write(std::string("fig1") + c + ".json", graph_to_json(fig1(c)));
    write("fig2.json", graph_to_json(fig2()));
    for (auto v : {StudyVariant::Main, StudyVariant::Alt1, StudyVariant::Alt2}) {
        std::string n = study_variant_name(v);
        write("g_" + n + ".json", graph_to_json(chapas_mdag(v)));
        write("g_" + n + "_full.json", graph_to_json(chapas_mdag_full(v)));
        write("scm_" + n + ".json", scm_to_json(chapas_scm(v)));
    }
    write("theta36.json", query_to_json(theta36()));
    write("theta84.json", query_to_json(theta84()));
}

}  // namespace fixtures
}  // namespace mdag

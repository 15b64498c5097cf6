#include <doctest.h>

#include "mdag/fixtures.hpp"
#include "mdag/taxonomy.hpp"

using namespace mdag;

TEST_CASE("mechanism classes of the four small graphs") {
    CHECK(classify_mechanism(fixtures::fig1('a')).mechanism == Mechanism::MCAR);
    CHECK(classify_mechanism(fixtures::fig1('a')).evidence.empty());

    auto b = classify_mechanism(fixtures::fig1('b'));
    CHECK(b.mechanism == Mechanism::MAR);
    REQUIRE(b.evidence.size() == 1);

    auto c = classify_mechanism(fixtures::fig1('c'));
    CHECK(c.mechanism == Mechanism::MNAR);

    auto d = classify_mechanism(fixtures::fig1('d'));
    CHECK(d.mechanism == Mechanism::MNAR);

    CHECK(classify_mechanism(fixtures::fig2()).mechanism == Mechanism::MNAR);
}

TEST_CASE("study graphs classify MNAR with unmeasured technical issues as evidence") {
    for (auto variant :
         {fixtures::StudyVariant::Main, fixtures::StudyVariant::Alt1, fixtures::StudyVariant::Alt2}) {
        for (bool full : {false, true}) {
            MDag g = full ? fixtures::chapas_mdag_full(variant) : fixtures::chapas_mdag(variant);
            auto mc = classify_mechanism(g);
            CHECK(mc.mechanism == Mechanism::MNAR);
            bool ti_vl = false;
            for (const auto& [m, p] : mc.evidence) {
                CHECK((g.role(p) == NodeRole::Partial || g.role(p) == NodeRole::Latent ||
                       (g.role(p) == NodeRole::Auxiliary && g.aux_latent(p))));
                if (g.id(m).name == "M_VL" && g.id(p).name == "TI") ti_vl = true;
                CHECK(g.has_edge(p, m));  // evidence pairs are real edges
            }
            CHECK(ti_vl);
        }
    }
}

TEST_CASE("closedness verdicts") {
    auto main_report = is_closed(fixtures::chapas_mdag(fixtures::StudyVariant::Main));
    CHECK(main_report.closed);
    CHECK_FALSE(main_report.witness_path.has_value());
    CHECK(is_closed(fixtures::chapas_mdag_full(fixtures::StudyVariant::Main)).closed);

    MDag alt1 = fixtures::chapas_mdag(fixtures::StudyVariant::Alt1);
    auto alt1_report = is_closed(alt1);
    CHECK_FALSE(alt1_report.closed);
    REQUIRE(alt1_report.witness_path.has_value());
    const auto& path = *alt1_report.witness_path;
    REQUIRE(path.size() >= 2);
    // endpoints: substantive node then indicator; every hop a real edge
    NodeRole first = alt1.role(path.front());
    CHECK((first == NodeRole::Observed || first == NodeRole::Partial ||
           first == NodeRole::Latent));
    CHECK(alt1.role(path.back()) == NodeRole::Missingness);
    for (size_t i = 0; i + 1 < path.size(); ++i)
        CHECK((alt1.has_edge(path[i], path[i + 1]) || alt1.has_edge(path[i + 1], path[i])));

    // adding a substantive cause of adherence opens the mechanism too
    CHECK_FALSE(is_closed(fixtures::chapas_mdag(fixtures::StudyVariant::Alt2)).closed);

    SUBCASE("no indicators at all is vacuously closed") {
        std::vector<NodeDecl> nodes{{NodeId("A"), NodeRole::Observed, false, std::nullopt},
                                    {NodeId("B"), NodeRole::Observed, false, std::nullopt}};
        MDag g = MDag::build(nodes, {{NodeId("A"), NodeId("B")}});
        CHECK(is_closed(g).closed);
    }
}

TEST_CASE("corollary cross-check under closed mechanisms") {
    CHECK(closed_implies_independence_check(fixtures::chapas_mdag(fixtures::StudyVariant::Main)));
    CHECK(closed_implies_independence_check(fixtures::fig1('a')));
    CHECK_THROWS_AS(
        closed_implies_independence_check(fixtures::chapas_mdag(fixtures::StudyVariant::Alt1)),
        NotClosed);
}

TEST_CASE("closed graphs have no indicator parents among substantive variables") {
    for (const MDag& g : {fixtures::chapas_mdag(fixtures::StudyVariant::Main),
                          fixtures::chapas_mdag_full(fixtures::StudyVariant::Main),
                          fixtures::fig1('a')}) {
        REQUIRE(is_closed(g).closed);
        for (int m : g.nodes_with_role(NodeRole::Missingness))
            for (int p : g.parents(m)) {
                NodeRole r = g.role(p);
                CHECK((r == NodeRole::Missingness || r == NodeRole::Auxiliary));
            }
    }
}

TEST_CASE("MCAR graphs also satisfy the MAR parent condition") {
    MDag a = fixtures::fig1('a');
    REQUIRE(classify_mechanism(a).mechanism == Mechanism::MCAR);
    for (int m : a.nodes_with_role(NodeRole::Missingness))
        for (int p : a.parents(m))
            CHECK((a.role(p) == NodeRole::Observed || a.role(p) == NodeRole::Missingness));
}

TEST_CASE("classification is invariant under node relabeling") {
    MDag g = fixtures::fig1('d');
    // rename every node but keep the structure
    std::vector<NodeDecl> nodes;
    auto rename = [](const NodeId& id) {
        if (id.name == "M_Y") return NodeId("M_Out");
        if (id.name == "Y") return NodeId("Out");
        if (id.name == "A") return NodeId("Trt");
        if (id.name == "X") return NodeId("Cov");
        return NodeId("Hidden");
    };
    for (int i = 0; i < g.size(); ++i) {
        NodeDecl d;
        d.id = rename(g.id(i));
        d.role = g.role(i);
        if (g.target_of(i) >= 0) d.target = rename(g.id(g.target_of(i)));
        nodes.push_back(d);
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int i = 0; i < g.size(); ++i)
        for (int c : g.children(i)) edges.push_back({rename(g.id(i)), rename(g.id(c))});
    MDag relabeled = MDag::build(nodes, edges);
    CHECK(classify_mechanism(relabeled).mechanism == classify_mechanism(g).mechanism);
    CHECK(classify_mechanism(relabeled).evidence.size() ==
          classify_mechanism(g).evidence.size());
}

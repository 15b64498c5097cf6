#include <doctest.h>

#include "mdag/fixtures.hpp"
#include "mdag/recover.hpp"
#include "mdag/scm.hpp"
#include "mdag/taxonomy.hpp"

using namespace mdag;

namespace {

VarTerm v(const char* token) { return {NodeId::parse(token), false}; }

CausalQuery fig2_query() {
    CausalQuery q;
    q.outcome = NodeId("Y2");
    q.interventions = {{NodeId("A1"), std::nullopt}, {NodeId("A2"), std::nullopt}};
    return q;
}

bool has_failure_edge(const RecoverabilityReport& r, const char* from, const char* to) {
    for (const auto& fr : r.per_factor) {
        if (!fr.failure) continue;
        for (const auto& [a, b] : fr.failure->reason_edges)
            if (var_display(a) == from && var_display(b) == to) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("worked two-period example recovers both factors") {
    MDag g = fixtures::fig2();
    RecoverQueryResult rq = recover_query(g, fig2_query());
    REQUIRE(rq.identification.identifiable);
    REQUIRE(rq.recoverability.has_value());
    CHECK(rq.recoverability->recoverable);
    REQUIRE(rq.recoverability->per_factor.size() == 2);

    // factor order is outcome-side first
    const auto& f_y2 = rq.recoverability->per_factor[0];
    const auto& f_y1 = rq.recoverability->per_factor[1];

    auto want_y2 = make_conditional({v("Y2")}, {v("A1"), v("A2"), v("Y1")},
                                    {{NodeId("M_Y1"), 0.0, false, true},
                                     {NodeId("M_Y2"), 0.0, false, true}});
    auto want_y1 = make_conditional({v("Y1")}, {v("A1")},
                                    {{NodeId("M_Y1"), 0.0, false, true}});
    REQUIRE(f_y2.recovered);
    REQUIRE(f_y1.recovered);
    CHECK(expr_equal_canonical(f_y2.recovered, want_y2));
    CHECK(expr_equal_canonical(f_y1.recovered, want_y1));

    // derivation steps cite the two d-separation statements
    REQUIRE(f_y2.steps.size() >= 2);
    CHECK(f_y2.steps[0].justification == "(Y2 ⊥ {M_Y1, M_Y2} | A1, A2, Y1)");
    CHECK(f_y2.steps[1].justification == "(by consistency)");
    REQUIRE(f_y1.steps.size() >= 2);
    CHECK(f_y1.steps[0].justification == "(Y1 ⊥ M_Y1 | A1)");

    // recovered form: no residual potential-outcome flags, M=0 explicit
    for (const auto& fr : rq.recoverability->per_factor) {
        for (const auto& leaf : leaf_factors(fr.recovered)) {
            for (const auto& t : leaf->targets) CHECK_FALSE(t.po_m0);
            for (const auto& t : leaf->given) CHECK_FALSE(t.po_m0);
        }
    }
}

TEST_CASE("study verdicts across graphs and queries") {
    MDag main_g = fixtures::chapas_mdag(fixtures::StudyVariant::Main);
    MDag alt1_g = fixtures::chapas_mdag(fixtures::StudyVariant::Alt1);
    MDag alt2_g = fixtures::chapas_mdag(fixtures::StudyVariant::Alt2);

    SUBCASE("theta36 under the main graph: closed shortcut applies") {
        RecoverQueryResult r = recover_query(main_g, fixtures::theta36());
        REQUIRE(r.identification.identifiable);
        REQUIRE(r.recoverability);
        CHECK(r.recoverability->recoverable);
        // every factor that touches a partial variable is conditioned on
        // its indicators being zero
        for (const auto& fr : r.recoverability->per_factor) {
            REQUIRE(fr.recovered);
            for (const auto& leaf : leaf_factors(fr.recovered))
                for (const auto& gf : leaf->given_fixed)
                    if (gf.is_m0) CHECK(value_display(gf.value) == "0");
        }
    }

    SUBCASE("theta84 under the main graph") {
        RecoverQueryResult r = recover_query(main_g, fixtures::theta84());
        REQUIRE(r.identification.identifiable);
        CHECK(r.recoverability->recoverable);
    }

    SUBCASE("theta36 under alt1 fails with the missed-visit witness") {
        RecoverQueryResult r = recover_query(alt1_g, fixtures::theta36());
        REQUIRE(r.identification.identifiable);
        REQUIRE(r.recoverability);
        CHECK_FALSE(r.recoverability->recoverable);
        CHECK(has_failure_edge(*r.recoverability, "MV_6", "M_{EFV_6}"));
        CHECK(r.recoverability->strategy_note.find("strategy") != std::string::npos);
        // the witness edge really is in the graph
        CHECK(r.analysis_graph.has_edge(r.analysis_graph.index("MV@6"),
                                        r.analysis_graph.index("M_EFV@6")));
    }

    SUBCASE("theta84 under alt1 fails") {
        RecoverQueryResult r = recover_query(alt1_g, fixtures::theta84());
        REQUIRE(r.identification.identifiable);
        CHECK_FALSE(r.recoverability->recoverable);
    }

    SUBCASE("theta36 under alt2 recovers although the mechanism is open") {
        REQUIRE_FALSE(is_closed(alt2_g).closed);
        RecoverQueryResult r = recover_query(alt2_g, fixtures::theta36());
        REQUIRE(r.identification.identifiable);
        REQUIRE(r.recoverability);
        CHECK(r.recoverability->recoverable);
        // the identified expression now involves the socio-economic proxy
        auto vars = all_vars(r.identification.estimand);
        CHECK(std::find(vars.begin(), vars.end(), NodeId("SES", 0)) != vars.end());
    }

    SUBCASE("back-door route gives the same verdicts") {
        CHECK(recover_query(main_g, fixtures::theta36(), IdentifyMethod::Backdoor)
                  .recoverability->recoverable);
        CHECK_FALSE(recover_query(alt1_g, fixtures::theta36(), IdentifyMethod::Backdoor)
                        .recoverability->recoverable);
    }
}

TEST_CASE("recovered conditional independences are replayable") {
    // every claimed (T ⊥ M_S | C) is re-checked here against the graph
    MDag g = fixtures::fig2();
    RecoverQueryResult rq = recover_query(g, fig2_query());
    for (const auto& fr : rq.recoverability->per_factor) {
        REQUIRE(fr.recovered);
        for (const auto& leaf : leaf_factors(fr.recovered)) {
            NodeSet t, c, ms;
            for (const auto& term : leaf->targets) t.push_back(g.index(term.id));
            for (const auto& term : leaf->target_fixed) t.push_back(g.index(term.id));
            for (const auto& term : leaf->given) c.push_back(g.index(term.id));
            for (const auto& term : leaf->given_fixed)
                (term.is_m0 ? ms : c).push_back(g.index(term.id));
            if (ms.empty()) continue;
            CHECK(g.d_separated(make_set(std::move(t)), make_set(std::move(ms)),
                                make_set(std::move(c))));
        }
    }
}

TEST_CASE("closed graphs recover arbitrary identified estimands") {
    MDag g = fixtures::chapas_mdag(fixtures::StudyVariant::Main);
    // a hand-rolled estimand over substantive variables
    auto e = make_sum({NodeId("VL", 6)},
                      make_product({make_conditional({v("VL@36")}, {v("VL@6"), v("Age")}),
                                    make_conditional({v("VL@6")}, {v("Weight@0")}),
                                    make_marginal({v("Weight@0")})}));
    RecoverabilityReport r = recover_estimand(e, g);
    CHECK(r.recoverable);

    SUBCASE("estimands touching latent, auxiliary or indicator nodes are rejected") {
        auto bad = make_conditional({v("VL@36")}, {v("TI@6")});
        CHECK_THROWS_AS(recover_estimand(bad, g), NotIdentifiedInput);
        auto bad2 = make_conditional({v("VL@36")}, {v("M_VL@6")});
        CHECK_THROWS_AS(recover_estimand(bad2, g), NotIdentifiedInput);
        MDag full2 = fixtures::chapas_mdag_full(fixtures::StudyVariant::Alt2);
        auto bad3 = make_conditional({v("VL@36")}, {v("BHV")});
        CHECK_THROWS_AS(recover_estimand(bad3, full2), NotIdentifiedInput);
    }
}

TEST_CASE("available-case plan lists the partially observed factor variables") {
    MDag g = fixtures::fig2();
    RecoverQueryResult rq = recover_query(g, fig2_query());
    auto plan = available_case_plan(*rq.recoverability, rq.analysis_graph);
    REQUIRE(plan.size() == 2);
    // outcome factor: Y1, Y2 must be observed (A1, A2 always are)
    CHECK(plan[0].second == std::vector<NodeId>{NodeId("Y1"), NodeId("Y2")});
    CHECK(plan[1].second == std::vector<NodeId>{NodeId("Y1")});

    SUBCASE("plan for the back-door outcome factor under the study graph") {
        MDag mg = fixtures::chapas_mdag(fixtures::StudyVariant::Main);
        RecoverQueryResult r = recover_query(mg, fixtures::theta36(), IdentifyMethod::Backdoor);
        REQUIRE(r.recoverability->recoverable);
        auto p = available_case_plan(*r.recoverability, r.analysis_graph);
        // outcome factor comes first; its partial variables are the VL,
        // Weight, MEMS and EFV histories
        std::vector<NodeId> want{NodeId("EFV", 6),    NodeId("EFV", 36), NodeId("MEMS", 6),
                                 NodeId("MEMS", 36),  NodeId("VL", 0),   NodeId("VL", 6),
                                 NodeId("VL", 36),    NodeId("Weight", 0), NodeId("Weight", 6),
                                 NodeId("Weight", 36)};
        std::sort(want.begin(), want.end());
        CHECK(p[0].second == want);
    }

    SUBCASE("not recoverable input throws") {
        MDag alt1 = fixtures::chapas_mdag(fixtures::StudyVariant::Alt1);
        RecoverQueryResult r = recover_query(alt1, fixtures::theta36());
        CHECK_THROWS_AS(available_case_plan(*r.recoverability, r.analysis_graph),
                        NotRecoverableInput);
    }
}

TEST_CASE("available-case estimates converge to complete-data estimates when closed") {
    // under the closed mechanism, the available-case estimate of a
    // recovered conditional matches the full-data estimate up to noise
    ScmSpec spec = fixtures::chapas_scm(fixtures::StudyVariant::Main);
    const int reps = 100;
    const size_t n = 5000;
    double gap_sum = 0.0, gap_sq = 0.0;
    for (int r = 0; r < reps; ++r) {
        Dataset full = sample(spec, n, 777, "conv" + std::to_string(r));
        Dataset masked = apply_missingness(full, spec, Scenario::Sim1, 777);
        int vl6 = full.column_index(NodeId("VL", 6));
        int vl0 = full.column_index(NodeId("VL", 0));
        // P(VL_6 = 1 | VL_0 = 0): complete vs available rows
        auto estimate = [&](const Dataset& d, bool use_mask) {
            double num = 0, den = 0;
            for (size_t i = 0; i < d.n; ++i) {
                if (use_mask && (d.is_missing(vl6, i) || d.is_missing(vl0, i))) continue;
                if (d.values[vl0][i] != 0.0) continue;
                den += 1;
                num += d.values[vl6][i];
            }
            return num / den;
        };
        double gap = estimate(masked, true) - estimate(full, false);
        gap_sum += gap;
        gap_sq += gap * gap;
    }
    double mean = gap_sum / reps;
    double sd = std::sqrt((gap_sq - reps * mean * mean) / (reps - 1));
    double se = sd / std::sqrt(static_cast<double>(reps));
    CHECK(std::abs(mean) <= 3.0 * se + 1e-12);
}

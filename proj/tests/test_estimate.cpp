#include <doctest.h>

#include <cmath>

#include "mdag/estimate.hpp"
#include "mdag/fixtures.hpp"
#include "mdag/impute.hpp"

using namespace mdag;

TEST_CASE("pool") {
    CcrcEstimate a{{0, 1}, {0.2, 0.4}, "complete", 1};
    CcrcEstimate b{{0, 1}, {0.4, 0.2}, "complete", 1};
    CcrcEstimate p = pool({a, b});
    CHECK(p.value[0] == doctest::Approx(0.3));
    CHECK(p.value[1] == doctest::Approx(0.3));
    CHECK(pool({a, a}).value == a.value);
    // linearity: duplicating the list leaves the mean unchanged
    CcrcEstimate dup = pool({a, b, a, b});
    CcrcEstimate half = pool({a, b});
    for (size_t i = 0; i < dup.value.size(); ++i)
        CHECK(dup.value[i] == doctest::Approx(half.value[i]).epsilon(1e-14));
    CcrcEstimate bad{{0, 2}, {0.1, 0.1}, "complete", 1};
    CHECK_THROWS_AS(pool({a, bad}), GridMismatch);
}

TEST_CASE("monte-carlo intervals") {
    CcrcEstimate truth{{0, 1}, {0.5, 0.5}, "truth", 1};
    CcrcEstimate e1{{0, 1}, {0.6, 0.5}, "mi", 1};
    CcrcEstimate e2{{0, 1}, {0.6, 0.5}, "mi", 1};
    McInterval ci = mc_interval({e1, e2}, truth);
    // constant differences give a degenerate zero-width interval
    CHECK(ci.lower[0] == doctest::Approx(0.1));
    CHECK(ci.upper[0] == doctest::Approx(0.1));
    CHECK(ci.lower[1] == doctest::Approx(0.0));

    CcrcEstimate e3{{0, 1}, {0.4, 0.5}, "mi", 1};
    McInterval wide = mc_interval({e1, e3}, truth);
    CHECK(wide.lower[0] < 0.0);
    CHECK(wide.upper[0] > 0.0);
    CHECK_THROWS_AS(mc_interval({e1}, truth), GridMismatch);
}

TEST_CASE("default grid is the 21-point half-unit grid") {
    auto g = default_grid();
    REQUIRE(g.size() == 21);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 10.0);
    CHECK(g[1] == 0.5);
}

namespace {

// Tiny three-variable study: baseline L, exposure A (intervened), binary
// outcome Y. The null variant makes Y independent of the exposure.
ScmSpec toy_spec(bool null_effect) {
    std::vector<NodeDecl> nodes{{NodeId("L", 0), NodeRole::Observed, false, std::nullopt},
                                {NodeId("A", 1), NodeRole::Observed, false, std::nullopt},
                                {NodeId("Y", 1), NodeRole::Observed, false, std::nullopt}};
    std::vector<std::pair<NodeId, NodeId>> edges{{NodeId("L", 0), NodeId("A", 1)},
                                                 {NodeId("L", 0), NodeId("Y", 1)},
                                                 {NodeId("A", 1), NodeId("Y", 1)}};
    ScmSpec spec;
    spec.name = "toy";
    spec.graph = MDag::build(nodes, edges);
    auto add = [&](NodeId id, Family fam, std::vector<std::string> params) {
        NodeDistribution nd;
        nd.id = std::move(id);
        nd.family = fam;
        for (const auto& p : params) nd.params.push_back(Formula::parse(p));
        spec.nodes.push_back(std::move(nd));
    };
    add(NodeId("L", 0), Family::Normal, {"1", "0.5"});
    add(NodeId("A", 1), Family::TruncatedNormalRedraw, {"1 + 0.8*L@0", "1"});
    spec.nodes.back().trunc = TruncBounds{0.0, 0.0, 0.5, 10.0, 9.0, 10.0};
    if (null_effect)
        add(NodeId("Y", 1), Family::Bernoulli, {"1/(1+exp(-(0.2*L@0 - 0.5)))"});
    else
        add(NodeId("Y", 1), Family::Bernoulli,
            {"1 - (1/(1+exp(-(0.3 + 0.2*L@0 + 1.5*sqrt(A@1)))))"});
    spec.validate();
    return spec;
}

CausalQuery toy_query() {
    CausalQuery q;
    q.outcome = NodeId("Y", 1);
    q.outcome_value = Value(1.0);
    q.interventions = {{NodeId("A", 1), Value(std::string("a"))}};
    q.confounders = {NodeId("L", 0)};
    return q;
}

}  // namespace

TEST_CASE("g-computation recovers a toy truth curve from complete data") {
    ScmSpec spec = toy_spec(false);
    CausalQuery q = toy_query();
    std::vector<double> grid{0.0, 1.0, 2.0, 4.0, 8.0};

    CcrcEstimate truth = simulate_truth(spec, q, grid, 200000, 11, 2);
    IdentificationResult ident = backdoor_gformula(spec.graph, q);
    REQUIRE(ident.identifiable);

    Dataset d = sample(spec, 20000, 21);
    GcomputeOptions opts;
    opts.grid = grid;
    opts.mc_draws = 40000;
    opts.seed = 21;
    CcrcEstimate est = gcompute(d, ident.estimand, q, opts);
    for (size_t i = 0; i < grid.size(); ++i) {
        CHECK(est.value[i] >= 0.0);
        CHECK(est.value[i] <= 1.0);
        CHECK(std::abs(est.value[i] - truth.value[i]) < 0.015);
    }
}

TEST_CASE("null exposure effect produces a flat curve") {
    ScmSpec spec = toy_spec(true);
    CausalQuery q = toy_query();
    std::vector<double> grid{0.0, 2.5, 5.0, 10.0};
    Dataset d = sample(spec, 20000, 33);
    IdentificationResult ident = backdoor_gformula(spec.graph, q);
    GcomputeOptions opts;
    opts.grid = grid;
    opts.mc_draws = 40000;
    opts.seed = 33;
    CcrcEstimate est = gcompute(d, ident.estimand, q, opts);
    double lo = *std::min_element(est.value.begin(), est.value.end());
    double hi = *std::max_element(est.value.begin(), est.value.end());
    // two MC standard errors of the plug-in mean
    double se = std::sqrt(0.25 / opts.mc_draws) + std::sqrt(0.25 / d.n);
    CHECK(hi - lo <= 4.0 * se + 0.004);
}

TEST_CASE("insufficient rows abort the factor fit") {
    ScmSpec spec = toy_spec(false);
    CausalQuery q = toy_query();
    Dataset d = sample(spec, 25, 3);
    IdentificationResult ident = backdoor_gformula(spec.graph, q);
    GcomputeOptions opts;
    opts.grid = {0.0, 1.0};
    opts.mc_draws = 10;
    CHECK_THROWS_AS(gcompute(d, ident.estimand, q, opts), InsufficientRows);
}

#include <doctest.h>

#include "mdag/evaluate.hpp"
#include "mdag/expr.hpp"
#include "mdag/fixtures.hpp"
#include "oracles.hpp"

using namespace mdag;

namespace {

VarTerm v(const char* token) { return {NodeId::parse(token), false}; }

}  // namespace

TEST_CASE("pretty printing follows the derivation conventions") {
    CHECK(pretty_print(make_marginal({v("Age")})) == "P(Age)");

    auto recovered = make_conditional({v("Y1")}, {v("A1")},
                                      {{NodeId("M_Y1"), 0.0, false, true}});
    CHECK(pretty_print(recovered) == "P(Y1 | A1, M_Y1 = 0)");

    auto estimand = make_sum(
        {NodeId("Y1")},
        make_product({make_conditional({v("Y2")}, {v("A1"), v("A2"), v("Y1")}),
                      make_conditional({v("Y1")}, {v("A1")})}));
    CHECK(pretty_print(estimand) == "Σ_{Y1} P(Y2 | A1, A2, Y1) P(Y1 | A1)");
    CHECK(pretty_print(estimand, PrintStyle::Latex) ==
          "\\sum_{Y_{1}} P(Y_{2} \\mid A_{1}, A_{2}, Y_{1}) P(Y_{1} \\mid A_{1})");

    auto po = make_conditional({{NodeId("Y2"), true}}, {v("A1"), {NodeId("Y1"), true}});
    CHECK(pretty_print(po) == "P(Y2^{M=0} | A1, Y1^{M=0})");

    auto fixed = make_conditional({v("VL@36")}, {v("Age")},
                                  {{NodeId("EFV", 6), std::string("a"), false, false}});
    CHECK(pretty_print(fixed) == "P(VL_36 | Age, EFV_6 = a)");
    CHECK(var_display(NodeId("M_EFV", 6)) == "M_{EFV_6}");
    CHECK(var_display(NodeId("M_Y1")) == "M_Y1");
}

TEST_CASE("expression JSON round-trips") {
    auto estimand = make_sum(
        {NodeId("Y1")},
        make_product(
            {make_conditional({{NodeId("Y2"), true}}, {v("A1"), v("A2"), {NodeId("Y1"), true}},
                              {{NodeId("M_Y2"), 0.0, false, true}}),
             make_conditional({v("Y1")}, {v("A1")},
                              {{NodeId("EFV", 6), std::string("a"), false, false}})}));
    ExprPtr back = expr_from_json(expr_to_json(estimand));
    CHECK(expr_equal_canonical(estimand, back));
    CHECK(pretty_print(estimand) == pretty_print(back));

    auto q = make_quotient(make_marginal({v("A")}), make_marginal({v("B")}));
    CHECK(expr_equal_canonical(q, expr_from_json(expr_to_json(q))));
    CHECK(contains_quotient(q));
    CHECK_FALSE(contains_quotient(estimand));
}

TEST_CASE("sum constructors drop vacuous variables and flatten") {
    auto f = make_conditional({v("Y")}, {v("X")});
    auto s = make_sum({NodeId("Z")}, f);  // Z not free
    CHECK(s == f);
    auto nested = make_sum({NodeId("X")}, make_sum({NodeId("Y")}, f));
    CHECK(nested->kind == Expr::Kind::SumOver);
    CHECK(nested->sum_vars.size() == 2);
    auto prod = make_product({make_product({f, f}), f});
    CHECK(prod->factors.size() == 3);
}

TEST_CASE("evaluate: chain rule identity on random joints") {
    Rng rng(42);
    for (int rep = 0; rep < 25; ++rep) {
        MDag g = oracle::random_dag(rng, 5, 0);
        DiscreteJoint j = oracle::random_binary_joint(g, rng);
        // Σ_X P(Y|X) P(X) == P(Y) for the two first variables
        NodeId xid = j.table.id(0), yid = j.table.id(1);
        auto lhs = make_sum({xid}, make_product({make_conditional({{yid, false}}, {{xid, false}}),
                                                 make_marginal({{xid, false}})}));
        auto rhs = make_marginal({{yid, false}});
        Factor fl = evaluate(lhs, j);
        Factor fr = evaluate(rhs, j);
        REQUIRE(fl.vars == fr.vars);
        for (size_t i = 0; i < fl.values.size(); ++i)
            CHECK(fl.values[i] == doctest::Approx(fr.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("evaluate: exact rational arithmetic on a tiny joint") {
    DiscreteJointT<Rat> j;
    int x = j.table.add(NodeId("X"), {0.0, 1.0});
    int y = j.table.add(NodeId("Y"), {0.0, 1.0});
    j.probs.vars = {x, y};
    j.probs.values = {Rat(1, 8), Rat(3, 8), Rat(1, 4), Rat(1, 4)};
    j.validate();
    auto lhs = make_sum({NodeId("X")},
                        make_product({make_conditional({v("Y")}, {v("X")}),
                                      make_marginal({v("X")})}));
    FactorT<Rat> out = evaluate(lhs, j);
    REQUIRE(out.values.size() == 2);
    CHECK(out.values[0] == Rat(3, 8));
    CHECK(out.values[1] == Rat(5, 8));
}

TEST_CASE("evaluate raises on impossible conditioning events") {
    DiscreteJoint j;
    int x = j.table.add(NodeId("X"), {0.0, 1.0});
    int y = j.table.add(NodeId("Y"), {0.0, 1.0});
    j.probs.vars = {x, y};
    j.probs.values = {0.5, 0.5, 0.0, 0.0};  // X = 1 never happens
    j.validate();
    auto cond = make_conditional({v("Y")}, {}, {{NodeId("X"), 1.0, false, false}});
    CHECK_THROWS_AS(evaluate(cond, j), PositivityViolation);
    // lenient mode returns zeros instead
    Factor lenient = evaluate(cond, j, {}, /*strict=*/false);
    for (double val : lenient.values) CHECK(val == 0.0);
    // conditioning on a value outside the domain is impossible too
    auto bad = make_conditional({v("Y")}, {}, {{NodeId("X"), 7.0, false, false}});
    CHECK_THROWS_AS(evaluate(bad, j), PositivityViolation);
    // unbound symbols are a distinct error
    auto sym = make_conditional({v("Y")}, {}, {{NodeId("X"), std::string("a"), false, false}});
    CHECK_THROWS_AS(evaluate(sym, j), UnboundVariable);
    SymbolEnv env{{"a", 0.0}};
    CHECK_NOTHROW(evaluate(sym, j, env));
}

TEST_CASE("truncated factorization") {
    Rng rng(7);
    SUBCASE("empty intervention returns the joint") {
        MDag g = oracle::random_dag(rng, 4, 0);
        DiscreteJoint j = oracle::random_binary_joint(g, rng);
        Factor f = truncated_factorization(j, g, {});
        REQUIRE(f.vars == j.probs.vars);
        for (size_t i = 0; i < f.values.size(); ++i)
            CHECK(f.values[i] == doctest::Approx(j.probs.values[i]).epsilon(1e-12));
    }

    SUBCASE("intervening on a root leaves the rest unchanged") {
        // A → Y, X → Y; intervene on leaf Y: P(A, X) marginal unchanged
        std::vector<NodeDecl> nodes{{NodeId("A"), NodeRole::Observed, false, std::nullopt},
                                    {NodeId("X"), NodeRole::Observed, false, std::nullopt},
                                    {NodeId("Y"), NodeRole::Observed, false, std::nullopt}};
        MDag g = MDag::build(nodes, {{NodeId("A"), NodeId("Y")}, {NodeId("X"), NodeId("Y")}});
        DiscreteJoint j = oracle::random_binary_joint(g, rng);
        Factor f = truncated_factorization(j, g, {{NodeId("Y"), 1.0}});
        // marginal over A, X must match the observational marginal
        std::vector<int> ax{j.table.index(NodeId("A")), j.table.index(NodeId("X"))};
        Factor obs = factor_marginal_to(j.probs, ax, j.table);
        REQUIRE(f.vars == obs.vars);
        for (size_t i = 0; i < f.values.size(); ++i)
            CHECK(f.values[i] == doctest::Approx(obs.values[i]).epsilon(1e-12));
    }

    SUBCASE("unknown node") {
        MDag g = oracle::random_dag(rng, 3, 0);
        DiscreteJoint j = oracle::random_binary_joint(g, rng);
        CHECK_THROWS_AS(truncated_factorization(j, g, {{NodeId("Nope"), 1.0}}), UnknownNode);
    }
}

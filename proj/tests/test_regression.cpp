#include <doctest.h>

#include <cmath>

#include "mdag/regression.hpp"
#include "mdag/rng.hpp"
#include "oracles.hpp"

using namespace mdag;

TEST_CASE("linear fit is exact on noiseless data") {
    const int n = 40;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    Rng rng(5);
    for (int i = 0; i < n; ++i) {
        double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        X(i, 0) = 1.0;
        X(i, 1) = a;
        X(i, 2) = b;
        y(i) = 0.7 - 1.3 * a + 0.25 * b;
    }
    RegressionModel m = fit(ModelFamily::Linear, X, y);
    CHECK(m.coef(0, 0) == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(m.coef(1, 0) == doctest::Approx(-1.3).epsilon(1e-10));
    CHECK(m.coef(2, 0) == doctest::Approx(0.25).epsilon(1e-10));
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x = X.row(i);
        CHECK(std::abs(m.predict_linear(x) - y(i)) < 1e-10);
    }
    CHECK(m.sigma < 1e-9);
}

TEST_CASE("logistic IRLS matches the grid-search maximizer within 1e-4") {
    // 200-row synthetic sample, two coefficients
    const int n = 200;
    std::vector<double> xs(n), ys(n);
    Rng rng(99);
    for (int i = 0; i < n; ++i) {
        xs[i] = rng.uniform(-2.0, 2.0);
        double p = logistic_cdf(-0.4 + 1.1 * xs[i]);
        ys[i] = rng.bernoulli(p) ? 1.0 : 0.0;
    }
    auto [g0, g1] = oracle::logistic_grid_mle(xs, ys);

    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = xs[i];
        y(i) = ys[i];
    }
    RegressionModel m = fit(ModelFamily::Logistic, X, y);
    REQUIRE(m.converged);
    CHECK_FALSE(m.separation);
    CHECK(std::abs(m.coef(0, 0) - g0) < 1e-4);
    CHECK(std::abs(m.coef(1, 0) - g1) < 1e-4);
}

TEST_CASE("perfect separation is flagged") {
    const int n = 60;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    Rng rng(3);
    for (int i = 0; i < n; ++i) {
        double x = rng.uniform(-1, 1);
        X(i, 0) = 1.0;
        X(i, 1) = x;
        y(i) = x > 0 ? 1.0 : 0.0;
    }
    RegressionModel m = fit(ModelFamily::Logistic, X, y);
    CHECK(m.separation);
}

TEST_CASE("degenerate designs") {
    Eigen::MatrixXd X(10, 3);
    Eigen::VectorXd y(10);
    Rng rng(8);
    for (int i = 0; i < 10; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = rng.uniform(0, 1);
        X(i, 2) = 4.2;  // constant column
        y(i) = rng.uniform(0, 1);
    }
    RegressionModel m = fit(ModelFamily::Linear, X, y);
    CHECK(m.dropped == std::vector<int>{2});
    CHECK(m.coef(2, 0) == 0.0);

    SUBCASE("too few rows") {
        Eigen::MatrixXd Xs(3, 3);
        Eigen::VectorXd ys(3);
        CHECK_THROWS_AS(fit(ModelFamily::Linear, Xs, ys), InsufficientRows);
    }

    SUBCASE("collinear columns are dropped") {
        Eigen::MatrixXd Xc(12, 3);
        Eigen::VectorXd yc(12);
        for (int i = 0; i < 12; ++i) {
            double v = rng.uniform(0, 1);
            Xc(i, 0) = 1.0;
            Xc(i, 1) = v;
            Xc(i, 2) = 2.0 * v;  // exact collinearity
            yc(i) = v + rng.uniform(0, 0.01);
        }
        RegressionModel m2 = fit(ModelFamily::Linear, Xc, yc);
        CHECK(m2.dropped.size() == 1);
    }
}

TEST_CASE("multinomial logit recovers category probabilities") {
    const int n = 4000;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    Rng rng(17);
    // three categories with x-dependent log-odds against category 1
    for (int i = 0; i < n; ++i) {
        double x = rng.uniform(-1, 1);
        double e2 = std::exp(0.5 + 1.0 * x), e3 = std::exp(-0.5 - 0.8 * x);
        double denom = 1 + e2 + e3;
        double u = rng.uniform();
        double cat = u < 1 / denom ? 1.0 : (u < (1 + e2) / denom ? 2.0 : 3.0);
        X(i, 0) = 1.0;
        X(i, 1) = x;
        y(i) = cat;
    }
    RegressionModel m = fit(ModelFamily::MultinomialLogit, X, y);
    REQUIRE(m.converged);
    REQUIRE(m.categories == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(std::abs(m.coef(0, 0) - 0.5) < 0.15);
    CHECK(std::abs(m.coef(1, 0) - 1.0) < 0.25);
    CHECK(std::abs(m.coef(0, 1) + 0.5) < 0.15);
    Eigen::VectorXd x0(2);
    x0 << 1.0, 0.0;
    auto probs = m.predict_multinomial(x0);
    double sum = 0;
    for (double p : probs) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coefficient draws center on the estimate") {
    const int n = 500;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    Rng rng(4);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = rng.uniform(-1, 1);
        y(i) = 1.0 + 0.5 * X(i, 1) + rng.normal(0, 0.3);
    }
    RegressionModel m = fit(ModelFamily::Linear, X, y);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    const int draws = 4000;
    for (int k = 0; k < draws; ++k) mean += draw_coefficients(m, rng);
    mean /= draws;
    CHECK(std::abs(mean(0) - m.coef(0, 0)) < 0.01);
    CHECK(std::abs(mean(1) - m.coef(1, 0)) < 0.01);
}

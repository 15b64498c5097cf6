#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mdag/errors.hpp"
#include "mdag/rng.hpp"

namespace mdag {

enum class ModelFamily { Logistic, Linear, MultinomialLogit };

// A fitted GLM. For MultinomialLogit the coefficient matrix has one column
// per non-reference category (categories 2..K versus category 1).
struct RegressionModel {
    ModelFamily family = ModelFamily::Linear;
    Eigen::MatrixXd coef;          // p × (K-1); p × 1 for logistic/linear
    double sigma = 0.0;            // residual sd (linear only)
    Eigen::MatrixXd coef_cov;      // asymptotic covariance of vec(coef) (logistic/linear)
    bool converged = true;
    bool separation = false;       // logistic: divergence flagged, fit still usable
    int iterations = 0;
    std::vector<int> dropped;      // zero-variance / collinear columns removed
    int n_rows = 0;
    std::vector<double> categories;  // multinomial outcome levels

    double predict_linear(const Eigen::VectorXd& x) const;
    double predict_prob(const Eigen::VectorXd& x) const;  // logistic
    // multinomial: probabilities per category
    std::vector<double> predict_multinomial(const Eigen::VectorXd& x) const;
};

// Maximum-likelihood fit; the design matrix X must include the intercept
// column if one is wanted. Logistic uses iteratively reweighted least
// squares (tolerance 1e-8 on the max coefficient change, 50 iterations);
// linear uses least squares via a rank-revealing decomposition.
// Zero-variance columns (other than the first/intercept) are dropped and
// reported. Throws InsufficientRows when rows < columns + 1 and
// RankDeficient when the design loses rank even after drops.
RegressionModel fit(ModelFamily family, const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

double logistic_cdf(double x);

// Draws a coefficient vector from the asymptotic normal around the MLE
// (used by the imputation engine's parameter perturbation).
Eigen::VectorXd draw_coefficients(const RegressionModel& m, Rng& rng);

}  // namespace mdag

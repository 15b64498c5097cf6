#pragma once

#include <map>
#include <string>
#include <vector>

#include "mdag/graph.hpp"
#include "mdag/scm.hpp"

namespace mdag {

struct MiOptions {
    int m = 5;          // completed datasets
    int sweeps = 10;    // chained-equation burn-in sweeps
    int max_lag_steps = 1;  // predictor window on the study time grid
    // per-variable-family imputation bounds enforced by redraw
    std::map<std::string, std::pair<double, double>> bounds = {{"EFV", {0.0, 35.0}}};
    int max_redraws = 100;  // then clamp to the bound
};

struct MiResult {
    std::vector<Dataset> completed;
    bool converged = true;  // false when some column model failed to converge
    int failed_fits = 0;
};

// Multiple imputation by chained equations with parameter perturbation:
// incomplete substantive columns are visited in temporal order; each is
// regressed (logistic for binary, linear otherwise, linear covariate
// scale) on the substantive variables in its time window, coefficients are
// drawn from their asymptotic normal around the MLE, and missing cells are
// drawn from the fitted predictive distribution, redrawn into bounds where
// configured. A dataset without missing cells comes back as m copies.
MiResult impute_mi(const Dataset& d, const MDag& g, uint64_t seed, const MiOptions& opts = {});

}  // namespace mdag

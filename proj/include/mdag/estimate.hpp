#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdag/expr.hpp"
#include "mdag/graph.hpp"
#include "mdag/identify.hpp"
#include "mdag/regression.hpp"
#include "mdag/scm.hpp"

namespace mdag {

// Counterfactual concentration-response curve estimate: per grid value a,
// the estimated outcome probability under do(exposure_t = a for all t).
struct CcrcEstimate {
    std::vector<double> grid;
    std::vector<double> value;
    std::string method;  // truth | complete | available | mi
    int replications = 1;
};

std::vector<double> default_grid();  // 0, 0.5, ..., 10 (21 points)

// Pointwise mean across estimates on a common grid.
CcrcEstimate pool(const std::vector<CcrcEstimate>& estimates);

struct McInterval {
    std::vector<double> grid;
    std::vector<double> mean_diff, lower, upper;  // mean ± 2·sd/√R of (estimate − truth)
};

McInterval mc_interval(const std::vector<CcrcEstimate>& per_replication,
                       const CcrcEstimate& truth);

struct GcomputeOptions {
    enum class Mode { Complete, AvailableCase };
    Mode mode = Mode::Complete;
    std::vector<double> grid;  // empty → default_grid()
    int mc_draws = 10000;
    int min_rows = 30;  // InsufficientRows below this per-factor threshold
    // model design policy: covariates of each factor restricted to its
    // target's time window (in steps of the factorization's time grid)
    // plus baseline/untimed history
    int max_lag_steps = 1;
    // exposure covariates enter on the square-root scale
    bool sqrt_exposure = true;
    uint64_t seed = 1;
    std::string salt;
};

// Plug-in g-formula estimation of the CCRC from a dataset and an
// identified (recovered-form or complete-data) factorization. Each
// conditional factor is fitted as a main-effects GLM on its policy-reduced
// conditioning set; the baseline block is resampled empirically; the curve
// is Monte-Carlo forward-simulated with the exposures pinned to each grid
// value.
CcrcEstimate gcompute(const Dataset& d, const ExprPtr& factorization, const CausalQuery& query,
                      const GcomputeOptions& opts);

// The true curve by interventional simulation.
CcrcEstimate simulate_truth(const ScmSpec& spec, const CausalQuery& query,
                            const std::vector<double>& grid, size_t n, uint64_t seed,
                            int jobs = 0);

}  // namespace mdag

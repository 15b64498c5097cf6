#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdag/estimate.hpp"
#include "mdag/fixtures.hpp"
#include "mdag/impute.hpp"

namespace mdag {

// One simulation-study run: truth curve plus complete-data, available-case
// and multiple-imputation estimators over R replications.
struct ReproduceConfig {
    Scenario scenario = Scenario::Sim1;
    fixtures::StudyVariant variant = fixtures::StudyVariant::Main;
    size_t n = 5000;
    int reps = 100;
    uint64_t seed = 1;
    int m = 5;  // imputations per replication
    int jobs = 0;  // worker threads; 0 = hardware concurrency
    int mc_draws = 10000;
    size_t truth_n = 400000;
    bool run_complete = true;
    bool run_available = true;
    bool run_mi = true;
    std::vector<double> grid;  // empty → default 21-point grid
};

struct ReproduceResult {
    ReproduceConfig config;
    CcrcEstimate truth;
    std::optional<CcrcEstimate> complete_mean, available_mean, mi_mean;
    std::vector<CcrcEstimate> complete_reps, available_reps, mi_reps;
    std::optional<McInterval> complete_ci, available_ci, mi_ci;
    int skipped = 0;  // replications aborted by InsufficientRows
};

ReproduceResult run_reproduce(const ReproduceConfig& cfg);

// ccrc.csv (a, truth, complete, available, mi), one ci_<method>.csv per
// estimator in the (EFV, Lower, Upper) layout, and a plot-ready long file.
void write_reproduce_outputs(const ReproduceResult& r, const std::string& outdir);

}  // namespace mdag
